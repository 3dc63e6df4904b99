#include "prmrl/common.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace prmrl {

std::string_view to_string(TaskKind task) {
  return task == TaskKind::indoor ? "indoor" : "aerial";
}

TaskKind parse_task(std::string_view text) {
  if (text == "indoor") return TaskKind::indoor;
  if (text == "aerial") return TaskKind::aerial;
  fail(ErrorCategory::invalid_argument, "unknown task '" + std::string(text) + "'");
}

ParseError::ParseError(std::string source, int line, const std::string& what)
    : Error(ErrorCategory::parse, source + ":" + std::to_string(line) + ": " + what),
      source_(std::move(source)),
      line_(line) {}

void fail(ErrorCategory category, const std::string& what) { throw Error(category, what); }

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double normal(Rng& rng) {
  // Box-Muller; one draw per call keeps the stream position simple to reason about.
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

std::pair<double, double> normal_pair(Rng& rng) {
  double u1 = uniform01(rng);
  while (u1 <= 0.0) u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double a = 2.0 * kPi * u2;
  return {r * std::cos(a), r * std::sin(a)};
}

std::string format_double(double value) {
  std::array<char, 32> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  return std::string(buf.data(), end);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  if (text == "nan") return std::nan("");
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    fail(ErrorCategory::parse, "not a number: '" + std::string(text) + "'");
  }
  return value;
}

long long parse_int(std::string_view text) {
  long long value = 0;
  auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || end != text.data() + text.size()) {
    fail(ErrorCategory::parse, "not an integer: '" + std::string(text) + "'");
  }
  return value;
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

}  // namespace

KeyValues parse_key_values(std::string_view text, const std::string& source) {
  KeyValues out;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.npos : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ParseError(source, line_no, "expected key=value");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError(source, line_no, "empty key");
    out[std::string(key)] = std::string(trim(line.substr(eq + 1)));
  }
  return out;
}

KeyValues read_key_values(const std::string& path) {
  return parse_key_values(read_text_file(path), path);
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCategory::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, std::string_view contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCategory::io, "cannot write '" + path + "'");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  if (!out) fail(ErrorCategory::io, "write failed for '" + path + "'");
}

double angle_wrap(double angle) {
  // (-pi, pi]
  double a = std::remainder(angle, 2.0 * kPi);
  if (a <= -kPi) a += 2.0 * kPi;
  return a;
}

}  // namespace prmrl
