#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

#include <Eigen/Core>

namespace prmrl {

// Configuration-space point. Planar tasks keep z = 0.
using ConfigPoint = Eigen::Vector3d;

using Rng = std::mt19937_64;

enum class TaskKind { indoor, aerial };

std::string_view to_string(TaskKind task);
TaskKind parse_task(std::string_view text);

enum class ErrorCategory {
  invalid_argument = 2,
  io = 3,
  parse = 4,
  no_free_space = 5,
  no_path = 6,
  execution_failed = 7,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }

 private:
  ErrorCategory category_;
};

class ParseError : public Error {
 public:
  ParseError(std::string source, int line, const std::string& what);

  const std::string& source() const { return source_; }
  int line() const { return line_; }

 private:
  std::string source_;
  int line_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& what);

// splitmix64 finalizer over (base, index); used for per-trial and per-edge seeds.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t a, std::uint64_t b) {
  return mix_seed(mix_seed(base, a), b);
}

// Uniform double in [0, 1) from the top 53 bits of one draw.
inline double uniform01(Rng& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

inline double uniform(Rng& rng, double lo, double hi) {
  return lo + (hi - lo) * uniform01(rng);
}

double normal(Rng& rng);
// Two independent standard normals from one Box-Muller draw.
std::pair<double, double> normal_pair(Rng& rng);

// Shortest round-trip decimal representation.
std::string format_double(double value);
double parse_double(std::string_view text);
long long parse_int(std::string_view text);

// key=value text files: '#' starts a comment, blank lines ignored.
using KeyValues = std::map<std::string, std::string, std::less<>>;

KeyValues parse_key_values(std::string_view text, const std::string& source);
KeyValues read_key_values(const std::string& path);
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view contents);

double angle_wrap(double angle);

constexpr double kPi = 3.14159265358979323846;

inline double deg2rad(double deg) { return deg * kPi / 180.0; }
inline double rad2deg(double rad) { return rad * 180.0 / kPi; }

}  // namespace prmrl
