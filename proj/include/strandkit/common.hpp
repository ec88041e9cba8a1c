#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace strandkit {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

enum class ErrorCode {
  invalid_argument,
  sizing,
  out_of_chart,
  degenerate,
  io,
  bad_magic,
  truncated,
  count_overflow,
  unsupported_version,
  parse,
};

std::string_view to_string(ErrorCode code);

// Every failure in the library surfaces as this exception; `code()` is what the
// CLI prints on its machine-readable error line.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline void require(bool cond, ErrorCode code, const std::string& what) {
  if (!cond) throw Error(code, what);
}

// splitmix64 finalizer; used both as a stateless hash and as the step of Rng.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t hash_combine(std::uint64_t seed) { return mix64(seed); }

template <typename... Rest>
constexpr std::uint64_t hash_combine(std::uint64_t seed, std::uint64_t v,
                                     Rest... rest) {
  return hash_combine(mix64(seed ^ mix64(v)), static_cast<std::uint64_t>(rest)...);
}

// Small counter-based generator. Cheap to construct, so every strand (or
// every texel) gets its own stream derived from (seed, index) and parallel
// loops stay bitwise-deterministic regardless of scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed = 0) : state_(seed) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return ~result_type{0}; }

  result_type operator()() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  Rng fork(std::uint64_t stream) const { return Rng(hash_combine(state_, stream)); }

 private:
  std::uint64_t state_;
};

constexpr double kPi = 3.14159265358979323846;

}  // namespace strandkit
