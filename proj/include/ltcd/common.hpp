#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace ltcd {

using Int = mpz_class;
using Rat = mpq_class;

enum class ErrorCode {
  invalid_argument,
  length_mismatch,
  budget_exceeded,
  infeasible,
  stage_failure,
  malformed,
  verification_failed,
  no_successful_seed,
  parse,
};

const char* code_name(ErrorCode c);

// what() is "<module>.<code>: <detail>"
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& module, const std::string& detail);
  ErrorCode code() const { return code_; }
  const std::string& module() const { return module_; }
  std::string qualified() const { return module_ + "." + code_name(code_); }

 private:
  ErrorCode code_;
  std::string module_;
};

// Hard cap on enumerated evaluations. Exceeding it throws; nothing is
// approximated silently.
struct Budget {
  static constexpr std::uint64_t kDefault = std::uint64_t{1} << 22;
  std::uint64_t limit = kDefault;

  void charge(std::uint64_t evals, const char* module, const std::string& what) const;
  static Budget unlimited() { return Budget{~std::uint64_t{0}}; }
  static Budget from_env();
};

// saturating a*b for budget arithmetic
std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b);
std::uint64_t pow2_sat(unsigned e);

std::string rat_str(const Rat& r);
Rat parse_rat(const std::string& s);
Int parse_int(const std::string& s);

// ceil(log2(x)) for x >= 1, and floor
unsigned ceil_log2(const Int& x);
unsigned floor_log2(const Int& x);
bool is_pow2(const Int& x);

// exact comparisons of x against n^(a/b) with b > 0, x >= 0, n >= 1
// returns sign of x^b - n^a
int cmp_root_power(const Rat& x, const Int& n, const Rat& exponent);
// largest integer v with v <= n^exponent
Int floor_root_power(const Int& n, const Rat& exponent);
Int ceil_root_power(const Int& n, const Rat& exponent);

Rat rat_pow(const Rat& x, unsigned e);

inline int sign_of(const Rat& r) { return sgn(r); }

// canonical a / b
inline Rat frac(std::uint64_t a, std::uint64_t b) {
  Rat r(Int(static_cast<unsigned long>(a)), Int(static_cast<unsigned long>(b)));
  r.canonicalize();
  return r;
}

// SplitMix64 step; the only seed-splitting primitive in the library
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
// child seed `index` of `master`
inline std::uint64_t split_seed(std::uint64_t master, std::uint64_t index) {
  std::uint64_t s = master ^ (index * 0xd1b54a32d192ed03ull);
  return splitmix64(s);
}

}  // namespace ltcd
