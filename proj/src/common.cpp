#include "ltcd/common.hpp"

#include <cstdlib>

namespace ltcd {

const char* code_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::length_mismatch: return "length_mismatch";
    case ErrorCode::budget_exceeded: return "budget_exceeded";
    case ErrorCode::infeasible: return "infeasible";
    case ErrorCode::stage_failure: return "stage_failure";
    case ErrorCode::malformed: return "malformed";
    case ErrorCode::verification_failed: return "verification_failed";
    case ErrorCode::no_successful_seed: return "no_successful_seed";
    case ErrorCode::parse: return "parse";
  }
  return "unknown";
}

Error::Error(ErrorCode code, const std::string& module, const std::string& detail)
    : std::runtime_error(module + "." + code_name(code) + ": " + detail), code_(code), module_(module) {}

void Budget::charge(std::uint64_t evals, const char* module, const std::string& what) const {
  if (evals > limit)
    throw Error(ErrorCode::budget_exceeded, module,
                what + " needs " + std::to_string(evals) + " evaluations, budget " + std::to_string(limit));
}

Budget Budget::from_env() {
  Budget b;
  if (const char* s = std::getenv("LTCD_BUDGET")) {
    char* end = nullptr;
    unsigned long long v = std::strtoull(s, &end, 10);
    if (end && *end == '\0' && v > 0) b.limit = v;
  }
  return b;
}

std::uint64_t sat_mul(std::uint64_t a, std::uint64_t b) {
  if (a == 0 || b == 0) return 0;
  if (a > ~std::uint64_t{0} / b) return ~std::uint64_t{0};
  return a * b;
}

std::uint64_t pow2_sat(unsigned e) { return e >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << e); }

std::string rat_str(const Rat& r) {
  Rat c = r;
  c.canonicalize();
  return c.get_num().get_str() + "/" + c.get_den().get_str();
}

Rat parse_rat(const std::string& s) {
  Rat r;
  if (s.empty() || r.set_str(s, 10) != 0 || r.get_den() == 0)
    throw Error(ErrorCode::parse, "common", "bad rational '" + s + "'");
  r.canonicalize();
  return r;
}

Int parse_int(const std::string& s) {
  Int v;
  if (s.empty() || v.set_str(s, 10) != 0) throw Error(ErrorCode::parse, "common", "bad integer '" + s + "'");
  return v;
}

unsigned floor_log2(const Int& x) {
  if (x <= 0) throw Error(ErrorCode::invalid_argument, "common", "log2 of non-positive");
  return static_cast<unsigned>(mpz_sizeinbase(x.get_mpz_t(), 2)) - 1;
}

unsigned ceil_log2(const Int& x) {
  unsigned f = floor_log2(x);
  return is_pow2(x) ? f : f + 1;
}

bool is_pow2(const Int& x) { return x > 0 && mpz_popcount(x.get_mpz_t()) == 1; }

Rat rat_pow(const Rat& x, unsigned e) {
  Int num, den;
  mpz_pow_ui(num.get_mpz_t(), x.get_num().get_mpz_t(), e);
  mpz_pow_ui(den.get_mpz_t(), x.get_den().get_mpz_t(), e);
  Rat r(num, den);
  r.canonicalize();
  return r;
}

int cmp_root_power(const Rat& x, const Int& n, const Rat& exponent) {
  if (x < 0 || n < 1) throw Error(ErrorCode::invalid_argument, "common", "cmp_root_power domain");
  Rat e = exponent;
  e.canonicalize();
  unsigned long b = e.get_den().get_ui();
  // x^b vs n^a, a may be negative: x^b * n^{-a} vs 1
  Rat lhs = rat_pow(x, static_cast<unsigned>(b));
  Int a = e.get_num();
  Int na;
  if (a >= 0) {
    mpz_pow_ui(na.get_mpz_t(), n.get_mpz_t(), a.get_ui());
    return cmp(lhs, Rat(na));
  }
  Int ma = -a;
  mpz_pow_ui(na.get_mpz_t(), n.get_mpz_t(), ma.get_ui());
  return cmp(lhs * na, Rat(1));
}

Int floor_root_power(const Int& n, const Rat& exponent) {
  if (exponent < 0) throw Error(ErrorCode::invalid_argument, "common", "negative exponent");
  Rat e = exponent;
  e.canonicalize();
  Int pa;
  mpz_pow_ui(pa.get_mpz_t(), n.get_mpz_t(), e.get_num().get_ui());
  Int r;
  mpz_root(r.get_mpz_t(), pa.get_mpz_t(), e.get_den().get_ui());
  return r;
}

Int ceil_root_power(const Int& n, const Rat& exponent) {
  Int f = floor_root_power(n, exponent);
  return cmp_root_power(Rat(f), n, exponent) == 0 ? f : Int(f + 1);
}

}  // namespace ltcd

#include "ltcd/kernels.hpp"

namespace ltcd {

void set_workers(int w) {
#ifdef _OPENMP
  if (w > 0) omp_set_num_threads(w);
#else
  (void)w;
#endif
}

int workers() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace ltcd
