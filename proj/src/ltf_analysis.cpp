#include "ltcd/ltf_analysis.hpp"

#include <algorithm>
#include <numeric>

namespace ltcd {

namespace {
constexpr const char* kMod = "ltf";

void require_nonzero(const std::vector<Int>& w) {
  for (const auto& x : w)
    if (x != 0) return;
  throw Error(ErrorCode::invalid_argument, kMod, "all-zero weight vector");
}
}  // namespace

Int norm2_sq(const std::vector<Int>& w) {
  Int s = 0;
  for (const auto& x : w) s += x * x;
  return s;
}

Int norm1(const std::vector<Int>& w) {
  Int s = 0;
  for (const auto& x : w) s += abs(x);
  return s;
}

RegularityReport is_regular(const std::vector<Int>& w, const Rat& eps) {
  require_nonzero(w);
  RegularityReport r;
  r.eps = eps;
  const Rat bound = eps * eps * Rat(norm2_sq(w));
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (Rat(w[i] * w[i]) > bound) {
      r.regular = false;
      r.witness = i;
      break;
    }
  }
  return r;
}

CriticalIndexResult critical_index(const std::vector<Int>& w, const Rat& eps) {
  require_nonzero(w);
  const std::size_t n = w.size();
  CriticalIndexResult res;
  res.order.resize(n);
  std::iota(res.order.begin(), res.order.end(), std::size_t{0});
  std::stable_sort(res.order.begin(), res.order.end(),
                   [&](std::size_t a, std::size_t b) { return abs(w[a]) > abs(w[b]); });
  // suffix sums of squares; sorted descending, so the largest entry of w_{>h}
  // is the (h+1)-th sorted weight
  std::vector<Int> suffix(n + 1, Int(0));
  for (std::size_t k = n; k-- > 0;) suffix[k] = suffix[k + 1] + w[res.order[k]] * w[res.order[k]];
  const Rat e2 = eps * eps;
  for (std::size_t h = 1; h <= n; ++h) {
    if (h == n) {
      res.h = n;
      break;
    }
    const Int& top = w[res.order[h]];
    // an all-zero tail is regular: 0 <= 0
    if (Rat(top * top) <= e2 * Rat(suffix[h])) {
      res.h = h;
      break;
    }
  }
  return res;
}

bool is_t_balanced(const Ltf& phi, const Rat& t) {
  require_nonzero(phi.weights);
  if (t < 0) throw Error(ErrorCode::invalid_argument, kMod, "negative t");
  return phi.threshold * phi.threshold <= t * t * Rat(norm2_sq(phi.weights));
}

bool is_t_balanced_pow(const Ltf& phi, const Int& base, const Rat& exponent) {
  require_nonzero(phi.weights);
  // theta^2 / |w|^2 <= base^(2*exponent)
  Rat ratio = phi.threshold * phi.threshold / Rat(norm2_sq(phi.weights));
  return cmp_root_power(ratio, base, Rat(2) * exponent) <= 0;
}

int imbalanced_majority_value(const Ltf& phi) {
  if (phi.threshold == 0) throw Error(ErrorCode::invalid_argument, kMod, "theta = 0 has no imbalance direction");
  return phi.threshold > 0 ? -1 : 1;
}

}  // namespace ltcd
