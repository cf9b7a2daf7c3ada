#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "ltcd/circuit.hpp"

namespace ltcd {

struct RegularityReport {
  Rat eps;
  bool regular = true;
  std::optional<std::size_t> witness;  // set iff !regular
};

struct CriticalIndexResult {
  std::size_t h = 1;                 // in [1, n]
  std::vector<std::size_t> order;    // order[k] = original index of k-th largest |w|
};

// w_i^2 <= eps^2 * sum_j w_j^2 for every i
RegularityReport is_regular(const std::vector<Int>& w, const Rat& eps);

// Smallest h in [1, n] with the sorted suffix w_{>h} eps-regular. The empty
// suffix counts as regular, so h = n always qualifies.
CriticalIndexResult critical_index(const std::vector<Int>& w, const Rat& eps);

// theta^2 <= t^2 * |w|^2
bool is_t_balanced(const Ltf& phi, const Rat& t);
// same check with t = base^(exponent); base >= 1, compared exactly
bool is_t_balanced_pow(const Ltf& phi, const Int& base, const Rat& exponent);

// constant an imbalanced gate is close to: -sign(theta)
int imbalanced_majority_value(const Ltf& phi);

Int norm2_sq(const std::vector<Int>& w);
Int norm1(const std::vector<Int>& w);

}  // namespace ltcd
