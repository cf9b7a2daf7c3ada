#pragma once

#include <cstddef>
#include <vector>

#include <json.hpp>

#include "ltcd/common.hpp"
#include "ltcd/kernels.hpp"

namespace ltcd {

// S_1..S_m subsets of [t] (stored 0-based, sorted), each of size ell, with
// sum_{j<i} 2^|S_i & S_j| <= (i-1) * rho for every i.
struct WeakDesign {
  std::size_t m = 0, ell = 0, t = 0;
  Rat alpha;
  Int rho;
  std::vector<std::vector<std::size_t>> sets;
  std::vector<Int> prefix_sums;  // prefix_sums[i] = sum_{j<i} 2^|S_i & S_j|
};

std::size_t design_universe(std::size_t ell, const Rat& alpha);  // ceil((1+4 alpha) ell)
Int design_rho(std::size_t ell, const Rat& alpha);                // 2^((1-alpha) ell), throws if not integral

WeakDesign build_weak_design(std::size_t m, std::size_t ell, const Rat& alpha, Exec ex = Exec::parallel);
bool verify_weak_design(const WeakDesign& d);
std::vector<Int> design_prefix_sums(const std::vector<std::vector<std::size_t>>& sets);

nlohmann::json design_to_json(const WeakDesign& d);
WeakDesign design_from_json(const nlohmann::json& j);

}  // namespace ltcd
