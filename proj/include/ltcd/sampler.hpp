#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcd/circuit.hpp"
#include "ltcd/codes.hpp"
#include "ltcd/designs.hpp"

namespace ltcd {

// Parameter bundle for Samp(x, z) = (ECC(x)_{z_S1}, ..., ECC(x)_{z_Sm}).
struct SamplerSpec {
  std::size_t n = 0, m = 0, k = 0, d = 1;
  Rat gamma, beta;
  Rat eps;         // accuracy, 1/m
  Rat delta_code;  // eps / 4m
  std::size_t ell = 0, t = 0;
  Rat alpha;
  Int rho;
  unsigned c = 2;       // constant in alpha = 1 - beta + c 3^(d+1) gamma
  unsigned cprime = 1;  // constant in nbar <= n (m/eps)^(c' 3^d)
  Int nbar_bound;
  bool override_mode = false;
  bool cor_condition = false;  // rho <= (k - 3 log(m/eps) - t - 3) / m
  std::string cor_detail;

  // constructed parts (desk specs only)
  WeakDesign design;
  std::vector<LinearMap> code;  // passes; last width is the block length
  std::string code_kind;
  Rat code_bias;                 // max |wt/len - 1/2| over nonzero messages

  std::size_t code_length() const { return code.empty() ? 0 : code.back().out(); }
  std::size_t code_depth() const { return 2 * code.size(); }
  nlohmann::json to_json() const;
};

// Asymptotic parameter derivation: exact integer roots, exact logs where
// needed, the corollary inequality checked as 2^A >= m^6. Throws
// sampler.infeasible naming the violated condition.
SamplerSpec derive_sampler_params(const Int& n, std::size_t d, const Rat& gamma, const Rat& beta, unsigned c = 2,
                                  unsigned cprime = 1);

// Desk-scale spec: explicit (n, m, k, ell, alpha); the code is a seeded
// random linear [2^ell, n] code chosen for balance. The corollary inequality
// is evaluated and recorded but not enforced.
SamplerSpec desk_sampler_spec(std::size_t n, std::size_t m, std::size_t k, std::size_t ell, const Rat& alpha,
                              std::uint64_t seed = 1, std::size_t tries = 64);

// best-balanced random linear code, one pass
LinearMap random_balanced_code(std::size_t n, std::size_t len, std::uint64_t seed, std::size_t tries, Rat& bias);
Rat code_bias(const std::vector<LinearMap>& code, std::size_t n);

Bits encode_with(const std::vector<LinearMap>& code, const Bits& x);
// z_S as an index: bit j is z at the j-th smallest element of S
std::uint64_t design_index(std::uint64_t z, const std::vector<std::size_t>& s);

class CodewordCache {
 public:
  explicit CodewordCache(const SamplerSpec& spec) : spec_(spec) {}
  const Bits& get(std::uint64_t x);

 private:
  const SamplerSpec& spec_;
  std::uint64_t key_ = ~std::uint64_t{0};
  Bits cw_;
};

// packed m-bit output, bit i = codeword at z_{S_i}
std::uint64_t sample_output(const Bits& codeword, std::uint64_t z, const SamplerSpec& spec);
std::uint64_t sample_output(std::uint64_t x, std::uint64_t z, const SamplerSpec& spec);
Bits x_bits(std::uint64_t x, std::size_t n);

// per-x histogram of Samp(x, .) over {0,1}^m; row x has 2^m entries
std::vector<std::uint32_t> sampler_histograms(const SamplerSpec& spec, const Budget& budget = {},
                                              Exec ex = Exec::parallel);

struct SamplerTestResult {
  std::uint64_t test;  // bitmask over {0,1}^m
  std::uint64_t bad = 0;
};
struct SamplerReport {
  Rat eps, delta;
  std::vector<SamplerTestResult> tests;
  Rat worst_bad_fraction;
  bool pass = true;
  nlohmann::json to_json() const;
};

std::vector<std::uint64_t> random_tests(std::size_t m, std::size_t count, std::uint64_t seed);
std::vector<std::uint64_t> adversarial_tests(std::size_t m);

SamplerReport verify_sampler(const SamplerSpec& spec, const Rat& eps, const Rat& delta,
                             const std::vector<std::uint64_t>& tests, const Budget& budget = {},
                             Exec ex = Exec::parallel);

struct ExtractorReport {
  std::size_t k = 0;
  Rat extractor_error;          // worst statistical distance over flat k-sources
  std::uint64_t worst_bad = 0;  // max over T of #x deviating by more than extractor_error
  std::uint64_t rigorous_cap = 0;  // 2 (2^k - 1)
  std::uint64_t stated_cap = 0;    // 2^k
  bool consistent = false;         // worst_bad <= rigorous_cap
  nlohmann::json to_json() const;
};
ExtractorReport check_extractor_equivalence(const SamplerSpec& spec, std::size_t k, const Budget& budget = {},
                                            Exec ex = Exec::parallel);

struct ReductionCircuit {
  ThresholdCircuit circuit;
  std::size_t code_depth = 0, projection_gates = 0, copies = 0;
  std::uint64_t code_wires = 0, projection_wires = 0, copy_wires = 0, majority_wires = 0;
  bool accounting_ok = false;
  nlohmann::json to_json() const;
};

// C'(x) = MAJ_z C(Samp(x, z)); strict majority of accepting copies accepts
ReductionCircuit build_reduction_circuit(const ThresholdCircuit& c, const SamplerSpec& spec);
// the same function evaluated directly
int reduction_direct(const ThresholdCircuit& c, const SamplerSpec& spec, std::uint64_t x);

std::uint64_t fnv1a(const std::string& s);

}  // namespace ltcd
