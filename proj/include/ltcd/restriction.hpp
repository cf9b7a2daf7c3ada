#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcd/circuit.hpp"
#include "ltcd/sources.hpp"

namespace ltcd {

// coeff * base^exponent, compared exactly against rationals
struct Cap {
  Rat coeff = 1;
  Int base = 1;
  Rat exponent = 0;

  static Cap value(const Rat& v) { return Cap{v, Int(1), Rat(0)}; }
  static Cap power(const Rat& coeff, const Int& base, const Rat& exponent) { return Cap{coeff, base, exponent}; }
  // sign of v - cap
  int cmp(const Rat& v) const;
  double approx() const;
  nlohmann::json to_json() const;
};

struct LayerReductionParams {
  std::size_t n = 0;  // arity the defaults were derived for
  Rat eps;
  Rat alpha;          // 12 eps
  unsigned q = 1;     // p = 2^-q, i.e. beta = q / log2 n
  Cap t;              // balance parameter, p^(-1/5)
  Cap fanout_cap;     // 2 n^eps
  Cap small_fanin_cap;  // n^alpha
  Cap kprime;         // 2 n^(alpha+eps)
  Rat live_factor = Rat(1, 2);  // event E: live >= live_factor * p * n1
  Rat fanin_factor = 2;         // event E: restricted fan-in <= fanin_factor * p * fan-in
  Rat wire_threshold;           // wires into balanced L-gates, 4 log^2(n) n^(eps-beta/10) n^(1-beta)
  bool exact_counts = false;    // pad stages 1 and 2 to n/2 and p n1 / 2 live variables
  bool override_mode = false;   // skip 10 eps < beta < alpha and the wire-count precondition

  Rat p() const;
  double beta() const;
  // 10 eps < beta < alpha, decided exactly
  bool beta_in_range() const;
  nlohmann::json to_json() const;
};

// Defaults from (n, eps). q is the integer nearest 11 eps log2 n for which
// 10 eps < beta < alpha; throws restriction.infeasible when no q >= 1 fits.
LayerReductionParams default_layer_params(std::size_t n, const Rat& eps);
// Same formulas with q forced; marks override mode.
LayerReductionParams forced_layer_params(std::size_t n, const Rat& eps, unsigned q);

// Override used by the desk-scale suites: p = 1/2, t = 2, caps sized for
// circuits with a dozen inputs.
LayerReductionParams desk_layer_params(std::size_t n);

struct StageRecord {
  int stage = 0;                      // 1..4; 0 marks padding
  std::vector<std::size_t> fixed;     // original variable indices
  std::vector<std::size_t> gates;     // bottom gates affected (constified, eliminated or spliced)
  std::vector<int> sigma;             // constants, parallel to gates for stage 2
  std::size_t live_after = 0;
  std::uint64_t wires_after = 0;
  nlohmann::json to_json() const;
};

struct LayerTrace {
  LayerReductionParams params;
  std::size_t n_in = 0;
  std::uint64_t wires_in = 0;
  std::vector<StageRecord> stages;
  std::size_t n1 = 0, n2 = 0, n3 = 0, n4 = 0;
  std::uint64_t balanced_wires = 0;
  std::vector<std::size_t> large_gates, small_gates;
  bool success = false;
  int failed_stage = 0;
  std::string failure;
  bool wire_bound_ok = false;  // output wires <= n4^(1 + 30 eps)
  bool independent_set_ok = false;
  nlohmann::json to_json() const;
};

struct ReductionTrace {
  std::vector<LayerTrace> layers;
  bool success = false;
  std::string failure;
  nlohmann::json to_json() const;
};

// Original-index view of a circuit during iterated restriction.
struct LayerResult {
  Restriction rho;             // over the inputs of the circuit that was reduced
  ThresholdCircuit circuit;    // over the live variables, ascending
  std::vector<std::size_t> live;  // original indices of circuit inputs
  LayerTrace trace;
  bool ok() const { return trace.success; }
};

// Seeds of one layer. y has q bits per original variable, z one bit per
// original variable; a single z sample supplies every fixed value.
struct LayerSeeds {
  const SeededSource* y = nullptr;
  const SeededSource* z = nullptr;
  std::uint64_t y_seed = 0, z_seed = 0;
};

// Stage 1 alone: fixes every variable whose fan-out exceeds the cap, value
// (-1)^z_bits[i].
struct FanoutResult {
  Restriction rho;  // over c's inputs
  ThresholdCircuit circuit;
  std::vector<std::size_t> fixed;  // c-local indices
};
FanoutResult fix_high_fanout(const ThresholdCircuit& c, const Cap& fanout_cap, const std::vector<std::uint8_t>& z_bits);

// Ascending greedy independent set in the graph joining two variables
// that share a gate. Throws restriction.invalid_argument when some degree
// exceeds max_degree.
std::vector<std::size_t> greedy_independent_set(const std::vector<std::size_t>& live,
                                                const std::vector<std::vector<std::size_t>>& gates,
                                                std::uint64_t max_degree = ~std::uint64_t{0});

// Non-throwing layer reduction. live maps c's inputs to original indices.
LayerResult try_reduce_layer(const ThresholdCircuit& c, const std::vector<std::size_t>& live, std::size_t n_orig,
                             const LayerReductionParams& params, const LayerSeeds& seeds);
// Throws restriction.stage_failure with the failing stage and condition.
LayerResult reduce_layer(const ThresholdCircuit& c, const LayerReductionParams& params, const LayerSeeds& seeds);

struct FullResult {
  Restriction rho;
  Ltf phi;  // over rho's live variables, ascending
  ReductionTrace trace;
  bool ok() const { return trace.success; }
};

struct FullOptions {
  // params for iteration i given the current arity and eps_i = 30^i eps;
  // empty means default_layer_params
  std::function<LayerReductionParams(std::size_t, const Rat&)> params;
  std::size_t min_live = 0;  // 0 means ceil(n^(1-delta)), delta = d 30^(d-1) eps
  bool override_mode = false;
};

// delta = d 30^(d-1) eps
Rat restriction_delta(std::size_t d, const Rat& eps);

// d-1 layer reductions; seeds[i] drives iteration i (seeds.size() >= d-1).
FullResult try_restrict_full(const ThresholdCircuit& c, const Rat& eps, const std::vector<LayerSeeds>& seeds,
                             const FullOptions& opt = {});
FullResult restrict_full(const ThresholdCircuit& c, const Rat& eps, const std::vector<LayerSeeds>& seeds,
                         const FullOptions& opt = {});

// |theta| <= t ||w||_2 with t a Cap
bool is_balanced_cap(const Ltf& phi, const Cap& t);

struct HarnessRate {
  std::uint64_t trials = 0, hits = 0;
  double rate() const { return trials ? static_cast<double>(hits) / static_cast<double>(trials) : 0.0; }
  nlohmann::json to_json() const;
};

// Fraction of sampled restrictions (q-bit selection blocks) under which the
// restricted LTF is t-balanced.
HarnessRate harness_single_ltf_lemma(const Ltf& phi, unsigned q, const Rat& t, const SeededSource& y_source,
                                     const SeededSource& z_source, std::uint64_t trials, std::uint64_t seed);

// Fraction of z for which phi restricted to (live, z) is delta'-close to
// sigma. z_source covers the fixed coordinates in ascending order; every seed
// is enumerated when there are at most `trials` of them.
HarnessRate harness_bias_preservation(const Ltf& phi, int sigma, const std::vector<std::size_t>& live,
                                      const Rat& delta_prime, const SeededSource& z_source, std::uint64_t trials,
                                      std::uint64_t seed, const Budget& budget = {});

}  // namespace ltcd
