#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcd/circuit.hpp"
#include "ltcd/restriction.hpp"
#include "ltcd/sources.hpp"

namespace ltcd {

struct DerandConfig {
  Rat eps;
  FullOptions restrict_opt;
  // selection and value sources over the original n variables; every seed
  // pair is enumerated
  SourcePtr y, z;
  // source for estimating Pr[phi = -1] over L live variables; empty = uniform
  std::function<SourcePtr(std::size_t)> ltf_source;
  // exceptional-input budget; empty = (1/10) 2^(n^(1-delta))
  std::optional<Int> B;
};

struct DerandVerdict {
  bool accept = false;
  std::size_t n = 0, d = 0;
  Rat eps, delta;
  std::string B;                 // decimal, or the formula when too large
  std::size_t live_required = 0;  // least L with 2^L >= 10 B
  std::uint64_t seeds_total = 0, seeds_succeeded = 0, seeds_good = 0, seeds_accepting = 0;
  Rat good_fraction;
  Rat min_estimate, max_estimate;
  nlohmann::json to_json() const;
};

// least L with 2^L >= 10 B
std::size_t live_required_for(const Int& B);

// Enumerates restriction seeds; for each seed whose restriction succeeds
// with enough live variables, estimates the acceptance probability of phi
// over the ltf source. Accepts iff a strict majority of those estimates
// are >= 3/5. Throws quantified-derand.no_successful_seed when no seed
// qualifies.
DerandVerdict quantified_derandomize(const ThresholdCircuit& c, const DerandConfig& cfg, const Budget& budget = {},
                                     Exec ex = Exec::parallel);

// selection + values for layer iteration i, derived from one seed pair
std::vector<LayerSeeds> iteration_seeds(const SeededSource* y, const SeededSource* z, std::uint64_t y_seed,
                                        std::uint64_t z_seed, std::size_t iterations);

struct Depth2Params {
  std::size_t n = 0;
  Rat eps;
  unsigned q = 0;      // p = 2^-q = n^-(1-delta)
  double delta = 0;    // 1 - q / log2 n
  nlohmann::json to_json() const;
};

// Least q with delta = 1 - q/log2(n) in (eps/2, 2eps/3), decided exactly.
// Throws quantified-derand.infeasible when there is none.
Depth2Params depth2_params(std::size_t n, const Rat& eps);

struct Depth2Sources {
  SourcePtr y;  // q n bits
  SourcePtr z;  // n bits
  SourcePtr x;  // n bits, the first L fill the live variables
};
Depth2Sources default_depth2_sources(const Depth2Params& p);
Depth2Sources uniform_depth2_sources(const Depth2Params& p);

Point prg_depth2(const Depth2Params& p, const Depth2Sources& src, std::span<const std::uint64_t> y_seed,
                 std::span<const std::uint64_t> z_seed, std::span<const std::uint64_t> x_seed);
Point prg_depth2(const Depth2Params& p, const Depth2Sources& src, std::uint64_t y_seed, std::uint64_t z_seed,
                 std::uint64_t x_seed);
// default sources, seed words expanded from one 64-bit seed by SplitMix64
Point prg_depth2(std::size_t n, const Rat& eps, std::uint64_t seed);

struct Depth2Verdict {
  bool accept = false;
  std::uint64_t seeds = 0, accepting = 0;
  Rat acceptance;  // accepting / seeds
  nlohmann::json to_json() const;
};

// Average of C over every generator seed; accept iff the average is > 1/2.
Depth2Verdict derandomize_depth2(const ThresholdCircuit& c, const Depth2Params& p, const Depth2Sources& src,
                                 const Budget& budget = {}, Exec ex = Exec::parallel);
// same average through prg_depth2 and eval_circuit, serial
Depth2Verdict derandomize_depth2_reference(const ThresholdCircuit& c, const Depth2Params& p, const Depth2Sources& src,
                                           const Budget& budget = {});

enum class KwFamily { bernoulli, partition };

// depends on at most one input, decided by enumerating the cube
bool is_trivial_exhaustive(const Ltf& phi);
// same decision from l1 comparisons: constant iff theta <= -|w|_1 or
// theta > |w|_1, and a one-variable function is constant on both slices of
// its heaviest input
bool is_trivial_criterion(const Ltf& phi);

struct KwReport {
  std::uint64_t trials = 0, nontrivial = 0, live_two_or_more = 0;
  double rate() const { return trials ? static_cast<double>(nontrivial) / static_cast<double>(trials) : 0.0; }
  nlohmann::json to_json() const;
};

// live sets from a p-bounded-in-pairs family, fixed values from z_source
KwReport harness_kw_restriction(const Ltf& phi, KwFamily family, const Rat& p, const SeededSource& z_source,
                                std::uint64_t trials, std::uint64_t seed);

}  // namespace ltcd
