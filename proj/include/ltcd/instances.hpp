#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcd/circuit.hpp"

namespace ltcd {

// Curated circuit families. Every family builds depth-2 circuits unless
// noted; ground truth comes from acceptance_count.

// constant gate under a pass-through top gate
ThresholdCircuit constant_circuit(std::size_t n, int value);
// rejects only x = (1,...,1)
ThresholdCircuit and_like_circuit(std::size_t n);
// rejects exactly the given points (one detector gate each, OR on top);
// negated: accepts exactly those points
ThresholdCircuit point_exception_circuit(std::size_t n, const std::vector<std::uint64_t>& points, bool negated = false);
// k distinct random points, seeded
std::vector<std::uint64_t> random_points(std::size_t n, std::size_t k, std::uint64_t seed);
// majority of majorities over consecutive blocks of the given size
ThresholdCircuit majority_tower(std::size_t n, std::size_t block);
// w_i = ratio^(n-1-i), integer ratio >= 2
Ltf geometric_ltf(std::size_t n, unsigned ratio, const Rat& theta);
// sparse random depth-2 circuit: `gates` bottom gates of fan-in in
// [fanin_lo, fanin_hi], weights in [-wmax, wmax], a random top gate
ThresholdCircuit random_depth2(std::size_t n, std::size_t gates, std::size_t fanin_lo, std::size_t fanin_hi,
                               int wmax, std::uint64_t seed);
ThresholdCircuit negate_circuit(const ThresholdCircuit& c);

struct Instance {
  std::string family;
  ThresholdCircuit circuit;
  std::optional<std::uint64_t> declared_exceptions;
  std::uint64_t acceptance = 0;  // enumerated
  nlohmann::json to_json() const;
};

Instance make_instance(const std::string& family, ThresholdCircuit c, std::optional<std::uint64_t> declared = {});

// families: constant, and-like, near-constant, majority-tower, geometric, random
std::vector<Instance> generate_family(const std::string& family, std::size_t n, std::size_t count,
                                      std::uint64_t seed, std::size_t param = 0);

}  // namespace ltcd
