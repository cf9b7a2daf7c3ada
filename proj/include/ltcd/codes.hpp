#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcd/circuit.hpp"

namespace ltcd {

using Bits = std::vector<std::uint8_t>;

// Sparse GF(2) linear map: output j = XOR of inputs rows[j].
struct LinearMap {
  std::size_t in = 0;
  std::vector<std::vector<std::uint32_t>> rows;

  std::size_t out() const { return rows.size(); }
  Bits apply(const Bits& x) const;
  // (*this followed by next), rows with repeated inputs cancel
  LinearMap then(const LinearMap& next) const;
  std::size_t max_support() const;
};

// [rbar, r] code with generator rows: coordinate v = parity(x & rows[v]).
struct LinearCode {
  std::size_t r = 0, rbar = 0;
  std::vector<std::uint64_t> rows;
  Rat distance;  // certified relative distance, exhaustive

  Bits encode(const Bits& x) const;
  LinearMap map() const;
};

// exhaustive minimum relative weight over nonzero messages (r <= 30)
Rat min_relative_weight(const LinearCode& c);
// seeded search over rbar x r generators keeping the best minimum weight;
// throws unless the result reaches relative distance 1/3
LinearCode find_base_code(std::size_t r, std::size_t rbar = 0, std::uint64_t seed = 1, std::size_t tries = 512);

// Tensor code of order d; x has up to r^d bits (zero padded). Axis 1 is the
// fastest-varying index; pass i encodes along axis i.
Bits tensor_encode(const Bits& x, const LinearCode& base, std::size_t d);
std::vector<LinearMap> tensor_passes(const LinearCode& base, std::size_t d);

// Circulant graph on N vertices: neighbour s of v is (v + offsets[s]) mod N.
struct ExpanderSpec {
  std::size_t vertices = 0;
  std::vector<std::size_t> offsets;
  Rat lambda;            // certified upper bound on the second absolute eigenvalue
  double lambda_numeric = 0;
  double closed_form = 0;
  std::size_t degree() const { return offsets.size(); }
  std::size_t neighbour(std::size_t v, std::size_t s) const { return (v + offsets[s]) % vertices; }
};

ExpanderSpec circulant_expander(std::size_t n, std::vector<std::size_t> offsets);
// every offset once: the complete graph with self-loops, lambda = 0
ExpanderSpec complete_expander(std::size_t n);
double circulant_lambda_eigen(const ExpanderSpec& g);
double circulant_lambda_closed_form(const ExpanderSpec& g);

// least ell >= 1 with (1 - rho (1 - lambda))^(ell-1) <= eps
std::size_t walk_length(const Rat& rho, const Rat& lambda, const Rat& eps);
std::uint64_t amplified_length(std::size_t nhat, const ExpanderSpec& g, std::size_t ell);

// coordinate (W, S) = XOR over positions S of walk W; ordered by
// (start, step choices with the first step most significant, subset mask)
Bits amplify_encode(const Bits& xhat, const ExpanderSpec& g, std::size_t ell);
Bits amplify_encode(const Bits& xhat, const ExpanderSpec& g, const Rat& eps, const Rat& rho);
LinearMap amplify_map(const ExpanderSpec& g, std::size_t ell);
// exact walk-hitting count: relative weight = (hitting walks)/(2 * walks)
Rat amplified_weight_formula(const Bits& xhat, const ExpanderSpec& g, std::size_t ell);

// amplify o tensor with rho = 3^-d
struct BalancedCode {
  LinearCode base;
  std::size_t d = 1;
  ExpanderSpec graph;
  Rat eps, rho;
  std::size_t ell = 1;
  std::size_t message_bits() const;
  std::size_t inner_bits() const;  // rbar^d
  std::uint64_t length() const;
  Bits encode(const Bits& x) const;
  // last tensor pass merged into the walk parities, so depth is 2d
  std::vector<LinearMap> passes() const;
  nlohmann::json to_json() const;
};

BalancedCode make_balanced_code(const LinearCode& base, std::size_t d, const Rat& eps);
Bits balanced_encode(const Bits& x, const Rat& eps, std::size_t d, const LinearCode& base);

struct JohnsonParams {
  Rat delta, eps, list_bound;
};
JohnsonParams johnson_params(const Rat& delta);
// largest number of codewords within relative distance 1/2 - delta of any
// of the given centers
std::size_t max_list_size(const std::vector<Bits>& codewords, const std::vector<Bits>& centers, const Rat& delta);

// Parity of k inputs as two threshold layers: gate j fires when at least j
// inputs are 1; the top gate sums them with alternating signs.
ThresholdCircuit parity_circuit(std::size_t k);
// Each map becomes two layers; output i of the last map is top gate i.
ThresholdCircuit emit_linear_circuit(const std::vector<LinearMap>& passes);

std::string bits_to_hex(const Bits& b);
Bits bits_from_hex(const std::string& hex, std::size_t n);
nlohmann::json code_to_json(const LinearCode& c);
nlohmann::json expander_to_json(const ExpanderSpec& g);

}  // namespace ltcd
