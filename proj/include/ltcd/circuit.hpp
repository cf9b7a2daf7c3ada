#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcd/common.hpp"
#include "ltcd/kernels.hpp"

namespace ltcd {

// A point of {-1,+1}^n. Index convention used by every enumerator:
// bit i of the index set  <=>  x_i = -1, so a bit b maps to (-1)^b.
using Point = std::vector<std::int8_t>;

Point point_from_index(std::uint64_t idx, std::size_t n);
std::uint64_t index_from_point(std::span<const std::int8_t> x);

// sgn(<w,x> - theta) with sgn(0) = +1.
struct Ltf {
  std::vector<Int> weights;
  Rat threshold;

  std::size_t arity() const { return weights.size(); }
  bool all_zero() const;
  // w = 0, theta = -1 is constant +1; theta = 1 gives constant -1
  static Ltf constant(std::size_t n, int value);
  static Ltf majority(std::size_t n);
  bool operator==(const Ltf& o) const { return weights == o.weights && threshold == o.threshold; }
};

int eval_ltf(const Ltf& phi, std::span<const std::int8_t> x);

enum Literal : std::int8_t { minus = -1, star = 0, plus = 1 };

struct Restriction {
  std::vector<std::int8_t> a;  // each entry -1, +1 or 0 (= star)

  static Restriction identity(std::size_t n) { return Restriction{std::vector<std::int8_t>(n, star)}; }
  std::size_t size() const { return a.size(); }
  std::vector<std::size_t> live_set() const;
  std::size_t live_count() const;
  std::size_t fixed_count() const { return size() - live_count(); }
  // fills the live coordinates, in ascending order, from x
  Point extend(std::span<const std::int8_t> x) const;
  // inner is a restriction over this one's live variables
  Restriction compose(const Restriction& inner) const;
  bool operator==(const Restriction& o) const { return a == o.a; }
};

// Layered circuit. layers[0] reads the n inputs, layers[i] reads the gates
// of layers[i-1]. Gate order inside a layer is positional and significant.
struct ThresholdCircuit {
  std::size_t n = 0;
  std::vector<std::vector<Ltf>> layers;

  std::size_t depth() const { return layers.size(); }
  std::uint64_t wires() const;
  std::size_t input_width(std::size_t layer) const { return layer == 0 ? n : layers[layer - 1].size(); }
  std::size_t outputs() const { return layers.empty() ? 0 : layers.back().size(); }
  // throws circuit.malformed; single_output demands exactly one top gate
  void validate(bool single_output = true) const;
  static ThresholdCircuit from_ltf(const Ltf& phi);
  bool operator==(const ThresholdCircuit& o) const { return n == o.n && layers == o.layers; }
};

int eval_circuit(const ThresholdCircuit& c, std::span<const std::int8_t> x);
std::vector<std::int8_t> eval_outputs(const ThresholdCircuit& c, std::span<const std::int8_t> x);

// Integer-threshold form of a circuit for enumeration: a gate outputs +1 iff
// <w,x> >= ceil(theta). Uses int64 when every gate's weight mass fits,
// otherwise falls back to exact evaluation.
class CompiledCircuit {
 public:
  explicit CompiledCircuit(const ThresholdCircuit& c);
  std::size_t arity() const { return n_; }
  bool exact_fallback() const { return slow_; }
  int eval(std::span<const std::int8_t> x) const;
  int eval_index(std::uint64_t idx) const;
  void eval_outputs(std::span<const std::int8_t> x, std::vector<std::int8_t>& out) const;

 private:
  struct Term {
    std::uint32_t src;
    std::int64_t w;
  };
  struct Gate {
    std::vector<Term> terms;
    std::int64_t thr;
  };
  std::size_t n_;
  std::vector<std::vector<Gate>> layers_;
  bool slow_ = false;
  ThresholdCircuit src_;
};

// number of x in {-1,1}^n with C(x) = -1
std::uint64_t acceptance_count(const ThresholdCircuit& c, const Budget& budget = {}, Exec ex = Exec::parallel);
std::uint64_t acceptance_count(const Ltf& phi, const Budget& budget = {}, Exec ex = Exec::parallel);

// exact fraction of x in {-1,1}^n with f(x) = g(x); f, g map an index to +-1
template <class F, class G>
Rat closeness(F&& f, G&& g, std::size_t n, const Budget& budget = {}, Exec ex = Exec::parallel) {
  if (n >= 63) throw Error(ErrorCode::budget_exceeded, "circuit", "arity too large to enumerate");
  const std::uint64_t total = std::uint64_t{1} << n;
  budget.charge(total, "circuit", "closeness");
  std::uint64_t agree = kernels::count_if(total, [&](std::uint64_t i) { return f(i) == g(i); }, ex);
  Rat r(Int(static_cast<unsigned long>(agree)), Int(1) << static_cast<unsigned>(n));
  r.canonicalize();
  return r;
}

Rat closeness(const ThresholdCircuit& f, const ThresholdCircuit& g, const Budget& budget = {},
              Exec ex = Exec::parallel);

Ltf restrict_ltf(const Ltf& phi, const Restriction& rho);
ThresholdCircuit restrict_circuit(const ThresholdCircuit& c, const Restriction& rho);

nlohmann::json ltf_to_json(const Ltf& phi);
Ltf ltf_from_json(const nlohmann::json& j);
nlohmann::json circuit_to_json(const ThresholdCircuit& c);
ThresholdCircuit circuit_from_json(const nlohmann::json& j);
std::string serialize_circuit(const ThresholdCircuit& c);
ThresholdCircuit parse_circuit(const std::string& text);
nlohmann::json restriction_to_json(const Restriction& r);

}  // namespace ltcd
