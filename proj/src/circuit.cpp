#include "ltcd/circuit.hpp"

#include <limits>

namespace ltcd {

namespace {

constexpr const char* kMod = "circuit";

void require_len(std::size_t a, std::size_t b, const char* what) {
  if (a != b)
    throw Error(ErrorCode::length_mismatch, kMod,
                std::string(what) + ": " + std::to_string(a) + " vs " + std::to_string(b));
}

Int ceil_rat(const Rat& r) {
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
  return q;
}

}  // namespace

Point point_from_index(std::uint64_t idx, std::size_t n) {
  Point x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = ((idx >> i) & 1) ? -1 : 1;
  return x;
}

std::uint64_t index_from_point(std::span<const std::int8_t> x) {
  std::uint64_t idx = 0;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (x[i] < 0) idx |= std::uint64_t{1} << i;
  return idx;
}

bool Ltf::all_zero() const {
  for (const auto& w : weights)
    if (w != 0) return false;
  return true;
}

Ltf Ltf::constant(std::size_t n, int value) {
  return Ltf{std::vector<Int>(n, Int(0)), Rat(value > 0 ? -1 : 1)};
}

Ltf Ltf::majority(std::size_t n) { return Ltf{std::vector<Int>(n, Int(1)), Rat(0)}; }

int eval_ltf(const Ltf& phi, std::span<const std::int8_t> x) {
  require_len(x.size(), phi.weights.size(), "eval_ltf");
  Int s = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0)
      s += phi.weights[i];
    else
      s -= phi.weights[i];
  }
  return Rat(s) >= phi.threshold ? 1 : -1;
}

std::vector<std::size_t> Restriction::live_set() const {
  std::vector<std::size_t> I;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] == star) I.push_back(i);
  return I;
}

std::size_t Restriction::live_count() const {
  std::size_t c = 0;
  for (auto v : a) c += (v == star);
  return c;
}

Point Restriction::extend(std::span<const std::int8_t> x) const {
  require_len(x.size(), live_count(), "Restriction::extend");
  Point out(a.size());
  std::size_t j = 0;
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] == star ? x[j++] : a[i];
  return out;
}

Restriction Restriction::compose(const Restriction& inner) const {
  require_len(inner.size(), live_count(), "Restriction::compose");
  Restriction out = *this;
  std::size_t j = 0;
  for (auto& v : out.a)
    if (v == star) v = inner.a[j++];
  return out;
}

std::uint64_t ThresholdCircuit::wires() const {
  std::uint64_t w = 0;
  for (const auto& layer : layers)
    for (const auto& g : layer)
      for (const auto& x : g.weights) w += (x != 0);
  return w;
}

void ThresholdCircuit::validate(bool single_output) const {
  if (layers.empty()) throw Error(ErrorCode::malformed, kMod, "circuit has no layers");
  for (std::size_t i = 0; i < layers.size(); ++i) {
    if (layers[i].empty()) throw Error(ErrorCode::malformed, kMod, "empty layer " + std::to_string(i));
    for (std::size_t g = 0; g < layers[i].size(); ++g)
      if (layers[i][g].arity() != input_width(i))
        throw Error(ErrorCode::malformed, kMod,
                    "gate " + std::to_string(g) + " of layer " + std::to_string(i) + " reads " +
                        std::to_string(layers[i][g].arity()) + " wires, previous layer has " +
                        std::to_string(input_width(i)));
  }
  if (single_output && layers.back().size() != 1)
    throw Error(ErrorCode::malformed, kMod, "top layer must hold exactly one gate");
}

ThresholdCircuit ThresholdCircuit::from_ltf(const Ltf& phi) { return ThresholdCircuit{phi.arity(), {{phi}}}; }

std::vector<std::int8_t> eval_outputs(const ThresholdCircuit& c, std::span<const std::int8_t> x) {
  c.validate(false);
  require_len(x.size(), c.n, "eval_circuit");
  std::vector<std::int8_t> cur(x.begin(), x.end()), next;
  for (const auto& layer : c.layers) {
    next.resize(layer.size());
    for (std::size_t g = 0; g < layer.size(); ++g) next[g] = static_cast<std::int8_t>(eval_ltf(layer[g], cur));
    cur.swap(next);
  }
  return cur;
}

int eval_circuit(const ThresholdCircuit& c, std::span<const std::int8_t> x) {
  c.validate(true);
  return eval_outputs(c, x)[0];
}

CompiledCircuit::CompiledCircuit(const ThresholdCircuit& c) : n_(c.n), src_(c) {
  c.validate(false);
  const Int cap = Int(1) << 61;
  layers_.resize(c.layers.size());
  for (std::size_t l = 0; l < c.layers.size(); ++l) {
    for (const auto& g : c.layers[l]) {
      Gate cg;
      Int mass = 0;
      for (std::size_t i = 0; i < g.weights.size(); ++i) {
        if (g.weights[i] == 0) continue;
        mass += abs(g.weights[i]);
        if (mass >= cap) slow_ = true;
        if (!slow_) cg.terms.push_back({static_cast<std::uint32_t>(i), g.weights[i].get_si()});
      }
      Int thr = ceil_rat(g.threshold);
      // outside [-mass, mass+1] the gate is constant, so clamping is exact
      if (thr > mass + 1) thr = mass + 1;
      if (thr < -mass) thr = -mass;
      if (!slow_) cg.thr = thr.get_si();
      layers_[l].push_back(std::move(cg));
    }
  }
}

void CompiledCircuit::eval_outputs(std::span<const std::int8_t> x, std::vector<std::int8_t>& out) const {
  if (slow_) {
    out = ltcd::eval_outputs(src_, x);
    return;
  }
  thread_local std::vector<std::int8_t> a, b;
  a.assign(x.begin(), x.end());
  for (const auto& layer : layers_) {
    b.resize(layer.size());
    for (std::size_t g = 0; g < layer.size(); ++g) {
      std::int64_t s = 0;
      for (const auto& t : layer[g].terms) s += t.w * a[t.src];
      b[g] = s >= layer[g].thr ? 1 : -1;
    }
    a.swap(b);
  }
  out = a;
}

int CompiledCircuit::eval(std::span<const std::int8_t> x) const {
  require_len(x.size(), n_, "eval_circuit");
  thread_local std::vector<std::int8_t> out;
  eval_outputs(x, out);
  return out[0];
}

int CompiledCircuit::eval_index(std::uint64_t idx) const {
  thread_local Point x;
  x.resize(n_);
  for (std::size_t i = 0; i < n_; ++i) x[i] = ((idx >> i) & 1) ? -1 : 1;
  return eval(x);
}

std::uint64_t acceptance_count(const ThresholdCircuit& c, const Budget& budget, Exec ex) {
  c.validate(true);
  if (c.n >= 63) throw Error(ErrorCode::budget_exceeded, kMod, "arity too large to enumerate");
  const std::uint64_t total = std::uint64_t{1} << c.n;
  budget.charge(total, kMod, "acceptance_count");
  CompiledCircuit cc(c);
  return kernels::count_if(total, [&](std::uint64_t i) { return cc.eval_index(i) == -1; }, ex);
}

std::uint64_t acceptance_count(const Ltf& phi, const Budget& budget, Exec ex) {
  return acceptance_count(ThresholdCircuit::from_ltf(phi), budget, ex);
}

Rat closeness(const ThresholdCircuit& f, const ThresholdCircuit& g, const Budget& budget, Exec ex) {
  require_len(f.n, g.n, "closeness");
  CompiledCircuit cf(f), cg(g);
  return closeness([&](std::uint64_t i) { return cf.eval_index(i); },
                   [&](std::uint64_t i) { return cg.eval_index(i); }, f.n, budget, ex);
}

Ltf restrict_ltf(const Ltf& phi, const Restriction& rho) {
  require_len(rho.size(), phi.arity(), "restrict_ltf");
  Ltf out;
  out.threshold = phi.threshold;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    if (rho.a[i] == star)
      out.weights.push_back(phi.weights[i]);
    else if (rho.a[i] > 0)
      out.threshold -= phi.weights[i];
    else
      out.threshold += phi.weights[i];
  }
  out.threshold.canonicalize();
  return out;
}

ThresholdCircuit restrict_circuit(const ThresholdCircuit& c, const Restriction& rho) {
  c.validate(false);
  require_len(rho.size(), c.n, "restrict_circuit");
  ThresholdCircuit out = c;
  out.n = rho.live_count();
  for (auto& g : out.layers[0]) g = restrict_ltf(g, rho);
  return out;
}

nlohmann::json ltf_to_json(const Ltf& phi) {
  nlohmann::json w = nlohmann::json::array();
  for (const auto& x : phi.weights) w.push_back(x.get_str());
  return {{"weights", w}, {"theta", rat_str(phi.threshold)}};
}

Ltf ltf_from_json(const nlohmann::json& j) {
  Ltf phi;
  try {
    for (const auto& w : j.at("weights")) phi.weights.push_back(parse_int(w.get<std::string>()));
    phi.threshold = parse_rat(j.at("theta").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, kMod, e.what());
  }
  return phi;
}

nlohmann::json circuit_to_json(const ThresholdCircuit& c) {
  nlohmann::json layers = nlohmann::json::array();
  for (const auto& layer : c.layers) {
    nlohmann::json l = nlohmann::json::array();
    for (const auto& g : layer) l.push_back(ltf_to_json(g));
    layers.push_back(l);
  }
  return {{"n", c.n}, {"depth", c.depth()}, {"layers", layers}};
}

ThresholdCircuit circuit_from_json(const nlohmann::json& j) {
  ThresholdCircuit c;
  std::size_t depth = 0;
  try {
    c.n = j.at("n").get<std::size_t>();
    depth = j.at("depth").get<std::size_t>();
    for (const auto& l : j.at("layers")) {
      std::vector<Ltf> layer;
      for (const auto& g : l) layer.push_back(ltf_from_json(g));
      c.layers.push_back(std::move(layer));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, kMod, e.what());
  }
  if (depth != c.depth()) throw Error(ErrorCode::malformed, kMod, "depth field disagrees with layers");
  c.validate(false);
  return c;
}

std::string serialize_circuit(const ThresholdCircuit& c) { return circuit_to_json(c).dump(1); }

ThresholdCircuit parse_circuit(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, kMod, e.what());
  }
  return circuit_from_json(j);
}

nlohmann::json restriction_to_json(const Restriction& r) {
  std::string s;
  for (auto v : r.a) s += v == star ? '*' : (v > 0 ? '+' : '-');
  return s;
}

}  // namespace ltcd
