#include "ltcd/restriction.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "ltcd/ltf_analysis.hpp"

namespace ltcd {

namespace {

constexpr const char* kMod = "restriction";

Rat rat_of(std::size_t v) { return Rat(static_cast<unsigned long>(v)); }

int value_of_bit(std::uint8_t b) { return b ? -1 : 1; }

// bottom gate as seen through a partial assignment (0 = live)
struct Slice {
  Rat theta;
  std::vector<std::size_t> support;  // live vars with nonzero weight
};

Slice slice(const Ltf& g, const std::vector<std::int8_t>& val) {
  Slice s;
  s.theta = g.threshold;
  for (std::size_t i = 0; i < g.weights.size(); ++i) {
    if (g.weights[i] == 0) continue;
    if (val[i] == 0)
      s.support.push_back(i);
    else
      s.theta -= Rat(g.weights[i] * val[i]);
  }
  return s;
}

Ltf slice_ltf(const Ltf& g, const Slice& s) {
  Ltf out;
  out.threshold = s.theta;
  for (auto v : s.support) out.weights.push_back(g.weights[v]);
  return out;
}

std::size_t count_live(const std::vector<std::int8_t>& val) {
  return static_cast<std::size_t>(std::count(val.begin(), val.end(), 0));
}

std::uint64_t upper_wires(const ThresholdCircuit& c) {
  std::uint64_t w = 0;
  for (std::size_t l = 1; l < c.layers.size(); ++l)
    for (const auto& g : c.layers[l])
      for (const auto& x : g.weights) w += (x != 0);
  return w;
}

}  // namespace

int Cap::cmp(const Rat& v) const {
  if (v < 0) return -1;
  if (coeff <= 0) return v == 0 ? (coeff == 0 ? 0 : 1) : 1;
  return cmp_root_power(v / coeff, base, exponent);
}

double Cap::approx() const { return coeff.get_d() * std::pow(base.get_d(), exponent.get_d()); }

nlohmann::json Cap::to_json() const {
  return {{"coeff", rat_str(coeff)}, {"base", base.get_str()}, {"exponent", rat_str(exponent)}, {"approx", approx()}};
}

Rat LayerReductionParams::p() const { return Rat(Int(1), Int(1) << q); }

double LayerReductionParams::beta() const { return n > 1 ? q / std::log2(static_cast<double>(n)) : 0.0; }

bool LayerReductionParams::beta_in_range() const {
  if (n < 2) return false;
  const Rat two_q(Int(1) << q);
  const Int nn(static_cast<unsigned long>(n));
  return cmp_root_power(two_q, nn, Rat(10) * eps) > 0 && cmp_root_power(two_q, nn, alpha) < 0;
}

nlohmann::json LayerReductionParams::to_json() const {
  return {{"n", n},
          {"eps", rat_str(eps)},
          {"alpha", rat_str(alpha)},
          {"q", q},
          {"p", rat_str(p())},
          {"beta", beta()},
          {"beta_in_range", beta_in_range()},
          {"t", t.to_json()},
          {"fanout_cap", fanout_cap.to_json()},
          {"small_fanin_cap", small_fanin_cap.to_json()},
          {"kprime", kprime.to_json()},
          {"live_factor", rat_str(live_factor)},
          {"fanin_factor", rat_str(fanin_factor)},
          {"wire_threshold", rat_str(wire_threshold)},
          {"exact_counts", exact_counts},
          {"override", override_mode}};
}

LayerReductionParams forced_layer_params(std::size_t n, const Rat& eps, unsigned q) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, kMod, "need n >= 2");
  if (eps <= 0) throw Error(ErrorCode::invalid_argument, kMod, "need eps > 0");
  if (q == 0 || q > 62) throw Error(ErrorCode::invalid_argument, kMod, "q outside [1, 62]");
  LayerReductionParams p;
  p.n = n;
  p.eps = eps;
  p.alpha = Rat(12) * eps;
  p.q = q;
  const Int nn(static_cast<unsigned long>(n));
  p.t = Cap::power(1, 2, Rat(q, 5));
  p.fanout_cap = Cap::power(2, nn, eps);
  p.small_fanin_cap = Cap::power(1, nn, p.alpha);
  p.kprime = Cap::power(2, nn, p.alpha + eps);
  const double lg = std::log2(static_cast<double>(n));
  p.wire_threshold = Rat(4 * lg * lg * std::pow(static_cast<double>(n), 1.0 + eps.get_d()) * std::exp2(-1.1 * q));
  p.override_mode = true;
  return p;
}

LayerReductionParams default_layer_params(std::size_t n, const Rat& eps) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, kMod, "need n >= 2");
  const double target = 11.0 * eps.get_d() * std::log2(static_cast<double>(n));
  std::vector<unsigned> cands;
  const long r = std::max(1L, std::lround(target));
  for (long d = 0; d <= 3; ++d) {
    if (r - d >= 1) cands.push_back(static_cast<unsigned>(r - d));
    if (d) cands.push_back(static_cast<unsigned>(r + d));
  }
  std::stable_sort(cands.begin(), cands.end(),
                   [&](unsigned a, unsigned b) { return std::abs(a - target) < std::abs(b - target); });
  for (auto q : cands) {
    auto p = forced_layer_params(n, eps, q);
    if (p.beta_in_range()) {
      p.override_mode = false;
      return p;
    }
  }
  throw Error(ErrorCode::infeasible, kMod,
              "no q with p = 2^-q and 10 eps < beta < alpha at n = " + std::to_string(n) + ", eps = " + rat_str(eps));
}

LayerReductionParams desk_layer_params(std::size_t n) {
  auto p = forced_layer_params(std::max<std::size_t>(n, 2), Rat(1, 40), 1);
  p.t = Cap::value(2);
  p.fanout_cap = Cap::value(3);
  p.small_fanin_cap = Cap::value(2);
  p.kprime = Cap::value(6);
  p.wire_threshold = Rat(static_cast<unsigned long>(n * n + 1));
  return p;
}

nlohmann::json StageRecord::to_json() const {
  return {{"stage", stage}, {"fixed", fixed}, {"gates", gates}, {"sigma", sigma},
          {"live_after", live_after}, {"wires_after", wires_after}};
}

nlohmann::json LayerTrace::to_json() const {
  nlohmann::json st = nlohmann::json::array();
  for (const auto& s : stages) st.push_back(s.to_json());
  return {{"params", params.to_json()},
          {"n_in", n_in},
          {"wires_in", wires_in},
          {"stages", st},
          {"live", {n1, n2, n3, n4}},
          {"balanced_wires", balanced_wires},
          {"large_gates", large_gates},
          {"small_gates", small_gates},
          {"success", success},
          {"failed_stage", failed_stage},
          {"failure", failure},
          {"wire_bound_ok", wire_bound_ok},
          {"independent_set_ok", independent_set_ok}};
}

nlohmann::json ReductionTrace::to_json() const {
  nlohmann::json ls = nlohmann::json::array();
  for (const auto& l : layers) ls.push_back(l.to_json());
  return {{"layers", ls}, {"success", success}, {"failure", failure}};
}

FanoutResult fix_high_fanout(const ThresholdCircuit& c, const Cap& fanout_cap, const std::vector<std::uint8_t>& z_bits) {
  c.validate(false);
  if (z_bits.size() < c.n) throw Error(ErrorCode::length_mismatch, kMod, "z shorter than the input count");
  std::vector<std::uint64_t> fanout(c.n, 0);
  for (const auto& g : c.layers[0])
    for (std::size_t i = 0; i < c.n; ++i) fanout[i] += (g.weights[i] != 0);
  FanoutResult r;
  r.rho = Restriction::identity(c.n);
  for (std::size_t i = 0; i < c.n; ++i)
    if (fanout_cap.cmp(Rat(static_cast<unsigned long>(fanout[i]))) > 0) {
      r.rho.a[i] = static_cast<std::int8_t>(value_of_bit(z_bits[i]));
      r.fixed.push_back(i);
    }
  r.circuit = restrict_circuit(c, r.rho);
  return r;
}

std::vector<std::size_t> greedy_independent_set(const std::vector<std::size_t>& live,
                                                const std::vector<std::vector<std::size_t>>& gates,
                                                std::uint64_t max_degree) {
  std::vector<std::size_t> sorted = live;
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  const std::size_t hi = sorted.empty() ? 0 : sorted.back() + 1;
  std::vector<char> is_live(hi, 0);
  for (auto v : sorted) is_live[v] = 1;
  std::vector<std::vector<std::size_t>> adj(hi);
  for (const auto& g : gates) {
    std::vector<std::size_t> in;
    for (auto v : g)
      if (v < hi && is_live[v]) in.push_back(v);
    for (std::size_t a = 0; a < in.size(); ++a)
      for (std::size_t b = 0; b < in.size(); ++b)
        if (in[a] != in[b]) adj[in[a]].push_back(in[b]);
  }
  for (auto v : sorted) {
    auto& nb = adj[v];
    std::sort(nb.begin(), nb.end());
    nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    if (nb.size() > max_degree)
      throw Error(ErrorCode::invalid_argument, kMod,
                  "variable " + std::to_string(v) + " has conflict degree " + std::to_string(nb.size()));
  }
  std::vector<char> blocked(hi, 0);
  std::vector<std::size_t> out;
  for (auto v : sorted) {
    if (blocked[v]) continue;
    out.push_back(v);
    for (auto u : adj[v]) blocked[u] = 1;
  }
  return out;
}

LayerResult try_reduce_layer(const ThresholdCircuit& c, const std::vector<std::size_t>& live, std::size_t n_orig,
                             const LayerReductionParams& params, const LayerSeeds& seeds) {
  c.validate(true);
  if (c.depth() < 2) throw Error(ErrorCode::invalid_argument, kMod, "layer reduction needs depth >= 2");
  if (live.size() != c.n) throw Error(ErrorCode::length_mismatch, kMod, "live map does not match arity");
  if (!seeds.y || !seeds.z) throw Error(ErrorCode::invalid_argument, kMod, "missing sources");
  const std::size_t q = params.q;
  if (seeds.y->out_bits() < q * n_orig || seeds.z->out_bits() < n_orig)
    throw Error(ErrorCode::length_mismatch, kMod, "sources too short for the original arity");
  for (auto o : live)
    if (o >= n_orig) throw Error(ErrorCode::invalid_argument, kMod, "live index out of range");

  std::vector<std::uint8_t> ybits, zbits;
  seeds.y->generate(seeds.y_seed, ybits);
  seeds.z->generate(seeds.z_seed, zbits);

  LayerResult res;
  LayerTrace& tr = res.trace;
  tr.params = params;
  tr.n_in = c.n;
  tr.wires_in = c.wires();
  const std::size_t n = c.n;
  const auto& bottom = c.layers[0];
  const std::uint64_t upper = upper_wires(c);
  std::vector<std::int8_t> val(n, 0);

  auto fix = [&](std::size_t v, StageRecord& rec) {
    val[v] = static_cast<std::int8_t>(value_of_bit(zbits[live[v]]));
    rec.fixed.push_back(live[v]);
  };
  auto fail = [&](int stage, const std::string& why) {
    tr.success = false;
    tr.failed_stage = stage;
    tr.failure = why;
    return res;
  };
  // removed[g]: gate already replaced by a constant
  std::vector<char> removed(bottom.size(), 0);
  auto bottom_wires = [&]() {
    std::uint64_t w = 0;
    for (std::size_t g = 0; g < bottom.size(); ++g)
      if (!removed[g])
        for (std::size_t i = 0; i < n; ++i) w += (val[i] == 0 && bottom[g].weights[i] != 0);
    return w + upper;
  };
  auto pad_to = [&](std::size_t target) {
    StageRecord rec;
    rec.stage = 0;
    std::size_t have = count_live(val);
    for (std::size_t v = 0; v < n && have > target; ++v)
      if (val[v] == 0) {
        fix(v, rec);
        --have;
      }
    rec.live_after = have;
    rec.wires_after = bottom_wires();
    if (!rec.fixed.empty()) tr.stages.push_back(std::move(rec));
  };

  std::vector<std::size_t> fanin0(bottom.size(), 0);
  for (std::size_t g = 0; g < bottom.size(); ++g)
    for (const auto& w : bottom[g].weights) fanin0[g] += (w != 0);

  if (!params.override_mode) {
    const Rat e1 = Rat(1) + params.eps;
    if (cmp_root_power(Rat(static_cast<unsigned long>(tr.wires_in)), Int(static_cast<unsigned long>(n)), e1) > 0)
      return fail(0, "wire count exceeds n^(1+eps)");
    if (!params.beta_in_range()) return fail(0, "10 eps < beta < alpha violated");
  }

  // stage 1: high fan-out
  {
    StageRecord rec;
    rec.stage = 1;
    std::vector<std::uint64_t> fanout(n, 0);
    for (const auto& g : bottom)
      for (std::size_t i = 0; i < n; ++i) fanout[i] += (g.weights[i] != 0);
    for (std::size_t v = 0; v < n; ++v)
      if (params.fanout_cap.cmp(Rat(static_cast<unsigned long>(fanout[v]))) > 0) fix(v, rec);
    rec.live_after = count_live(val);
    rec.wires_after = bottom_wires();
    tr.stages.push_back(std::move(rec));
    if (params.exact_counts) pad_to(n / 2);
    tr.n1 = count_live(val);
  }

  // stage 2: pseudorandom selection
  std::vector<char> balanced(bottom.size(), 0), large(bottom.size(), 0);
  {
    StageRecord rec;
    rec.stage = 2;
    for (std::size_t v = 0; v < n; ++v) {
      if (val[v] != 0) continue;
      const std::size_t o = live[v];
      bool sel = true;
      for (std::size_t b = 0; b < q && sel; ++b) sel = ybits[q * o + b] == 1;
      if (!sel) fix(v, rec);
    }
    const std::size_t live2 = count_live(val);
    const Rat pp = params.p();
    for (std::size_t g = 0; g < bottom.size(); ++g) {
      large[g] = params.small_fanin_cap.cmp(Rat(static_cast<unsigned long>(fanin0[g]))) > 0;
      (large[g] ? tr.large_gates : tr.small_gates).push_back(g);
    }
    rec.live_after = live2;
    if (Rat(static_cast<unsigned long>(live2)) < params.live_factor * pp * rat_of(tr.n1)) {
      rec.wires_after = bottom_wires();
      tr.stages.push_back(std::move(rec));
      tr.n2 = live2;
      return fail(2, "event E: " + std::to_string(live2) + " live < " +
                         rat_str(params.live_factor * pp * rat_of(tr.n1)));
    }
    for (std::size_t g = 0; g < bottom.size(); ++g) {
      if (!large[g]) continue;
      const Slice s = slice(bottom[g], val);
      if (rat_of(s.support.size()) > params.fanin_factor * pp * rat_of(fanin0[g])) {
        rec.wires_after = bottom_wires();
        tr.stages.push_back(std::move(rec));
        tr.n2 = live2;
        return fail(2, "event E: gate " + std::to_string(g) + " keeps fan-in " + std::to_string(s.support.size()));
      }
    }
    tr.stages.push_back(std::move(rec));
    if (params.exact_counts) {
      Rat target = pp * rat_of(tr.n1) / 2;
      Int fl;
      mpz_fdiv_q(fl.get_mpz_t(), target.get_num().get_mpz_t(), target.get_den().get_mpz_t());
      pad_to(fl.get_ui());
    }
    tr.n2 = count_live(val);
    // imbalanced L-gates become constants
    StageRecord& r2 = tr.stages.back().stage == 2 ? tr.stages.back() : tr.stages[tr.stages.size() - 2];
    for (std::size_t g = 0; g < bottom.size(); ++g) {
      if (!large[g]) continue;
      const Slice s = slice(bottom[g], val);
      const Ltf phi = slice_ltf(bottom[g], s);
      if (is_balanced_cap(phi, params.t)) {
        balanced[g] = 1;
        tr.balanced_wires += s.support.size();
      } else {
        removed[g] = 1;
        r2.gates.push_back(g);
        r2.sigma.push_back(imbalanced_majority_value(phi));
      }
    }
    r2.wires_after = bottom_wires();
    if (Rat(static_cast<unsigned long>(tr.balanced_wires)) > params.wire_threshold)
      return fail(2, "wires into balanced L-gates " + std::to_string(tr.balanced_wires) + " exceed " +
                         rat_str(params.wire_threshold));
  }
  std::vector<int> sigma(bottom.size(), 0);
  for (const auto& rec : tr.stages)
    if (rec.stage == 2)
      for (std::size_t i = 0; i < rec.gates.size(); ++i) sigma[rec.gates[i]] = rec.sigma[i];

  // stage 3: fix inputs of balanced L-gates
  {
    StageRecord rec;
    rec.stage = 3;
    for (std::size_t g = 0; g < bottom.size(); ++g) {
      if (!balanced[g]) continue;
      for (auto v : slice(bottom[g], val).support)
        if (val[v] == 0) fix(v, rec);
      rec.gates.push_back(g);
    }
    std::sort(rec.fixed.begin(), rec.fixed.end());
    rec.live_after = count_live(val);
    rec.wires_after = bottom_wires();
    tr.n3 = rec.live_after;
    tr.stages.push_back(std::move(rec));
  }

  // stage 4: independent set among small gates
  {
    StageRecord rec;
    rec.stage = 4;
    std::vector<std::size_t> lv;
    for (std::size_t v = 0; v < n; ++v)
      if (val[v] == 0) lv.push_back(v);
    std::vector<std::vector<std::size_t>> supports;
    for (auto g : tr.small_gates) supports.push_back(slice(bottom[g], val).support);
    const auto keep = greedy_independent_set(lv, supports);
    std::vector<char> in_i(n, 0);
    for (auto v : keep) in_i[v] = 1;
    for (auto v : lv)
      if (!in_i[v]) fix(v, rec);
    tr.n4 = keep.size();
    tr.independent_set_ok =
        tr.n3 == 0 || params.kprime.cmp(frac(tr.n3, std::max<std::size_t>(tr.n4, 1))) <= 0;
    if (tr.n4 == 0 && tr.n3 > 0) tr.independent_set_ok = false;
    rec.gates = tr.small_gates;
    rec.live_after = tr.n4;
    rec.wires_after = 0;
    tr.stages.push_back(std::move(rec));
  }

  // splice: every bottom gate is a constant or a literal on one live input
  std::vector<std::size_t> local_live;
  std::vector<std::size_t> pos(n, 0);
  for (std::size_t v = 0; v < n; ++v)
    if (val[v] == 0) {
      pos[v] = local_live.size();
      local_live.push_back(v);
    }
  const std::size_t n4 = local_live.size();
  struct Out {
    int constant = 0;  // +-1 when constant
    std::size_t var = 0;
    int sign = 0;  // literal sign otherwise
  };
  std::vector<Out> outs(bottom.size());
  for (std::size_t g = 0; g < bottom.size(); ++g) {
    if (removed[g]) {
      outs[g].constant = sigma[g];
      continue;
    }
    const Slice s = slice(bottom[g], val);
    if (s.support.empty()) {
      outs[g].constant = s.theta <= 0 ? 1 : -1;
      continue;
    }
    if (s.support.size() > 1) throw Error(ErrorCode::malformed, kMod, "gate kept two live inputs after stage 4");
    const Int& w = bottom[g].weights[s.support[0]];
    const int fp = Rat(w) - s.theta >= 0 ? 1 : -1;
    const int fm = Rat(-w) - s.theta >= 0 ? 1 : -1;
    if (fp == fm) {
      outs[g].constant = fp;
    } else {
      outs[g].var = pos[s.support[0]];
      outs[g].sign = fp;
    }
  }
  ThresholdCircuit out;
  out.n = n4;
  std::vector<Ltf> first;
  for (const auto& G : c.layers[1]) {
    Ltf h;
    h.weights.assign(n4, Int(0));
    h.threshold = G.threshold;
    for (std::size_t g = 0; g < bottom.size(); ++g) {
      if (G.weights[g] == 0) continue;
      if (outs[g].constant)
        h.threshold -= Rat(G.weights[g] * outs[g].constant);
      else
        h.weights[outs[g].var] += G.weights[g] * outs[g].sign;
    }
    first.push_back(std::move(h));
  }
  out.layers.push_back(std::move(first));
  for (std::size_t l = 2; l < c.layers.size(); ++l) out.layers.push_back(c.layers[l]);
  tr.stages.back().wires_after = out.wires();

  res.rho.a = val;
  res.circuit = std::move(out);
  for (auto v : local_live) res.live.push_back(live[v]);
  const std::uint64_t wout = res.circuit.wires();
  tr.wire_bound_ok = n4 == 0 ? wout == 0
                             : cmp_root_power(Rat(static_cast<unsigned long>(wout)), Int(static_cast<unsigned long>(n4)),
                                              Rat(1) + Rat(30) * params.eps) <= 0;
  tr.success = true;
  return res;
}

LayerResult reduce_layer(const ThresholdCircuit& c, const LayerReductionParams& params, const LayerSeeds& seeds) {
  std::vector<std::size_t> live(c.n);
  for (std::size_t i = 0; i < c.n; ++i) live[i] = i;
  LayerResult r = try_reduce_layer(c, live, c.n, params, seeds);
  if (!r.ok())
    throw Error(ErrorCode::stage_failure, kMod,
                "stage " + std::to_string(r.trace.failed_stage) + ": " + r.trace.failure);
  return r;
}

Rat restriction_delta(std::size_t d, const Rat& eps) {
  Int p30 = 1;
  for (std::size_t i = 1; i < d; ++i) p30 *= 30;
  return Rat(static_cast<unsigned long>(d)) * Rat(p30) * eps;
}

FullResult try_restrict_full(const ThresholdCircuit& c, const Rat& eps, const std::vector<LayerSeeds>& seeds,
                             const FullOptions& opt) {
  c.validate(true);
  const std::size_t d = c.depth();
  const Rat delta = restriction_delta(d, eps);
  if (!opt.override_mode && delta >= 1)
    throw Error(ErrorCode::infeasible, kMod, "delta = d 30^(d-1) eps = " + rat_str(delta) + " is not below 1");
  if (seeds.size() + 1 < d) throw Error(ErrorCode::invalid_argument, kMod, "need d-1 seed pairs");
  std::size_t min_live = opt.min_live;
  if (min_live == 0 && delta < 1)
    min_live = ceil_root_power(Int(static_cast<unsigned long>(c.n)), Rat(1) - delta).get_ui();

  FullResult out;
  out.rho = Restriction::identity(c.n);
  ThresholdCircuit cur = c;
  std::vector<std::size_t> live(c.n);
  for (std::size_t i = 0; i < c.n; ++i) live[i] = i;
  Rat eps_i = eps;
  for (std::size_t it = 0; it + 1 < d; ++it) {
    if (cur.n < 2) {
      out.trace.failure = "iteration " + std::to_string(it) + ": fewer than two live variables";
      return out;
    }
    const LayerReductionParams p = opt.params ? opt.params(cur.n, eps_i) : default_layer_params(cur.n, eps_i);
    LayerResult lr = try_reduce_layer(cur, live, c.n, p, seeds[it]);
    out.trace.layers.push_back(lr.trace);
    if (!lr.ok()) {
      out.trace.failure = "iteration " + std::to_string(it) + ", stage " + std::to_string(lr.trace.failed_stage) +
                          ": " + lr.trace.failure;
      return out;
    }
    out.rho = out.rho.compose(lr.rho);
    cur = std::move(lr.circuit);
    live = std::move(lr.live);
    eps_i *= 30;
  }
  out.phi = cur.layers[0][0];
  if (cur.n < min_live) {
    out.trace.failure = std::to_string(cur.n) + " live variables, need " + std::to_string(min_live);
    return out;
  }
  out.trace.success = true;
  return out;
}

FullResult restrict_full(const ThresholdCircuit& c, const Rat& eps, const std::vector<LayerSeeds>& seeds,
                         const FullOptions& opt) {
  FullResult r = try_restrict_full(c, eps, seeds, opt);
  if (!r.ok()) throw Error(ErrorCode::stage_failure, kMod, r.trace.failure);
  return r;
}

bool is_balanced_cap(const Ltf& phi, const Cap& t) {
  const Int w2 = norm2_sq(phi.weights);
  if (w2 == 0) return phi.threshold == 0;
  if (t.coeff <= 0) return phi.threshold == 0;
  const Rat x = phi.threshold * phi.threshold / (t.coeff * t.coeff * Rat(w2));
  return cmp_root_power(x, t.base, Rat(2) * t.exponent) <= 0;
}

nlohmann::json HarnessRate::to_json() const { return {{"trials", trials}, {"hits", hits}, {"rate", rate()}}; }

HarnessRate harness_single_ltf_lemma(const Ltf& phi, unsigned q, const Rat& t, const SeededSource& y_source,
                                     const SeededSource& z_source, std::uint64_t trials, std::uint64_t seed) {
  const std::size_t n = phi.arity();
  if (trials == 0) throw Error(ErrorCode::invalid_argument, kMod, "trials must be positive");
  if (y_source.out_bits() < q * n || z_source.out_bits() < n)
    throw Error(ErrorCode::length_mismatch, kMod, "sources too short");
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> y, z;
  HarnessRate r;
  r.trials = trials;
  const Cap tc = Cap::value(t);
  for (std::uint64_t i = 0; i < trials; ++i) {
    y_source.sample(rng, y);
    z_source.sample(rng, z);
    const Restriction rho = restriction_from_bits(std::span(y).first(q * n), std::span(z).first(n), n, q);
    r.hits += is_balanced_cap(restrict_ltf(phi, rho), tc);
  }
  return r;
}

HarnessRate harness_bias_preservation(const Ltf& phi, int sigma, const std::vector<std::size_t>& live,
                                      const Rat& delta_prime, const SeededSource& z_source, std::uint64_t trials,
                                      std::uint64_t seed, const Budget& budget) {
  const std::size_t n = phi.arity();
  std::vector<char> is_live(n, 0);
  for (auto v : live) {
    if (v >= n) throw Error(ErrorCode::invalid_argument, kMod, "live index out of range");
    is_live[v] = 1;
  }
  std::size_t nl = 0;
  for (auto b : is_live) nl += b;
  if (nl > 20) throw Error(ErrorCode::budget_exceeded, kMod, "more than 20 live variables");
  const std::size_t nf = n - nl;
  if (z_source.out_bits() < nf) throw Error(ErrorCode::length_mismatch, kMod, "z source too short");
  const bool exhaustive = z_source.seed_bits() < 63 && z_source.seed_count() <= trials;
  const std::uint64_t runs = exhaustive ? z_source.seed_count() : trials;
  budget.charge(sat_mul(runs, std::uint64_t{1} << nl), kMod, "bias preservation");
  std::mt19937_64 rng(seed);
  std::vector<std::uint8_t> z;
  HarnessRate r;
  r.trials = runs;
  const std::uint64_t cube = std::uint64_t{1} << nl;
  for (std::uint64_t i = 0; i < runs; ++i) {
    if (exhaustive)
      z_source.generate(i, z);
    else
      z_source.sample(rng, z);
    Restriction rho = Restriction::identity(n);
    std::size_t j = 0;
    for (std::size_t v = 0; v < n; ++v)
      if (!is_live[v]) rho.a[v] = static_cast<std::int8_t>(value_of_bit(z[j++]));
    const Ltf rest = restrict_ltf(phi, rho);
    const std::uint64_t acc = acceptance_count(rest, Budget::unlimited(), Exec::serial);
    const std::uint64_t agree = sigma == -1 ? acc : cube - acc;
    // agree / cube >= 1 - delta'
    r.hits += frac(agree, cube) >= Rat(1) - delta_prime;
  }
  return r;
}

}  // namespace ltcd
