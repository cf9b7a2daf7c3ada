#include "ltcd/sampler.hpp"

#include <algorithm>
#include <bit>
#include <random>

namespace ltcd {

namespace {

constexpr const char* kMod = "sampler";

Int pow_int(const Int& b, unsigned long e) {
  Int r;
  mpz_pow_ui(r.get_mpz_t(), b.get_mpz_t(), e);
  return r;
}

Int exact_root_power(const Int& n, const Rat& e, const char* what) {
  const Int v = floor_root_power(n, e);
  if (cmp_root_power(Rat(v), n, e) != 0)
    throw Error(ErrorCode::infeasible, kMod, std::string(what) + " is not an integer");
  return v;
}

// A = k - t - 3 - rho*m; the condition 3 log(m/eps) <= A with eps = 1/m
// reads m^6 <= 2^A
bool corollary_condition(const Int& k, std::size_t t, const Int& rho, const Int& m, std::string& detail) {
  const Int a = k - Int(static_cast<unsigned long>(t)) - 3 - rho * m;
  const unsigned need = ceil_log2(pow_int(m, 6));
  detail = "A = k - t - 3 - rho*m = " + a.get_str() + ", need A >= ceil(log2(m^6)) = " + std::to_string(need);
  return a >= Int(need);
}

}  // namespace

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

nlohmann::json SamplerSpec::to_json() const {
  nlohmann::json j = {{"n", n},
                      {"m", m},
                      {"k", k},
                      {"d", d},
                      {"gamma", rat_str(gamma)},
                      {"beta", rat_str(beta)},
                      {"eps", rat_str(eps)},
                      {"delta_code", rat_str(delta_code)},
                      {"ell", ell},
                      {"t", t},
                      {"alpha", rat_str(alpha)},
                      {"rho", rho.get_str()},
                      {"c", c},
                      {"cprime", cprime},
                      {"override", override_mode},
                      {"corollary_condition", cor_condition},
                      {"corollary_detail", cor_detail}};
  if (!design.sets.empty()) {
    j["design"] = design_to_json(design);
    j["design_hash"] = fnv1a(design_to_json(design).dump());
  }
  if (!code.empty()) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& p : code) rows.push_back({{"in", p.in}, {"rows", p.rows}});
    j["code_kind"] = code_kind;
    j["code_length"] = code_length();
    j["code_bias"] = rat_str(code_bias);
    j["code_hash"] = fnv1a(rows.dump());
  }
  return j;
}

SamplerSpec derive_sampler_params(const Int& n, std::size_t d, const Rat& gamma, const Rat& beta, unsigned c,
                                  unsigned cprime) {
  if (d == 0 || n < 2) throw Error(ErrorCode::invalid_argument, kMod, "need d >= 1 and n >= 2");
  if (beta < Rat(4, 5) || beta > 1) throw Error(ErrorCode::infeasible, kMod, "beta must lie in [4/5, 1]");
  Int p3;
  mpz_ui_pow_ui(p3.get_mpz_t(), 3, d);
  if (gamma <= 0 || gamma > Rat(Int(1), Int(c) * Int(static_cast<unsigned long>(d)) * p3))
    throw Error(ErrorCode::infeasible, kMod, "gamma must lie in (0, 1/(c d 3^d)]");
  SamplerSpec s;
  s.d = d;
  s.gamma = gamma;
  s.beta = beta;
  s.c = c;
  s.cprime = cprime;
  const Int m = exact_root_power(n, gamma, "m = n^gamma");
  const Int k = exact_root_power(n, beta, "k = n^beta");
  if (!(m < k && k <= n)) throw Error(ErrorCode::infeasible, kMod, "need m < k <= n");
  if (!n.fits_ulong_p() || !m.fits_ulong_p() || !k.fits_ulong_p()) {
    // record sizes through the bound fields; counts stay symbolic
  }
  s.n = n.fits_ulong_p() ? n.get_ui() : 0;
  s.m = m.fits_ulong_p() ? m.get_ui() : 0;
  s.k = k.fits_ulong_p() ? k.get_ui() : 0;
  s.eps = Rat(Int(1), m);
  s.delta_code = s.eps / (Rat(4) * Rat(m));
  s.nbar_bound = n * pow_int(m, 2ul * cprime * p3.get_ui());
  s.ell = ceil_log2(s.nbar_bound);
  const Rat alpha0 = Rat(1) - beta + Rat(Int(c) * p3 * 3) * gamma;
  // round (1 - alpha) ell down to an integer so rho is a power of two
  Rat one_minus = (Rat(1) - alpha0) * Rat(static_cast<unsigned long>(s.ell));
  Int fl;
  mpz_fdiv_q(fl.get_mpz_t(), one_minus.get_num().get_mpz_t(), one_minus.get_den().get_mpz_t());
  if (fl <= 0) throw Error(ErrorCode::infeasible, kMod, "alpha < 1/4 violated: (1-alpha) ell <= 0");
  s.alpha = Rat(1) - Rat(fl) / Rat(static_cast<unsigned long>(s.ell));
  s.alpha.canonicalize();
  if (!(s.alpha > 0 && s.alpha < Rat(1, 4)))
    throw Error(ErrorCode::infeasible, kMod, "alpha = " + rat_str(s.alpha) + " violates 0 < alpha < 1/4");
  s.t = design_universe(s.ell, s.alpha);
  s.rho = design_rho(s.ell, s.alpha);
  s.cor_condition = corollary_condition(k, s.t, s.rho, m, s.cor_detail);
  if (!s.cor_condition)
    throw Error(ErrorCode::infeasible, kMod, "rho <= (k - 3 log(m/eps) - t - 3)/m violated: " + s.cor_detail);
  return s;
}

Bits x_bits(std::uint64_t x, std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (x >> i) & 1;
  return b;
}

Bits encode_with(const std::vector<LinearMap>& code, const Bits& x) {
  Bits cur = x;
  for (const auto& p : code) cur = p.apply(cur);
  return cur;
}

Rat code_bias(const std::vector<LinearMap>& code, std::size_t n) {
  if (n > 24) throw Error(ErrorCode::budget_exceeded, kMod, "message space too large");
  const std::size_t len = code.back().out();
  std::size_t worst = 0;  // max |2 wt - len|
  for (std::uint64_t x = 1; x < (std::uint64_t{1} << n); ++x) {
    const Bits cw = encode_with(code, x_bits(x, n));
    std::size_t wt = 0;
    for (auto b : cw) wt += b;
    const std::size_t dev = 2 * wt > len ? 2 * wt - len : len - 2 * wt;
    worst = std::max(worst, dev);
  }
  Rat r(static_cast<unsigned long>(worst), 2ul * len);
  r.canonicalize();
  return r;
}

LinearMap random_balanced_code(std::size_t n, std::size_t len, std::uint64_t seed, std::size_t tries, Rat& bias) {
  if (n == 0 || n > 24) throw Error(ErrorCode::invalid_argument, kMod, "message length outside [1, 24]");
  std::mt19937_64 rng(seed);
  const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
  std::vector<std::uint64_t> best_rows;
  std::size_t best_dev = ~std::size_t{0};
  for (std::size_t attempt = 0; attempt < std::max<std::size_t>(tries, 1); ++attempt) {
    std::vector<std::uint64_t> rows(len);
    for (auto& r : rows) {
      r = 0;
      while (r == 0) r = rng() & mask;
    }
    std::size_t worst = 0;
    for (std::uint64_t x = 1; x <= mask && worst < best_dev; ++x) {
      std::size_t wt = 0;
      for (auto r : rows) wt += std::popcount(x & r) & 1;
      worst = std::max(worst, 2 * wt > len ? 2 * wt - len : len - 2 * wt);
    }
    if (worst < best_dev) {
      best_dev = worst;
      best_rows = rows;
    }
  }
  bias = Rat(static_cast<unsigned long>(best_dev), 2ul * len);
  bias.canonicalize();
  LinearMap m;
  m.in = n;
  for (auto r : best_rows) {
    std::vector<std::uint32_t> row;
    for (std::size_t i = 0; i < n; ++i)
      if ((r >> i) & 1) row.push_back(static_cast<std::uint32_t>(i));
    m.rows.push_back(row);
  }
  return m;
}

SamplerSpec desk_sampler_spec(std::size_t n, std::size_t m, std::size_t k, std::size_t ell, const Rat& alpha,
                              std::uint64_t seed, std::size_t tries) {
  if (!(m >= 1 && m < k && k <= n)) throw Error(ErrorCode::infeasible, kMod, "need 1 <= m < k <= n");
  if (n > 20 || ell > 20) throw Error(ErrorCode::budget_exceeded, kMod, "desk spec too large");
  SamplerSpec s;
  s.override_mode = true;
  s.n = n;
  s.m = m;
  s.k = k;
  s.d = 1;
  s.eps = Rat(1, static_cast<unsigned long>(m));
  s.delta_code = s.eps / Rat(4 * static_cast<unsigned long>(m));
  s.ell = ell;
  s.alpha = alpha;
  s.design = build_weak_design(m, ell, alpha);
  s.t = s.design.t;
  s.rho = s.design.rho;
  s.nbar_bound = Int(1) << static_cast<unsigned>(ell);
  Rat bias;
  s.code = {random_balanced_code(n, std::size_t{1} << ell, seed, tries, bias)};
  s.code_bias = bias;
  s.code_kind = "random-linear-balanced";
  s.cor_condition = corollary_condition(Int(static_cast<unsigned long>(k)), s.t, s.rho,
                                        Int(static_cast<unsigned long>(m)), s.cor_detail);
  return s;
}

std::uint64_t design_index(std::uint64_t z, const std::vector<std::size_t>& s) {
  std::uint64_t idx = 0;
  for (std::size_t j = 0; j < s.size(); ++j) idx |= ((z >> s[j]) & 1) << j;
  return idx;
}

const Bits& CodewordCache::get(std::uint64_t x) {
  if (x != key_) {
    cw_ = encode_with(spec_.code, x_bits(x, spec_.n));
    key_ = x;
  }
  return cw_;
}

std::uint64_t sample_output(const Bits& codeword, std::uint64_t z, const SamplerSpec& spec) {
  if (z >> spec.t) throw Error(ErrorCode::invalid_argument, kMod, "seed has more than t bits");
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < spec.m; ++i) {
    const std::uint64_t idx = design_index(z, spec.design.sets[i]);
    if (idx >= (std::uint64_t{1} << spec.ell)) throw Error(ErrorCode::invalid_argument, kMod, "index out of range");
    // coordinates past the code length are zero padding
    const std::uint64_t bit = idx < codeword.size() ? codeword[idx] : 0;
    out |= bit << i;
  }
  return out;
}

std::uint64_t sample_output(std::uint64_t x, std::uint64_t z, const SamplerSpec& spec) {
  return sample_output(encode_with(spec.code, x_bits(x, spec.n)), z, spec);
}

std::vector<std::uint32_t> sampler_histograms(const SamplerSpec& spec, const Budget& budget, Exec ex) {
  if (spec.n > 24 || spec.t > 30 || spec.m > 16) throw Error(ErrorCode::budget_exceeded, kMod, "spec too large");
  const std::uint64_t xs = std::uint64_t{1} << spec.n, zs = std::uint64_t{1} << spec.t;
  budget.charge(sat_mul(xs, zs), kMod, "sampler enumeration");
  const std::size_t outs = std::size_t{1} << spec.m;
  std::vector<std::uint32_t> h(xs * outs, 0);
  kernels::for_each(
      xs,
      [&](std::uint64_t x) {
        const Bits cw = encode_with(spec.code, x_bits(x, spec.n));
        std::uint32_t* row = h.data() + x * outs;
        for (std::uint64_t z = 0; z < zs; ++z) ++row[sample_output(cw, z, spec)];
      },
      ex);
  return h;
}

nlohmann::json SamplerReport::to_json() const {
  nlohmann::json ts = nlohmann::json::array();
  for (const auto& t : tests) ts.push_back({{"test", t.test}, {"bad", t.bad}});
  return {{"eps", rat_str(eps)}, {"delta", rat_str(delta)}, {"tests", ts},
          {"worst_bad_fraction", rat_str(worst_bad_fraction)}, {"pass", pass}};
}

std::vector<std::uint64_t> random_tests(std::size_t m, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const std::size_t outs = std::size_t{1} << m;
  const std::uint64_t mask = outs >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << outs) - 1;
  std::vector<std::uint64_t> t(count);
  for (auto& x : t) x = rng() & mask;
  return t;
}

std::vector<std::uint64_t> adversarial_tests(std::size_t m) {
  const std::size_t outs = std::size_t{1} << m;
  std::vector<std::uint64_t> t;
  if (outs <= 8) {
    for (std::uint64_t s = 0; s < (std::uint64_t{1} << outs); ++s) t.push_back(s);
    return t;
  }
  if (outs > 64) throw Error(ErrorCode::invalid_argument, kMod, "m too large for packed tests");
  const std::uint64_t full = outs == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << outs) - 1;
  for (std::size_t o = 0; o < outs; ++o) {
    t.push_back(std::uint64_t{1} << o);
    t.push_back(full ^ (std::uint64_t{1} << o));
  }
  for (std::size_t b = 0; b < m; ++b) {
    std::uint64_t half = 0;
    for (std::size_t o = 0; o < outs; ++o)
      if ((o >> b) & 1) half |= std::uint64_t{1} << o;
    t.push_back(half);
  }
  return t;
}

namespace {

std::uint32_t test_count(const std::uint32_t* row, std::uint64_t test, std::size_t outs) {
  std::uint32_t c = 0;
  for (std::size_t o = 0; o < outs; ++o)
    if ((test >> o) & 1) c += row[o];
  return c;
}

// |2^m count - |T| 2^t| > eps 2^(m+t)
bool deviates(std::uint32_t count, std::size_t tsize, std::size_t m, std::size_t t, const Rat& eps) {
  const Int lhs = abs(Int(static_cast<unsigned long>(count)) * (Int(1) << static_cast<unsigned>(m)) -
                      Int(static_cast<unsigned long>(tsize)) * (Int(1) << static_cast<unsigned>(t)));
  return Rat(lhs) > eps * Rat(Int(1) << static_cast<unsigned>(m + t));
}

}  // namespace

SamplerReport verify_sampler(const SamplerSpec& spec, const Rat& eps, const Rat& delta,
                             const std::vector<std::uint64_t>& tests, const Budget& budget, Exec ex) {
  const auto h = sampler_histograms(spec, budget, ex);
  const std::size_t outs = std::size_t{1} << spec.m;
  const std::uint64_t xs = std::uint64_t{1} << spec.n;
  SamplerReport rep;
  rep.eps = eps;
  rep.delta = delta;
  rep.worst_bad_fraction = 0;
  for (auto test : tests) {
    const std::size_t tsize = static_cast<std::size_t>(std::popcount(test));
    const std::uint64_t bad = kernels::count_if(
        xs, [&](std::uint64_t x) { return deviates(test_count(h.data() + x * outs, test, outs), tsize, spec.m, spec.t, eps); },
        ex);
    rep.tests.push_back({test, bad});
    const Rat f = frac(bad, xs);
    if (f > rep.worst_bad_fraction) rep.worst_bad_fraction = f;
  }
  rep.pass = rep.worst_bad_fraction <= delta;
  return rep;
}

nlohmann::json ExtractorReport::to_json() const {
  return {{"k", k},
          {"extractor_error", rat_str(extractor_error)},
          {"worst_bad", worst_bad},
          {"rigorous_cap", rigorous_cap},
          {"stated_cap", stated_cap},
          {"within_stated_cap", worst_bad <= stated_cap},
          {"consistent", consistent}};
}

ExtractorReport check_extractor_equivalence(const SamplerSpec& spec, std::size_t k, const Budget& budget, Exec ex) {
  if (!(spec.m < k && k <= spec.n)) throw Error(ErrorCode::invalid_argument, kMod, "need m < k <= n");
  if (spec.m > 3) throw Error(ErrorCode::budget_exceeded, kMod, "exhaustive tests need m <= 3");
  const auto h = sampler_histograms(spec, budget, ex);
  const std::size_t outs = std::size_t{1} << spec.m;
  const std::uint64_t xs = std::uint64_t{1} << spec.n, flat = std::uint64_t{1} << k;
  const auto tests = adversarial_tests(spec.m);
  ExtractorReport rep;
  rep.k = k;
  rep.extractor_error = 0;
  std::vector<std::uint32_t> vals(xs);
  // worst flat source for a test: the 2^k inputs with the largest or the
  // smallest hit counts
  for (auto test : tests) {
    for (std::uint64_t x = 0; x < xs; ++x) vals[x] = test_count(h.data() + x * outs, test, outs);
    std::sort(vals.begin(), vals.end());
    Int lo = 0, hi = 0;
    for (std::uint64_t i = 0; i < flat; ++i) {
      lo += static_cast<unsigned long>(vals[i]);
      hi += static_cast<unsigned long>(vals[xs - 1 - i]);
    }
    const Rat denom(Int(static_cast<unsigned long>(flat)) * (Int(1) << static_cast<unsigned>(spec.t)));
    const Rat mu(static_cast<unsigned long>(std::popcount(test)), static_cast<unsigned long>(outs));
    const Rat up = Rat(hi) / denom - mu, down = mu - Rat(lo) / denom;
    rep.extractor_error = std::max({rep.extractor_error, up, down});
  }
  rep.extractor_error.canonicalize();
  for (auto test : tests) {
    const std::size_t tsize = static_cast<std::size_t>(std::popcount(test));
    const std::uint64_t bad = kernels::count_if(
        xs,
        [&](std::uint64_t x) {
          return deviates(test_count(h.data() + x * outs, test, outs), tsize, spec.m, spec.t, rep.extractor_error);
        },
        ex);
    rep.worst_bad = std::max(rep.worst_bad, bad);
  }
  rep.rigorous_cap = 2 * (flat - 1);
  rep.stated_cap = flat;
  rep.consistent = rep.worst_bad <= rep.rigorous_cap;
  return rep;
}

nlohmann::json ReductionCircuit::to_json() const {
  return {{"depth", circuit.depth()},
          {"wires", circuit.wires()},
          {"code_depth", code_depth},
          {"projection_gates", projection_gates},
          {"copies", copies},
          {"code_wires", code_wires},
          {"projection_wires", projection_wires},
          {"copy_wires", copy_wires},
          {"majority_wires", majority_wires},
          {"accounting_ok", accounting_ok}};
}

ReductionCircuit build_reduction_circuit(const ThresholdCircuit& c, const SamplerSpec& spec) {
  c.validate(true);
  if (c.n != spec.m) throw Error(ErrorCode::length_mismatch, kMod, "circuit arity must equal m");
  if (spec.code.empty() || spec.design.sets.size() != spec.m)
    throw Error(ErrorCode::invalid_argument, kMod, "spec has no constructed code or design");
  const std::uint64_t zs = std::uint64_t{1} << spec.t;
  const std::uint64_t gate_budget = sat_mul(zs, spec.m);
  if (gate_budget > (std::uint64_t{1} << 20)) throw Error(ErrorCode::budget_exceeded, kMod, "too many copies");

  ReductionCircuit rc;
  ThresholdCircuit code = emit_linear_circuit(spec.code);
  rc.code_depth = code.depth();
  rc.code_wires = code.wires();
  ThresholdCircuit out = code;
  out.n = spec.n;
  const std::size_t width = code.outputs();

  std::vector<Ltf> proj;
  proj.reserve(zs * spec.m);
  for (std::uint64_t z = 0; z < zs; ++z)
    for (std::size_t i = 0; i < spec.m; ++i) {
      const std::uint64_t idx = design_index(z, spec.design.sets[i]);
      if (idx < width) {
        Ltf g{std::vector<Int>(width, Int(0)), Rat(0)};
        g.weights[idx] = 1;
        proj.push_back(std::move(g));
      } else {
        proj.push_back(Ltf::constant(width, 1));
      }
    }
  rc.projection_gates = proj.size();
  out.layers.push_back(std::move(proj));

  // copies of C side by side, copy z reads block z of the previous layer
  std::size_t prev_block = spec.m;
  for (const auto& layer : c.layers) {
    std::vector<Ltf> wide;
    wide.reserve(zs * layer.size());
    for (std::uint64_t z = 0; z < zs; ++z)
      for (const auto& g : layer) {
        Ltf w{std::vector<Int>(zs * prev_block, Int(0)), g.threshold};
        for (std::size_t i = 0; i < prev_block; ++i) w.weights[z * prev_block + i] = g.weights[i];
        wide.push_back(std::move(w));
      }
    prev_block = layer.size();
    out.layers.push_back(std::move(wide));
  }
  rc.copies = zs;
  out.layers.push_back({Ltf{std::vector<Int>(zs, Int(1)), Rat(0)}});
  out.validate(true);

  std::uint64_t proj_wires = 0;
  for (const auto& g : out.layers[rc.code_depth])
    for (const auto& w : g.weights) proj_wires += (w != 0);
  rc.projection_wires = proj_wires;
  rc.copy_wires = zs * c.wires();
  rc.majority_wires = zs;
  rc.accounting_ok = out.wires() == rc.code_wires + rc.projection_wires + rc.copy_wires + rc.majority_wires &&
                     out.depth() == rc.code_depth + 1 + c.depth() + 1;
  rc.circuit = std::move(out);
  return rc;
}

int reduction_direct(const ThresholdCircuit& c, const SamplerSpec& spec, std::uint64_t x) {
  const Bits cw = encode_with(spec.code, x_bits(x, spec.n));
  CompiledCircuit cc(c);
  const std::uint64_t zs = std::uint64_t{1} << spec.t;
  std::uint64_t acc = 0;
  for (std::uint64_t z = 0; z < zs; ++z) acc += cc.eval_index(sample_output(cw, z, spec)) == -1;
  return 2 * acc > zs ? -1 : 1;
}

}  // namespace ltcd
