#include "ltcd/derand.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>

#include "ltcd/ltf_analysis.hpp"

namespace ltcd {

namespace {

constexpr const char* kMod = "quantified-derand";

std::uint64_t low_bits(unsigned b) { return b >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << b) - 1; }

// outcome of one restriction seed
struct SeedOutcome {
  std::int8_t status = 0;  // 0 failed, 1 too few live, 2 estimate >= 3/5, 3 estimate < 3/5
  std::uint64_t acc = 0, tot = 1;
};

int ltf_constant_value(const Ltf& phi) { return phi.threshold <= 0 ? 1 : -1; }

// #seeds s of src with phi(first L bits of src(s)) = -1, and #seeds
std::pair<std::uint64_t, std::uint64_t> estimate(const Ltf& phi, const SeededSource* src) {
  const std::size_t L = phi.arity();
  if (L == 0) return {ltf_constant_value(phi) == -1 ? 1u : 0u, 1};
  if (!src) {
    return {acceptance_count(phi, Budget::unlimited(), Exec::serial), std::uint64_t{1} << L};
  }
  const CompiledCircuit cc(ThresholdCircuit::from_ltf(phi));
  const std::uint64_t seeds = src->seed_count();
  std::vector<std::uint8_t> bits;
  std::uint64_t acc = 0;
  for (std::uint64_t s = 0; s < seeds; ++s) {
    src->generate(s, bits);
    std::uint64_t idx = 0;
    for (std::size_t i = 0; i < L; ++i) idx |= std::uint64_t{bits[i]} << i;
    acc += cc.eval_index(idx) == -1;
  }
  return {acc, seeds};
}

bool constant_l1(const std::vector<Int>& w, const Rat& theta) {
  const Rat l1(norm1(w));
  return theta <= -l1 || theta > l1;
}

}  // namespace

std::vector<LayerSeeds> iteration_seeds(const SeededSource* y, const SeededSource* z, std::uint64_t y_seed,
                                        std::uint64_t z_seed, std::size_t iterations) {
  // iteration i > 0 xors a fixed mask into each seed; a bijection of the seed space
  std::vector<LayerSeeds> out;
  for (std::size_t i = 0; i < iterations; ++i) {
    LayerSeeds s{y, z, y_seed, z_seed};
    if (i > 0) {
      s.y_seed ^= split_seed(0x79, i) & low_bits(static_cast<unsigned>(y->seed_bits()));
      s.z_seed ^= split_seed(0x7a, i) & low_bits(static_cast<unsigned>(z->seed_bits()));
    }
    out.push_back(s);
  }
  return out;
}

std::size_t live_required_for(const Int& B) {
  if (B <= 0) return 0;
  return ceil_log2(Int(10) * B);
}

nlohmann::json DerandVerdict::to_json() const {
  return {{"decision", accept ? "accept" : "reject"},
          {"n", n},
          {"d", d},
          {"eps", rat_str(eps)},
          {"delta", rat_str(delta)},
          {"B", B},
          {"live_required", live_required},
          {"seeds_total", seeds_total},
          {"seeds_succeeded", seeds_succeeded},
          {"seeds_good", seeds_good},
          {"seeds_accepting", seeds_accepting},
          {"good_fraction", rat_str(good_fraction)},
          {"min_estimate", rat_str(min_estimate)},
          {"max_estimate", rat_str(max_estimate)}};
}

DerandVerdict quantified_derandomize(const ThresholdCircuit& c, const DerandConfig& cfg, const Budget& budget,
                                     Exec ex) {
  c.validate(true);
  DerandVerdict v;
  v.n = c.n;
  v.d = c.depth();
  v.eps = cfg.eps;
  v.delta = restriction_delta(v.d, cfg.eps);
  if (cfg.B) {
    v.B = cfg.B->get_str();
    v.live_required = live_required_for(*cfg.B);
  } else {
    const Rat e = Rat(1) - v.delta;
    v.B = "(1/10)*2^(" + std::to_string(c.n) + "^(" + rat_str(e) + "))";
    v.live_required = e <= 0 ? 1 : ceil_root_power(Int(static_cast<unsigned long>(c.n)), e).get_ui();
  }

  std::vector<SourcePtr> ltf_src(c.n + 1);
  if (cfg.ltf_source)
    for (std::size_t L = 1; L <= c.n; ++L) {
      ltf_src[L] = cfg.ltf_source(L);
      if (ltf_src[L]->out_bits() < L) throw Error(ErrorCode::length_mismatch, kMod, "ltf source too short");
    }

  std::uint64_t total = 1;
  if (v.d >= 2) {
    if (!cfg.y || !cfg.z) throw Error(ErrorCode::invalid_argument, kMod, "restriction sources missing");
    total = sat_mul(cfg.y->seed_count(), cfg.z->seed_count());
  }
  budget.charge(total, kMod, "restriction seed enumeration");
  v.seeds_total = total;

  std::vector<SeedOutcome> out(total);
  std::mutex mu;
  std::exception_ptr err;
  std::atomic<bool> failed{false};
  const std::uint64_t zc = v.d >= 2 ? cfg.z->seed_count() : 1;
  kernels::for_each(
      total,
      [&](std::uint64_t i) {
        if (failed.load(std::memory_order_relaxed)) return;
        try {
          FullResult r;
          if (v.d >= 2) {
            const auto seeds = iteration_seeds(cfg.y.get(), cfg.z.get(), i / zc, i % zc, v.d - 1);
            r = try_restrict_full(c, cfg.eps, seeds, cfg.restrict_opt);
          } else {
            r.rho = Restriction::identity(c.n);
            r.phi = c.layers[0][0];
            r.trace.success = true;
          }
          SeedOutcome& o = out[i];
          if (!r.ok()) return;
          const std::size_t L = r.phi.arity();
          if (L < v.live_required) {
            o.status = 1;
            return;
          }
          const auto [acc, tot] = estimate(r.phi, ltf_src[L].get());
          o.acc = acc;
          o.tot = tot;
          o.status = 5 * acc >= 3 * tot ? 2 : 3;
        } catch (...) {
          std::lock_guard<std::mutex> lk(mu);
          if (!err) err = std::current_exception();
          failed = true;
        }
      },
      ex);
  if (err) std::rethrow_exception(err);

  bool first = true;
  for (const auto& o : out) {
    if (o.status >= 1) ++v.seeds_succeeded;
    if (o.status < 2) continue;
    ++v.seeds_good;
    v.seeds_accepting += o.status == 2;
    Rat e(Int(static_cast<unsigned long>(o.acc)), Int(static_cast<unsigned long>(o.tot)));
    e.canonicalize();
    if (first || e < v.min_estimate) v.min_estimate = e;
    if (first || e > v.max_estimate) v.max_estimate = e;
    first = false;
  }
  v.good_fraction = Rat(Int(static_cast<unsigned long>(v.seeds_good)), Int(static_cast<unsigned long>(total)));
  v.good_fraction.canonicalize();
  if (v.seeds_good == 0)
    throw Error(ErrorCode::no_successful_seed, kMod,
                std::to_string(v.seeds_succeeded) + " of " + std::to_string(total) +
                    " seeds succeeded, none kept " + std::to_string(v.live_required) + " live variables");
  v.accept = 2 * v.seeds_accepting > v.seeds_good;
  return v;
}

nlohmann::json Depth2Params::to_json() const {
  return {{"n", n}, {"eps", rat_str(eps)}, {"q", q}, {"p", "1/" + std::to_string(std::uint64_t{1} << q)},
          {"delta", delta}};
}

Depth2Params depth2_params(std::size_t n, const Rat& eps) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, kMod, "need n >= 2");
  if (eps <= 0) throw Error(ErrorCode::invalid_argument, kMod, "need eps > 0");
  const Int nn(static_cast<unsigned long>(n));
  const Rat lo = Rat(1) - eps / 2, hi = Rat(1) - Rat(2, 3) * eps;
  for (unsigned q = 1; q < 63 && (std::uint64_t{1} << q) < n; ++q) {
    const Rat two_q(Int(1) << q);
    // delta > eps/2  <=>  2^q < n^(1-eps/2);  delta < 2eps/3  <=>  2^q > n^(1-2eps/3)
    if (cmp_root_power(two_q, nn, lo) < 0 && cmp_root_power(two_q, nn, hi) > 0) {
      Depth2Params p;
      p.n = n;
      p.eps = eps;
      p.q = q;
      p.delta = 1.0 - q / std::log2(static_cast<double>(n));
      return p;
    }
  }
  throw Error(ErrorCode::infeasible, kMod,
              "no power-of-two p = n^-(1-delta) with delta in (eps/2, 2eps/3) at n = " + std::to_string(n) +
                  ", eps = " + rat_str(eps));
}

Depth2Sources default_depth2_sources(const Depth2Params& p) {
  const std::size_t k = std::min<std::size_t>(p.q * p.n, 2 * p.q * ceil_log2(Int(static_cast<unsigned long>(p.n))));
  const Rat small(1, static_cast<unsigned long>(p.n * p.n));
  return {make_almost_kwise(p.q * p.n, k, default_kwise_delta(p.n)), make_ltf_fooling(p.n, small),
          make_ltf_fooling(p.n, small)};
}

Depth2Sources uniform_depth2_sources(const Depth2Params& p) {
  return {make_uniform(p.q * p.n), make_uniform(p.n), make_uniform(p.n)};
}

namespace {

Point assemble(const Depth2Params& p, const std::vector<std::uint8_t>& y, const std::vector<std::uint8_t>& z,
               const std::vector<std::uint8_t>& x) {
  const Restriction rho = restriction_from_bits(std::span(y).first(p.q * p.n), std::span(z).first(p.n), p.n, p.q);
  const std::size_t L = rho.live_count();
  Point fill(L);
  for (std::size_t j = 0; j < L; ++j) fill[j] = x[j] ? -1 : 1;
  return rho.extend(fill);
}

void check_sources(const Depth2Params& p, const Depth2Sources& src) {
  if (!src.y || !src.z || !src.x) throw Error(ErrorCode::invalid_argument, kMod, "missing depth-2 source");
  if (src.y->out_bits() < p.q * p.n || src.z->out_bits() < p.n || src.x->out_bits() < p.n)
    throw Error(ErrorCode::length_mismatch, kMod, "depth-2 sources too short");
}

}  // namespace

Point prg_depth2(const Depth2Params& p, const Depth2Sources& src, std::span<const std::uint64_t> y_seed,
                 std::span<const std::uint64_t> z_seed, std::span<const std::uint64_t> x_seed) {
  check_sources(p, src);
  std::vector<std::uint8_t> y, z, x;
  src.y->generate(y_seed, y);
  src.z->generate(z_seed, z);
  src.x->generate(x_seed, x);
  return assemble(p, y, z, x);
}

Point prg_depth2(const Depth2Params& p, const Depth2Sources& src, std::uint64_t y_seed, std::uint64_t z_seed,
                 std::uint64_t x_seed) {
  check_sources(p, src);
  std::vector<std::uint8_t> y, z, x;
  src.y->generate(y_seed, y);
  src.z->generate(z_seed, z);
  src.x->generate(x_seed, x);
  return assemble(p, y, z, x);
}

Point prg_depth2(std::size_t n, const Rat& eps, std::uint64_t seed) {
  const Depth2Params p = depth2_params(n, eps);
  const Depth2Sources src = default_depth2_sources(p);
  std::uint64_t state = seed;
  auto words = [&](const SeededSource& s) {
    std::vector<std::uint64_t> w(s.seed_words());
    for (auto& x : w) x = splitmix64(state);
    if (!w.empty() && s.seed_bits() % 64) w.back() &= low_bits(static_cast<unsigned>(s.seed_bits() % 64));
    return w;
  };
  const auto ys = words(*src.y), zs = words(*src.z), xs = words(*src.x);
  return prg_depth2(p, src, ys, zs, xs);
}

nlohmann::json Depth2Verdict::to_json() const {
  return {{"decision", accept ? "accept" : "reject"}, {"seeds", seeds}, {"accepting", accepting},
          {"acceptance", rat_str(acceptance)}};
}

Depth2Verdict derandomize_depth2(const ThresholdCircuit& c, const Depth2Params& p, const Depth2Sources& src,
                                 const Budget& budget, Exec ex) {
  c.validate(true);
  if (c.depth() != 2) throw Error(ErrorCode::invalid_argument, kMod, "circuit depth must be 2");
  if (c.n != p.n) throw Error(ErrorCode::length_mismatch, kMod, "circuit arity differs from n");
  check_sources(p, src);
  const std::uint64_t Y = src.y->seed_count(), Z = src.z->seed_count(), X = src.x->seed_count();
  const std::uint64_t total = sat_mul(sat_mul(Y, Z), X);
  budget.charge(total, kMod, "depth-2 seed enumeration");
  if (p.n > 63) throw Error(ErrorCode::budget_exceeded, kMod, "arity too large");
  std::vector<std::uint64_t> xw(X);
  for (std::uint64_t s = 0; s < X; ++s) xw[s] = src.x->word(s);
  const CompiledCircuit cc(c);
  const std::uint64_t acc = kernels::sum(
      sat_mul(Y, Z),
      [&](std::uint64_t i) {
        thread_local std::vector<std::uint8_t> y, z;
        src.y->generate(i / Z, y);
        src.z->generate(i % Z, z);
        const Restriction rho =
            restriction_from_bits(std::span(y).first(p.q * p.n), std::span(z).first(p.n), p.n, p.q);
        std::uint64_t base = 0;
        std::vector<unsigned> pos;
        for (std::size_t k = 0; k < p.n; ++k) {
          if (rho.a[k] == star)
            pos.push_back(static_cast<unsigned>(k));
          else if (rho.a[k] == minus)
            base |= std::uint64_t{1} << k;
        }
        std::uint64_t hits = 0;
        for (std::uint64_t s = 0; s < X; ++s) {
          std::uint64_t idx = base;
          for (std::size_t j = 0; j < pos.size(); ++j) idx |= ((xw[s] >> j) & 1) << pos[j];
          hits += cc.eval_index(idx) == -1;
        }
        return hits;
      },
      ex);
  Depth2Verdict v;
  v.seeds = total;
  v.accepting = acc;
  v.acceptance = Rat(Int(static_cast<unsigned long>(acc)), Int(static_cast<unsigned long>(total)));
  v.acceptance.canonicalize();
  v.accept = 2 * acc > total;
  return v;
}

Depth2Verdict derandomize_depth2_reference(const ThresholdCircuit& c, const Depth2Params& p, const Depth2Sources& src,
                                           const Budget& budget) {
  c.validate(true);
  if (c.depth() != 2) throw Error(ErrorCode::invalid_argument, kMod, "circuit depth must be 2");
  check_sources(p, src);
  const std::uint64_t Y = src.y->seed_count(), Z = src.z->seed_count(), X = src.x->seed_count();
  const std::uint64_t total = sat_mul(sat_mul(Y, Z), X);
  budget.charge(total, kMod, "depth-2 reference enumeration");
  std::uint64_t acc = 0;
  for (std::uint64_t y = 0; y < Y; ++y)
    for (std::uint64_t z = 0; z < Z; ++z)
      for (std::uint64_t x = 0; x < X; ++x) acc += eval_circuit(c, prg_depth2(p, src, y, z, x)) == -1;
  Depth2Verdict v;
  v.seeds = total;
  v.accepting = acc;
  v.acceptance = Rat(Int(static_cast<unsigned long>(acc)), Int(static_cast<unsigned long>(total)));
  v.acceptance.canonicalize();
  v.accept = 2 * acc > total;
  return v;
}

bool is_trivial_exhaustive(const Ltf& phi) {
  const std::size_t L = phi.arity();
  if (L <= 1) return true;
  if (L > 20) throw Error(ErrorCode::budget_exceeded, kMod, "too many live variables to enumerate");
  const CompiledCircuit cc(ThresholdCircuit::from_ltf(phi));
  const std::uint64_t cube = std::uint64_t{1} << L;
  std::vector<std::int8_t> f(cube);
  for (std::uint64_t i = 0; i < cube; ++i) f[i] = static_cast<std::int8_t>(cc.eval_index(i));
  std::size_t deps = 0;
  for (std::size_t j = 0; j < L && deps < 2; ++j)
    for (std::uint64_t i = 0; i < cube; ++i)
      if (f[i] != f[i ^ (std::uint64_t{1} << j)]) {
        ++deps;
        break;
      }
  return deps <= 1;
}

bool is_trivial_criterion(const Ltf& phi) {
  if (constant_l1(phi.weights, phi.threshold)) return true;
  if (phi.arity() <= 1) return true;
  std::size_t j = 0;
  for (std::size_t i = 1; i < phi.arity(); ++i)
    if (abs(phi.weights[i]) > abs(phi.weights[j])) j = i;
  std::vector<Int> rest;
  for (std::size_t i = 0; i < phi.arity(); ++i)
    if (i != j) rest.push_back(phi.weights[i]);
  const Rat wj(phi.weights[j]);
  return constant_l1(rest, phi.threshold - wj) && constant_l1(rest, phi.threshold + wj);
}

nlohmann::json KwReport::to_json() const {
  return {{"trials", trials}, {"nontrivial", nontrivial}, {"live_two_or_more", live_two_or_more}, {"rate", rate()}};
}

KwReport harness_kw_restriction(const Ltf& phi, KwFamily family, const Rat& p, const SeededSource& z_source,
                                std::uint64_t trials, std::uint64_t seed) {
  const std::size_t m = phi.arity();
  if (p < 0 || p > 1) throw Error(ErrorCode::invalid_argument, kMod, "p outside [0, 1]");
  if (z_source.out_bits() < m) throw Error(ErrorCode::length_mismatch, kMod, "z source too short");
  if (!p.get_den().fits_ulong_p()) throw Error(ErrorCode::invalid_argument, kMod, "p denominator too large");
  const std::uint64_t num = p.get_num().get_ui(), den = p.get_den().get_ui();
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::uint64_t> coin(0, den - 1);
  // partition family: floor(p m) blocks of m / blocks consecutive indices, the last takes the remainder
  Rat pm = p * Rat(static_cast<unsigned long>(m));
  Int blocks_i;
  mpz_fdiv_q(blocks_i.get_mpz_t(), pm.get_num().get_mpz_t(), pm.get_den().get_mpz_t());
  const std::size_t blocks = blocks_i.get_ui();
  std::vector<std::uint8_t> z;
  KwReport r;
  r.trials = trials;
  for (std::uint64_t t = 0; t < trials; ++t) {
    std::vector<char> live(m, 0);
    if (family == KwFamily::bernoulli) {
      for (std::size_t i = 0; i < m; ++i) live[i] = coin(rng) < num;
    } else if (blocks > 0) {
      const std::size_t size = m / blocks;
      for (std::size_t b = 0; b < blocks; ++b) {
        const std::size_t lo = b * size, hi = b + 1 == blocks ? m : lo + size;
        std::uniform_int_distribution<std::size_t> pick(lo, hi - 1);
        live[pick(rng)] = 1;
      }
    }
    z_source.sample(rng, z);
    Restriction rho = Restriction::identity(m);
    std::size_t L = 0;
    for (std::size_t i = 0; i < m; ++i) {
      if (live[i])
        ++L;
      else
        rho.a[i] = z[i] ? minus : plus;
    }
    if (L >= 2) ++r.live_two_or_more;
    if (L < 2) continue;
    const Ltf rest = restrict_ltf(phi, rho);
    const bool trivial = L <= 12 ? is_trivial_exhaustive(rest) : is_trivial_criterion(rest);
    r.nontrivial += !trivial;
  }
  return r;
}

}  // namespace ltcd
