// Runs every acceptance criterion at its stated tolerance and time limit.
// One PASS/FAIL line per criterion; exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "ltcd/codes.hpp"
#include "ltcd/derand.hpp"
#include "ltcd/designs.hpp"
#include "ltcd/instances.hpp"
#include "ltcd/restriction.hpp"
#include "ltcd/sampler.hpp"
#include "ltcd/sources.hpp"

using namespace ltcd;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::size_t popcnt(const Bits& b) {
  std::size_t w = 0;
  for (auto v : b) w += v;
  return w;
}

Bits mask_bits(std::uint64_t v, std::size_t n) {
  Bits b(n);
  for (std::size_t i = 0; i < n; ++i) b[i] = (v >> i) & 1;
  return b;
}

FullOptions desk_opts() {
  FullOptions o;
  o.override_mode = true;
  o.params = [](std::size_t n, const Rat&) { return desk_layer_params(n); };
  return o;
}

// 1
Verdict weak_designs() {
  int feasible = 0, ok = 0, skipped = 0;
  for (std::size_t ell : {4, 5, 8, 10})
    for (const Rat& alpha : {Rat(1, 5), Rat(1, 8)})
      for (std::size_t m : {1, 2, 8, 64}) {
        Rat e = (Rat(1) - alpha) * Rat(static_cast<unsigned long>(ell));
        e.canonicalize();
        if (e.get_den() != 1) {
          ++skipped;
          continue;
        }
        ++feasible;
        const WeakDesign d = build_weak_design(m, ell, alpha);
        // recompute the condition here with plain loops
        bool good = verify_weak_design(d) && d.sets.size() == m;
        for (std::size_t i = 0; i < d.sets.size(); ++i) {
          Int sum = 0;
          for (std::size_t j = 0; j < i; ++j) {
            std::size_t c = 0;
            for (auto a : d.sets[i])
              for (auto b : d.sets[j]) c += a == b;
            sum += Int(1) << static_cast<unsigned>(c);
          }
          good = good && d.sets[i].size() == ell && sum <= d.rho * Int(static_cast<unsigned long>(i));
          for (auto a : d.sets[i]) good = good && a < d.t;
        }
        ok += good;
      }
  std::ostringstream s;
  s << ok << "/" << feasible << " feasible grid points verified, " << skipped << " infeasible (non-integral rho)";
  return {ok == feasible && feasible > 0, s.str()};
}

// 2
Verdict tensor_distance() {
  const LinearCode base = find_base_code(3);
  std::size_t worst = ~std::size_t{0}, len = 0;
  for (std::uint64_t v = 1; v < 512; ++v) {
    const Bits cw = tensor_encode(mask_bits(v, 9), base, 2);
    len = cw.size();
    worst = std::min(worst, popcnt(cw));
  }
  std::ostringstream s;
  s << "min weight " << worst << "/" << len << " over 511 messages, need >= 1/9";
  return {9 * worst >= len, s.str()};
}

// 3
Verdict balanced_code() {
  const LinearCode base = find_base_code(3);
  const BalancedCode bc = make_balanced_code(base, 1, Rat(1, 8));
  Rat lo = 1, hi = 0;
  for (std::uint64_t v = 1; v < 8; ++v) {
    const Bits cw = bc.encode(mask_bits(v, 3));
    const Rat w = frac(popcnt(cw), cw.size());
    lo = std::min(lo, w);
    hi = std::max(hi, w);
  }
  std::ostringstream s;
  s << "length " << bc.length() << ", walk length " << bc.ell << ", weights in [" << rat_str(lo) << ", "
    << rat_str(hi) << "], need [3/8, 1/2]";
  return {lo >= Rat(3, 8) && hi <= Rat(1, 2), s.str()};
}

// 4
Verdict sampler_property() {
  const SamplerSpec spec = desk_sampler_spec(10, 2, 6, 5, Rat(1, 5));
  const Rat delta(1, 4);
  const auto rep = verify_sampler(spec, spec.eps, delta, random_tests(spec.m, 50, 2024));
  std::ostringstream s;
  s << "n=10 m=2 t=" << spec.t << ", accuracy " << rat_str(spec.eps) << ", worst bad-x fraction "
    << rat_str(rep.worst_bad_fraction) << " over 50 tests, delta " << rat_str(delta);
  return {rep.pass && rep.tests.size() == 50, s.str()};
}

// 5
Verdict reduction_circuit() {
  const SamplerSpec spec = desk_sampler_spec(10, 2, 6, 5, Rat(1, 5));
  const ThresholdCircuit c = ThresholdCircuit::from_ltf(Ltf{{Int(1), Int(1)}, Rat(1)});
  const ReductionCircuit rc = build_reduction_circuit(c, spec);
  const CompiledCircuit cc(rc.circuit);
  std::uint64_t mismatches = 0;
  for (std::uint64_t x = 0; x < 1024; ++x) {
    const Bits cw = encode_with(spec.code, x_bits(x, spec.n));
    std::uint64_t acc = 0;
    for (std::uint64_t z = 0; z < (std::uint64_t{1} << spec.t); ++z)
      acc += eval_circuit(c, point_from_index(sample_output(cw, z, spec), spec.m)) == -1;
    const int direct = 2 * acc > (std::uint64_t{1} << spec.t) ? -1 : 1;
    mismatches += cc.eval_index(x) != direct;
  }
  const std::size_t d = c.depth();
  // one linear pass of parity gadgets is depth 2 = 2d
  const bool depth_ok = rc.code_depth == 2 * d && rc.circuit.depth() == 3 * d + 2;
  std::ostringstream s;
  s << "1024 inputs, " << mismatches << " mismatches, depth " << rc.circuit.depth() << " (d=" << d
    << ", 3d+2=" << 3 * d + 2 << ")";
  return {mismatches == 0 && depth_ok, s.str()};
}

// 6
Verdict restriction_soundness() {
  const std::size_t n = 12;
  std::vector<ThresholdCircuit> circuits;
  for (std::uint64_t s = 0; s < 4; ++s) circuits.push_back(random_depth2(n, 3 + 2 * s, 1, 4, 3, s));
  circuits.push_back(point_exception_circuit(n, random_points(n, 3, 7)));
  circuits.push_back(point_exception_circuit(n, random_points(n, 2, 8), true));
  circuits.push_back(majority_tower(n, 3));
  circuits.push_back(majority_tower(n, 4));
  circuits.push_back(and_like_circuit(n));
  UniformSource ys(n), zs(n);
  std::mt19937_64 rng(6);
  std::uint64_t runs = 0, success = 0, close_ok = 0, eval_bad = 0, live_sum = 0;
  std::size_t live_max = 0;
  for (const auto& c : circuits)
    for (int rep = 0; rep < 200; ++rep) {
      ++runs;
      const FullResult r =
          try_restrict_full(c, Rat(1, 40), {LayerSeeds{&ys, &zs, rng() & 0xfff, rng() & 0xfff}}, desk_opts());
      if (!r.ok()) continue;
      ++success;
      const ThresholdCircuit cr = restrict_circuit(c, r.rho);
      const std::size_t L = r.rho.live_count();
      live_sum += L;
      live_max = std::max(live_max, L);
      if (r.phi.arity() != L) ++eval_bad;
      const CompiledCircuit full(c), restricted(cr), phi(ThresholdCircuit::from_ltf(r.phi));
      std::uint64_t agree = 0;
      for (std::uint64_t i = 0; i < (std::uint64_t{1} << L); ++i) {
        const Point y = point_from_index(i, L);
        const int v = restricted.eval_index(i);
        if (v != full.eval(r.rho.extend(y))) ++eval_bad;
        agree += v == phi.eval_index(i);
      }
      close_ok += 10 * agree >= 9 * (std::uint64_t{1} << L);
    }
  std::ostringstream s;
  s << runs << " runs on " << circuits.size() << " circuits, " << success << " successful, " << eval_bad
    << " eval mismatches, " << close_ok << "/" << success << " with closeness >= 9/10, live mean "
    << (success ? static_cast<double>(live_sum) / static_cast<double>(success) : 0.0) << " max " << live_max;
  return {eval_bad == 0 && success > 0 && 10 * close_ok >= 9 * success, s.str()};
}

// 7
Verdict end_to_end() {
  struct Case {
    ThresholdCircuit c;
    std::uint64_t B;
  };
  std::vector<Case> cases;
  for (const auto& in : generate_family("near-constant", 8, 6, 71))
    cases.push_back({in.circuit, *in.declared_exceptions});
  {
    const auto pts = random_points(10, 2, 10);
    cases.push_back({point_exception_circuit(10, pts), 2});
    cases.push_back({point_exception_circuit(10, pts, true), 2});
  }
  std::size_t decided = 0, correct = 0, no_seed = 0;
  for (const auto& k : cases) {
    const std::uint64_t acc = acceptance_count(k.c);
    const std::uint64_t total = std::uint64_t{1} << k.c.n;
    DerandConfig cfg;
    cfg.eps = Rat(1, 40);
    cfg.restrict_opt = desk_opts();
    cfg.y = make_uniform(k.c.n);
    cfg.z = make_uniform(k.c.n);
    cfg.B = Int(static_cast<unsigned long>(k.B));
    try {
      const DerandVerdict v = quantified_derandomize(k.c, cfg, Budget::unlimited());
      ++decided;
      correct += v.accept == (2 * acc > total);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::no_successful_seed) throw;
      ++no_seed;
    }
  }
  std::ostringstream s;
  s << cases.size() << " instances (n=8, n=10), " << correct << "/" << decided << " correct, no-successful-seed rate "
    << no_seed << "/" << cases.size();
  return {decided > 0 && correct == decided && 2 * no_seed <= cases.size(), s.str()};
}

// 8
Verdict lemma_statistics() {
  const std::size_t n = 64;
  const HarnessRate r =
      harness_single_ltf_lemma(Ltf::majority(n), 4, Rat(1), UniformSource(4 * n), UniformSource(n), 10000, 8);
  const double bound = 8 * std::sqrt(1.0 / 16);
  std::ostringstream s;
  s << "balanced rate " << r.hits << "/" << r.trials << " = " << r.rate() << ", bound " << bound;
  return {r.trials == 10000 && r.rate() <= bound, s.str()};
}

// 9
Verdict kw_statistics() {
  const std::size_t m = 64;
  const KwReport r = harness_kw_restriction(Ltf::majority(m), KwFamily::bernoulli, Rat(1, 16), UniformSource(m), 10000, 9);
  const double bound = 8.0 * m * std::pow(1.0 / 16, 1.5);
  std::ostringstream s;
  s << "non-trivial rate " << r.nontrivial << "/" << r.trials << " = " << r.rate() << ", bound " << bound;
  return {r.trials == 10000 && r.rate() <= bound, s.str()};
}

// 10
Verdict concentration_equivalence() {
  std::size_t checked = 0, held = 0;
  std::mt19937_64 rng(10);
  for (std::size_t n : {4, 6, 8}) {
    std::vector<std::vector<Int>> weights{std::vector<Int>(n, Int(1))};
    std::vector<Int> geo, rnd;
    for (std::size_t i = 0; i < n; ++i) {
      geo.push_back(Int(1) << static_cast<unsigned>(i));
      rnd.push_back(Int(static_cast<long>(rng() % 9) - 4));
    }
    weights.push_back(geo);
    weights.push_back(rnd);
    const std::vector<SourcePtr> sources{make_uniform(n), make_almost_kwise(n, std::min<std::size_t>(n, 4), Rat(1, 8)),
                                         make_almost_kwise(n, 2, Rat(1, 2)), make_ltf_fooling(n, Rat(1, 16))};
    for (const auto& src : sources)
      for (const auto& w : weights) {
        const ConcentrationProfile p = concentration_profile(*src, w, Budget::unlimited());
        ++checked;
        // LTF fooling bounds interval fooling by twice the gap, and intervals include half-lines
        held += p.max_ltf_gap <= p.max_interval_gap && p.max_interval_gap <= 2 * p.max_ltf_gap;
      }
  }
  std::ostringstream s;
  s << held << "/" << checked << " (source, weights) pairs satisfy both directions exactly";
  return {held == checked, s.str()};
}

// 11
Verdict depth2_pipeline() {
  const Depth2Params p = depth2_params(6, Rat(2, 5));
  const Depth2Sources src = uniform_depth2_sources(p);
  std::vector<ThresholdCircuit> circuits{constant_circuit(6, -1), constant_circuit(6, 1)};
  for (const auto& in : generate_family("near-constant", 6, 6, 111)) circuits.push_back(in.circuit);
  std::size_t correct = 0;
  for (const auto& c : circuits) {
    const std::uint64_t acc = acceptance_count(c);
    const Depth2Verdict v = derandomize_depth2(c, p, src, Budget::unlimited());
    correct += v.accept == (2 * acc > 64) && v.acceptance == frac(acc, 64);
  }
  std::ostringstream s;
  s << "n=6 eps=2/5 q=" << p.q << ", " << correct << "/" << circuits.size() << " verdicts correct over 2^24 seeds each";
  return {correct == circuits.size(), s.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double limit_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> all{
      {1, "weak designs", 60, weak_designs},
      {2, "tensor code distance", 10, tensor_distance},
      {3, "balanced code", 120, balanced_code},
      {4, "sampler property", 120, sampler_property},
      {5, "reduction circuit", 60, reduction_circuit},
      {6, "restriction soundness", 600, restriction_soundness},
      {7, "end-to-end derandomizer", 900, end_to_end},
      {8, "restriction-lemma statistics", 60, lemma_statistics},
      {9, "Kane-Williams restriction statistic", 60, kw_statistics},
      {10, "pseudorandom-concentration equivalence", 120, concentration_equivalence},
      {11, "depth-2 pipeline", 600, depth2_pipeline},
  };
  int failed = 0;
  for (const auto& c : all) {
    const auto t0 = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const bool pass = v.pass && secs < c.limit_s;
    failed += !pass;
    std::printf("%s %2d %s: %s [%.1f s, limit %.0f s]\n", pass ? "PASS" : "FAIL", c.id, c.name, v.detail.c_str(), secs,
                c.limit_s);
    std::fflush(stdout);
  }
  return failed ? 1 : 0;
}
