#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "gen.hpp"
#include "ltcd/instances.hpp"
#include "ltcd/ltf_analysis.hpp"
#include "ltcd/restriction.hpp"

using namespace ltcd;

namespace {

Ltf on(std::size_t n, const std::vector<std::size_t>& vars, long theta2 = 0) {
  Ltf g;
  g.weights.assign(n, Int(0));
  for (auto v : vars) g.weights[v] = 1;
  g.threshold = Rat(theta2, 2);
  g.threshold.canonicalize();
  return g;
}

FullOptions desk_opts() {
  FullOptions o;
  o.override_mode = true;
  o.params = [](std::size_t n, const Rat&) { return desk_layer_params(n); };
  return o;
}

ThresholdCircuit restricted(const ThresholdCircuit& c, const Restriction& rho) { return restrict_circuit(c, rho); }

}  // namespace

TEST_CASE("caps compare exactly") {
  const Cap c = Cap::power(2, 16, Rat(1, 2));  // 8
  CHECK(c.cmp(Rat(8)) == 0);
  CHECK(c.cmp(Rat(9)) > 0);
  CHECK(c.cmp(Rat(15, 2)) < 0);
  CHECK(Cap::value(3).cmp(Rat(3)) == 0);
  CHECK(c.approx() == doctest::Approx(8.0));
}

TEST_CASE("default layer parameters") {
  const auto p = default_layer_params(12, Rat(1, 40));
  CHECK(p.q == 1);
  CHECK(p.beta_in_range());
  CHECK_FALSE(p.override_mode);
  CHECK(p.alpha == frac(12, 40));
  // 10 eps < q / log2 n < 12 eps, in doubles for an independent view
  CHECK(0.25 < 1.0 / std::log2(12.0));
  CHECK(1.0 / std::log2(12.0) < 0.3);
  CHECK_THROWS_AS(default_layer_params(8, Rat(1, 40)), Error);
  try {
    default_layer_params(8, Rat(1, 40));
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::infeasible);
  }
  // larger n: q near 11 eps log2 n
  const auto big = default_layer_params(std::size_t{1} << 20, Rat(1, 11));
  CHECK(big.q == 20);
  CHECK(big.beta_in_range());
  CHECK(big.fanout_cap.cmp(Rat(2) * Rat(std::pow(2.0, 20.0 / 11.0))) != 2);
  const auto f = forced_layer_params(64, Rat(1, 40), 3);
  CHECK(f.override_mode);
  CHECK(f.p() == Rat(1, 8));
}

TEST_CASE("restriction delta") {
  CHECK(restriction_delta(1, Rat(1, 40)) == Rat(1, 40));
  CHECK(restriction_delta(2, Rat(1, 40)) == Rat(3, 2));
  CHECK(restriction_delta(3, Rat(1, 10000)) == frac(2700, 10000));
}

TEST_CASE("balance against caps matches the rational test") {
  for (int rep = 0; rep < 200; ++rep) {
    Ltf phi = gen::ltf(static_cast<std::size_t>(gen::uniform(1, 6)));
    Rat t(gen::uniform(0, 12), 3);
    t.canonicalize();
    if (phi.all_zero()) continue;
    CHECK(is_balanced_cap(phi, Cap::value(t)) == is_t_balanced(phi, t));
  }
}

TEST_CASE("fix_high_fanout examples") {
  ThresholdCircuit c;
  c.n = 4;
  c.layers = {{on(4, {0}), on(4, {1}), on(4, {2}), on(4, {3})}, {on(4, {0, 1, 2, 3})}};
  const std::vector<std::uint8_t> z(4, 0);
  auto r = fix_high_fanout(c, Cap::value(1), z);
  CHECK(r.fixed.empty());
  CHECK(r.rho == Restriction::identity(4));

  c.layers = {{on(4, {0, 1}), on(4, {0, 2}), on(4, {0, 3})}, {on(3, {0, 1, 2})}};
  r = fix_high_fanout(c, Cap::value(2), {1, 0, 0, 0});
  CHECK(r.fixed == std::vector<std::size_t>{0});
  CHECK(r.rho.a[0] == -1);
  CHECK(r.circuit.wires() == c.wires() - 3);
}

TEST_CASE("property: high fan-out fixing never fixes more than wires / cap") {
  for (int rep = 0; rep < 20; ++rep) {
    const std::size_t n = static_cast<std::size_t>(gen::uniform(4, 16));
    const ThresholdCircuit c = random_depth2(n, static_cast<std::size_t>(gen::uniform(2, 10)), 1, n, 3,
                                             static_cast<std::uint64_t>(rep));
    const long cap = gen::uniform(1, 4);
    std::vector<std::uint8_t> z(n);
    for (auto& b : z) b = static_cast<std::uint8_t>(gen::uniform(0, 1));
    const auto r = fix_high_fanout(c, Cap::value(cap), z);
    CHECK(r.fixed.size() * static_cast<std::size_t>(cap) <= c.wires());
    for (auto v : r.fixed) CHECK(r.rho.a[v] == (z[v] ? -1 : 1));
    // survivors respect the cap
    for (std::size_t v = 0; v < n; ++v) {
      if (r.rho.a[v] != star) continue;
      long fo = 0;
      for (const auto& g : c.layers[0]) fo += g.weights[v] != 0;
      CHECK(fo <= cap);
    }
  }
}

TEST_CASE("greedy independent set examples") {
  CHECK(greedy_independent_set({0, 1, 2, 3}, {}) == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(greedy_independent_set({0, 1, 2, 3}, {{0, 1}, {2, 3}}) == std::vector<std::size_t>{0, 2});
  CHECK_THROWS_AS(greedy_independent_set({0, 1, 2}, {{0, 1, 2}}, 1), Error);
}

TEST_CASE("property: greedy sets are independent, maximal, and large enough") {
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = static_cast<std::size_t>(gen::uniform(1, 64));
    std::vector<std::size_t> live;
    for (std::size_t v = 0; v < n; ++v)
      if (gen::uniform(0, 3)) live.push_back(v);
    std::vector<std::vector<std::size_t>> gates;
    const long gcount = gen::uniform(0, 20);
    for (long g = 0; g < gcount; ++g) {
      std::vector<std::size_t> s;
      for (long k = gen::uniform(1, 3); k > 0; --k) s.push_back(static_cast<std::size_t>(gen::uniform(0, static_cast<long>(n) - 1)));
      gates.push_back(s);
    }
    const auto I = greedy_independent_set(live, gates);
    std::set<std::size_t> in(I.begin(), I.end());
    for (const auto& g : gates) {
      std::size_t hits = 0;
      for (auto v : std::set<std::size_t>(g.begin(), g.end())) hits += in.count(v);
      CHECK(hits <= 1);
    }
    // conflict degree bound from the graph
    std::size_t maxdeg = 0;
    std::set<std::size_t> lset(live.begin(), live.end());
    for (auto v : live) {
      std::set<std::size_t> nb;
      for (const auto& g : gates)
        if (std::find(g.begin(), g.end(), v) != g.end())
          for (auto u : g)
            if (u != v && lset.count(u)) nb.insert(u);
      maxdeg = std::max(maxdeg, nb.size());
      // maximality: every excluded live variable conflicts with a chosen one
      if (!in.count(v)) {
        bool blocked = false;
        for (auto u : nb) blocked = blocked || in.count(u);
        CHECK(blocked);
      }
    }
    CHECK(I.size() * (maxdeg + 1) >= live.size());
  }
}

TEST_CASE("layer reduction: constant bottom gates disappear") {
  const std::size_t n = 8;
  ThresholdCircuit c;
  c.n = n;
  c.layers = {{Ltf::constant(n, 1), Ltf::constant(n, -1), Ltf::constant(n, -1)}, {on(3, {0, 1, 2})}};
  UniformSource ys(n), zs(n);
  const LayerSeeds seeds{&ys, &zs, 0b10110110, 0b00000101};
  const LayerResult r = reduce_layer(c, desk_layer_params(n), seeds);
  CHECK(r.circuit.depth() == 1);
  CHECK(r.live == std::vector<std::size_t>{1, 2, 4, 5, 7});
  // only selection fixed anything
  for (const auto& st : r.trace.stages)
    if (st.stage != 2) CHECK(st.fixed.empty());
  // two -1 gates and one +1 gate into a majority of three: constant -1
  CHECK(r.circuit.layers[0][0].all_zero());
  CHECK(acceptance_count(r.circuit) == 32);
}

TEST_CASE("layer reduction: a balanced wide gate has its surviving inputs fixed") {
  const std::size_t n = 16;
  ThresholdCircuit c;
  c.n = n;
  c.layers = {{on(n, {0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}), on(n, {12, 13}, 1), on(n, {14, 15}, -1)},
              {on(3, {0, 1, 2})}};
  UniformSource ys(n), zs(n);
  // live after selection: 0..3 and 12..15; z sets 4..7 to -1 so the wide gate sees threshold 0
  const LayerSeeds seeds{&ys, &zs, 0xF00F, 0x00F0};
  const LayerResult r = reduce_layer(c, desk_layer_params(n), seeds);
  const auto& st = r.trace.stages;
  REQUIRE(st.size() == 4);
  CHECK(st[0].fixed.empty());
  CHECK(st[1].fixed == std::vector<std::size_t>{4, 5, 6, 7, 8, 9, 10, 11});
  CHECK(st[1].gates.empty());
  CHECK(st[2].fixed == std::vector<std::size_t>{0, 1, 2, 3});
  CHECK(st[2].gates == std::vector<std::size_t>{0});
  CHECK(st[3].fixed == std::vector<std::size_t>{13, 15});
  CHECK(r.live == std::vector<std::size_t>{12, 14});
  CHECK(r.trace.n1 == 16);
  CHECK(r.trace.n2 == 8);
  CHECK(r.trace.n3 == 4);
  CHECK(r.trace.n4 == 2);
  CHECK(r.trace.independent_set_ok);
  // nothing was approximated, so the reduced circuit is exact
  const ThresholdCircuit exact = restricted(c, r.rho);
  CHECK(closeness(exact, r.circuit) == 1);
}

TEST_CASE("layer reduction reports stage failures") {
  const std::size_t n = 16;
  ThresholdCircuit c;
  c.n = n;
  c.layers = {{on(n, {0, 1, 2, 3, 4, 5, 6, 7}), on(n, {8, 9})}, {on(2, {0, 1}, 1)}};
  UniformSource ys(n), zs(n);
  // only one variable selected: event E fails at stage 2
  const LayerSeeds seeds{&ys, &zs, 0x0001, 0};
  std::vector<std::size_t> live(n);
  for (std::size_t i = 0; i < n; ++i) live[i] = i;
  const LayerResult r = try_reduce_layer(c, live, n, desk_layer_params(n), seeds);
  CHECK_FALSE(r.ok());
  CHECK(r.trace.failed_stage == 2);
  CHECK_THROWS_AS(reduce_layer(c, desk_layer_params(n), seeds), Error);
  CHECK_THROWS_AS(reduce_layer(ThresholdCircuit::from_ltf(Ltf::majority(4)), desk_layer_params(4), seeds), Error);
  // asymptotic defaults refuse a circuit above the wire budget
  const LayerResult d = try_reduce_layer(random_depth2(12, 12, 6, 12, 3, 1), std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11}, 12,
                                         default_layer_params(12, Rat(1, 40)), LayerSeeds{&ys, &zs, 0, 0});
  CHECK_FALSE(d.ok());
  CHECK(d.trace.failed_stage == 0);
}

TEST_CASE("restrict_full on depth 1 is the identity") {
  const Ltf phi = gen::ltf(5);
  const FullResult r = restrict_full(ThresholdCircuit::from_ltf(phi), Rat(1, 40), {}, desk_opts());
  CHECK(r.rho == Restriction::identity(5));
  CHECK(r.phi == phi);
  CHECK(r.trace.layers.empty());
}

TEST_CASE("restrict_full refuses delta >= 1 without override") {
  const ThresholdCircuit c = random_depth2(12, 4, 2, 4, 3, 9);
  UniformSource ys(12), zs(12);
  CHECK_THROWS_AS(restrict_full(c, Rat(1, 40), {LayerSeeds{&ys, &zs, 0, 0}}), Error);
}

TEST_CASE("property: restrict_full is sound and close on desk circuits") {
  std::mt19937_64 rng(77);
  int ok = 0, exact_runs = 0;
  for (int rep = 0; rep < 60; ++rep) {
    const std::size_t n = static_cast<std::size_t>(gen::uniform(6, 10));
    const ThresholdCircuit c = rep % 3 == 0 ? point_exception_circuit(n, random_points(n, 2, static_cast<std::uint64_t>(rep)))
                                            : random_depth2(n, static_cast<std::size_t>(gen::uniform(2, 6)), 1, 4, 3,
                                                            static_cast<std::uint64_t>(rep));
    UniformSource ys(n), zs(n);
    const std::uint64_t mask = (std::uint64_t{1} << n) - 1;
    const FullResult r = try_restrict_full(c, Rat(1, 40), {LayerSeeds{&ys, &zs, rng() & mask, rng() & mask}}, desk_opts());
    if (!r.ok()) continue;
    ++ok;
    const ThresholdCircuit cr = restricted(c, r.rho);
    const ThresholdCircuit phi = ThresholdCircuit::from_ltf(r.phi);
    REQUIRE(r.phi.arity() == r.rho.live_count());
    CHECK(r.trace.layers[0].n4 == r.phi.arity());
    // extending through rho and evaluating C is the restricted circuit
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << cr.n); ++i) {
      const Point y = point_from_index(i, cr.n);
      CHECK(eval_circuit(cr, y) == eval_circuit(c, r.rho.extend(y)));
    }
    const Rat close = closeness(cr, phi);
    CHECK(close >= Rat(9, 10));
    bool approximated = false;
    for (const auto& st : r.trace.layers[0].stages) approximated = approximated || !st.sigma.empty();
    if (!approximated) {
      CHECK(close == 1);
      ++exact_runs;
    }
    const std::size_t n4 = r.phi.arity();
    const double bound = n4 ? std::pow(static_cast<double>(n4), 1.75) : 0.0;
    const double w = static_cast<double>(phi.wires());
    if (std::abs(w - bound) > 1e-9) CHECK(r.trace.layers[0].wire_bound_ok == (w <= bound));
  }
  CHECK(ok > 30);
  CHECK(exact_runs > 0);
}

TEST_CASE("restrict_full success rate over every seed pair at n = 8") {
  const std::size_t n = 8;
  const ThresholdCircuit c = point_exception_circuit(n, random_points(n, 2, 5));
  UniformSource ys(n), zs(n);
  std::uint64_t success = 0;
  for (std::uint64_t y = 0; y < 256; ++y)
    for (std::uint64_t z = 0; z < 256; ++z)
      success += try_restrict_full(c, Rat(1, 40), {LayerSeeds{&ys, &zs, y, z}}, desk_opts()).ok();
  MESSAGE("desk restriction success " << success << " / 65536");
  CHECK(success > 0);
  CHECK(success <= 65536);
}

TEST_CASE("single-LTF harness: t = 0 counts exactly the zero thresholds") {
  const std::size_t n = 16;
  const Ltf maj = Ltf::majority(n);
  UniformSource ys(2 * n), zs(n);
  const HarnessRate r = harness_single_ltf_lemma(maj, 2, Rat(0), ys, zs, 2000, 99);
  std::mt19937_64 rng(99);
  std::vector<std::uint8_t> y, z;
  std::uint64_t zero = 0;
  for (int i = 0; i < 2000; ++i) {
    ys.sample(rng, y);
    zs.sample(rng, z);
    const Restriction rho = restriction_from_bits(y, z, n, 2);
    zero += restrict_ltf(maj, rho).threshold == 0;
  }
  CHECK(r.hits == zero);
  CHECK(r.trials == 2000);
}

TEST_CASE("single-LTF harness: balance gets rarer as p shrinks") {
  const std::size_t n = 64;
  const Ltf maj = Ltf::majority(n);
  UniformSource zs(n);
  const HarnessRate quarter = harness_single_ltf_lemma(maj, 2, Rat(1), UniformSource(2 * n), zs, 10000, 3);
  const HarnessRate sixteenth = harness_single_ltf_lemma(maj, 4, Rat(1), UniformSource(4 * n), zs, 10000, 3);
  MESSAGE("majority balanced rate p=1/4: " << quarter.rate() << ", p=1/16: " << sixteenth.rate());
  CHECK(sixteenth.rate() < quarter.rate());
  CHECK(quarter.rate() <= 8 * std::sqrt(0.25));
  CHECK(sixteenth.rate() <= 8 * std::sqrt(1.0 / 16));
  const Ltf geo = geometric_ltf(n, 2, Rat(0));
  const HarnessRate g = harness_single_ltf_lemma(geo, 4, Rat(1), UniformSource(4 * n), zs, 10000, 3);
  MESSAGE("geometric balanced rate p=1/16: " << g.rate());
  CHECK(g.rate() <= 5 * sixteenth.rate());
}

TEST_CASE("bias preservation examples") {
  UniformSource z8(8);
  const HarnessRate c = harness_bias_preservation(Ltf::constant(12, -1), -1, {0, 1, 2, 3}, Rat(0), z8, 1000, 1);
  CHECK(c.hits == c.trials);
  CHECK(c.trials == 256);
  // nonzero weights, threshold past the l1 norm: never flips
  Ltf far;
  far.weights.assign(12, Int(3));
  far.threshold = 37;
  CHECK(harness_bias_preservation(far, -1, {0, 1, 2, 3}, Rat(0), z8, 1000, 1).rate() == 1.0);
  // rejects only the all-ones input: 2^-12 close to -1; restricted to 4 live
  // variables, only the all-(+1) z leaves a 1/16 exception
  Ltf orth;
  orth.weights.assign(12, Int(1));
  orth.threshold = 12;
  CHECK(acceptance_count(orth) == 4095);
  const HarnessRate o = harness_bias_preservation(orth, -1, {0, 1, 2, 3}, Rat(1, 32), z8, 1000, 1);
  CHECK(o.trials == 256);
  CHECK(o.hits == 255);
  const double gamma = (1.0 / 4096) / (1.0 / 32);
  CHECK(o.rate() >= 1 - 10 * gamma);
  CHECK(harness_bias_preservation(orth, -1, {0, 1, 2, 3}, Rat(1, 16), z8, 1000, 1).hits == 256);
}

TEST_CASE("traces serialize") {
  const std::size_t n = 8;
  const ThresholdCircuit c = point_exception_circuit(n, {3});
  UniformSource ys(n), zs(n);
  const FullResult r = try_restrict_full(c, Rat(1, 40), {LayerSeeds{&ys, &zs, 0xff, 0}}, desk_opts());
  const auto j = r.trace.to_json();
  CHECK(j["layers"].size() == 1);
  CHECK(j["layers"][0]["stages"].is_array());
  CHECK(j["layers"][0]["params"]["override"] == true);
}
