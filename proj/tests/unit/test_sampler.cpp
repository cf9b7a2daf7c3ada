#include <doctest.h>

#include <bit>

#include "gen.hpp"
#include "ltcd/sampler.hpp"

using namespace ltcd;

namespace {

const SamplerSpec& tiny() {
  static const SamplerSpec s = desk_sampler_spec(10, 2, 6, 5, Rat(1, 5));
  return s;
}

// codeword bit straight from the generator rows, then addressed by z on S_i
std::uint64_t slow_output(const SamplerSpec& s, std::uint64_t x, std::uint64_t z) {
  std::uint64_t out = 0;
  for (std::size_t i = 0; i < s.m; ++i) {
    std::uint64_t idx = 0, pos = 0;
    for (std::size_t e : s.design.sets[i]) idx |= ((z >> e) & 1) << pos++;
    std::uint64_t bit = 0;
    if (idx < s.code[0].out())
      for (auto v : s.code[0].rows[idx]) bit ^= (x >> v) & 1;
    out |= bit << i;
  }
  return out;
}

}  // namespace

TEST_CASE("asymptotic parameters at n = 2^100") {
  const Int n = Int(1) << 100;
  const SamplerSpec s = derive_sampler_params(n, 1, Rat(1, 100), Rat(1));
  // m = 2, k = n, nbar = n m^6 = 2^106
  CHECK(s.m == 2);
  CHECK(s.ell == 106);
  // (1 - 1/100 * 18) * 106 = 86.92, rounded down to 86
  CHECK(s.alpha == Rat(10, 53));
  CHECK(s.t == 186);
  CHECK(s.rho == Int(1) << 86);
  CHECK(s.eps == Rat(1, 2));
  CHECK(s.delta_code == Rat(1, 16));  // eps / 4m
  CHECK(s.cor_condition);
  // beta = 4/5 pushes alpha past 1/4
  try {
    derive_sampler_params(n, 1, Rat(1, 100), Rat(4, 5));
    FAIL("expected infeasible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::infeasible);
    CHECK(std::string(e.what()).find("alpha") != std::string::npos);
  }
  CHECK_THROWS_AS(derive_sampler_params(n, 1, Rat(1, 100), Rat(3, 4)), Error);
  CHECK_THROWS_AS(derive_sampler_params(n, 1, Rat(1, 5), Rat(1)), Error);
  CHECK_THROWS_AS(derive_sampler_params(Int(1000), 1, Rat(1, 100), Rat(1)), Error);
}

TEST_CASE("output-count exponent factor") {
  CHECK(Rat(5) - Rat(4) * Rat(1) == 1);
  CHECK(Rat(5) - Rat(4) * Rat(4, 5) == Rat(9, 5));
}

TEST_CASE("desk spec shape") {
  const auto& s = tiny();
  CHECK(s.override_mode);
  CHECK(s.t == 9);
  CHECK(s.code_length() == 32);
  CHECK(s.code_depth() == 2);
  CHECK(s.design.sets.size() == 2);
  CHECK_FALSE(s.cor_detail.empty());
  CHECK(s.code_bias == code_bias(s.code, s.n));
  CHECK(s.code_bias < Rat(1, 2));
  CHECK_THROWS_AS(desk_sampler_spec(10, 6, 6, 5, Rat(1, 5)), Error);
  const auto j = s.to_json();
  CHECK(j["design_hash"] == fnv1a(design_to_json(s.design).dump()));
}

TEST_CASE("sample_output matches a slow path") {
  const auto& s = tiny();
  CodewordCache cache(s);
  for (int rep = 0; rep < 100; ++rep) {
    const auto x = static_cast<std::uint64_t>(gen::uniform(0, 1023));
    const auto z = static_cast<std::uint64_t>(gen::uniform(0, 511));
    CHECK(sample_output(x, z, s) == slow_output(s, x, z));
    CHECK(sample_output(cache.get(x), z, s) == slow_output(s, x, z));
  }
  CHECK_THROWS_AS(sample_output(std::uint64_t{0}, std::uint64_t{1} << 9, s), Error);
}

TEST_CASE("outputs depend only on z over the union of the sets") {
  const auto& s = tiny();
  std::uint64_t used = 0;
  for (const auto& set : s.design.sets)
    for (auto e : set) used |= std::uint64_t{1} << e;
  for (int rep = 0; rep < 50; ++rep) {
    const auto x = static_cast<std::uint64_t>(gen::uniform(0, 1023));
    const auto z = static_cast<std::uint64_t>(gen::uniform(0, 511));
    const auto noise = static_cast<std::uint64_t>(gen::uniform(0, 511)) & ~used;
    CHECK(sample_output(x, z, s) == sample_output(x, z ^ noise, s));
  }
}

TEST_CASE("m = 1 reads one codeword coordinate") {
  const SamplerSpec s = desk_sampler_spec(8, 1, 4, 5, Rat(1, 5));
  for (std::uint64_t x : {3ULL, 77ULL, 200ULL}) {
    const Bits cw = encode_with(s.code, x_bits(x, 8));
    for (std::uint64_t z = 0; z < 512; z += 37) CHECK(sample_output(x, z, s) == cw[design_index(z, s.design.sets[0])]);
  }
}

TEST_CASE("histograms") {
  const auto& s = tiny();
  const auto h = sampler_histograms(s, Budget::unlimited(), Exec::parallel);
  CHECK(h == sampler_histograms(s, Budget::unlimited(), Exec::serial));
  for (std::uint64_t x = 0; x < 1024; x += 101) {
    std::uint32_t row[4] = {0, 0, 0, 0};
    for (std::uint64_t z = 0; z < 512; ++z) ++row[slow_output(s, x, z)];
    for (int o = 0; o < 4; ++o) CHECK(h[x * 4 + o] == row[o]);
  }
  CHECK_THROWS_AS(sampler_histograms(s, Budget{1000}), Error);
}

TEST_CASE("verify_sampler") {
  const auto& s = tiny();
  const auto trivial = verify_sampler(s, Rat(1, 2), Rat(1, 4), {0, 0b1111});
  CHECK(trivial.tests[0].bad == 0);
  CHECK(trivial.tests[1].bad == 0);
  const auto tests = random_tests(2, 50, 4);
  const auto rep = verify_sampler(s, Rat(1, 2), Rat(1, 4), tests);
  CHECK(rep.pass);
  CHECK(rep.worst_bad_fraction <= Rat(1, 4));
  // bad counts from first principles for a few tests
  for (std::size_t i = 0; i < 5; ++i) {
    const std::uint64_t T = tests[i];
    std::uint64_t bad = 0;
    for (std::uint64_t x = 0; x < 1024; ++x) {
      std::uint64_t hit = 0;
      for (std::uint64_t z = 0; z < 512; ++z) hit += (T >> slow_output(s, x, z)) & 1;
      const Rat dev = Rat(static_cast<unsigned long>(hit), 512ul) - Rat(std::popcount(T), 4);
      bad += abs(dev) > Rat(1, 2);
    }
    CHECK(rep.tests[i].bad == bad);
  }
  // a tight eps exposes bad inputs
  const auto tight = verify_sampler(s, Rat(1, 1000), Rat(1, 4), adversarial_tests(2));
  CHECK(tight.worst_bad_fraction > 0);
}

TEST_CASE("test families") {
  CHECK(adversarial_tests(2).size() == 16);
  CHECK(adversarial_tests(4).size() == 2 * 16 + 4);
  for (auto t : random_tests(2, 20, 1)) CHECK(t < 16);
  CHECK(random_tests(3, 5, 9) == random_tests(3, 5, 9));
}

TEST_CASE("extractor view") {
  const auto& s = tiny();
  const auto full = check_extractor_equivalence(s, 10);
  // the only flat source of min-entropy n is uniform
  Rat worst = 0;
  for (auto T : adversarial_tests(2)) {
    std::uint64_t hit = 0;
    for (std::uint64_t x = 0; x < 1024; ++x)
      for (std::uint64_t z = 0; z < 512; ++z) hit += (T >> sample_output(x, z, s)) & 1;
    Rat d = Rat(static_cast<unsigned long>(hit), 1024ul * 512) - Rat(std::popcount(T), 4);
    d.canonicalize();
    worst = std::max(worst, Rat(abs(d)));
  }
  CHECK(full.extractor_error == worst);
  CHECK(full.rigorous_cap == 2 * 1023);
  CHECK(full.stated_cap == 1024);
  const auto small = check_extractor_equivalence(s, 6);
  CHECK(small.consistent);
  CHECK(small.worst_bad <= small.rigorous_cap);
  CHECK(small.extractor_error >= full.extractor_error);
  CHECK_THROWS_AS(check_extractor_equivalence(s, 2), Error);
}

TEST_CASE("reduction circuit") {
  const auto& s = tiny();
  for (int v : {1, -1}) {
    const ThresholdCircuit c = ThresholdCircuit::from_ltf(Ltf::constant(2, v));
    const auto rc = build_reduction_circuit(c, s);
    for (std::uint64_t x = 0; x < 1024; x += 7) CHECK(eval_circuit(rc.circuit, point_from_index(x, 10)) == v);
  }
  // AND-like and XOR-like gates on two sampled bits
  for (const Ltf& g : {Ltf{{Int(1), Int(1)}, Rat(1)}, Ltf{{Int(1), Int(-1)}, Rat(0)}, Ltf::majority(2)}) {
    const ThresholdCircuit c = ThresholdCircuit::from_ltf(g);
    const auto rc = build_reduction_circuit(c, s);
    CHECK(rc.circuit.depth() == 5);
    CHECK(rc.circuit.depth() == rc.code_depth + 1 + c.depth() + 1);
    CHECK(rc.accounting_ok);
    CHECK(rc.copies == 512);
    const CompiledCircuit cc(rc.circuit);
    for (std::uint64_t x = 0; x < 1024; ++x) {
      std::uint64_t acc = 0;
      for (std::uint64_t z = 0; z < 512; ++z) acc += eval_circuit(c, point_from_index(slow_output(s, x, z), 2)) == -1;
      const int expect = 2 * acc > 512 ? -1 : 1;
      CHECK(reduction_direct(c, s, x) == expect);
      CHECK(cc.eval_index(x) == expect);
    }
  }
  CHECK_THROWS_AS(build_reduction_circuit(ThresholdCircuit::from_ltf(Ltf::majority(3)), s), Error);
}

TEST_CASE("reduction over a depth-2 circuit") {
  const SamplerSpec s = desk_sampler_spec(8, 3, 5, 5, Rat(1, 5));
  ThresholdCircuit c;
  c.n = 3;
  c.layers = {{Ltf{{Int(1), Int(1), Int(0)}, Rat(1)}, Ltf{{Int(0), Int(1), Int(1)}, Rat(-1)}}, {Ltf::majority(2)}};
  const auto rc = build_reduction_circuit(c, s);
  CHECK(rc.circuit.depth() == 2 + 1 + 2 + 1);
  CHECK(rc.accounting_ok);
  for (std::uint64_t x = 0; x < 256; ++x) CHECK(eval_circuit(rc.circuit, point_from_index(x, 8)) == reduction_direct(c, s, x));
}
