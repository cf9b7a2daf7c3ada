#include <doctest.h>

#include <algorithm>

#include "ltcd/designs.hpp"

using namespace ltcd;

namespace {

using Set = std::vector<std::size_t>;

std::size_t inter(const Set& a, const Set& b) {
  std::size_t c = 0;
  for (auto x : a) c += std::count(b.begin(), b.end(), x);
  return c;
}

// slow reference: list every one-per-block selection, sort, take the first
// that satisfies the prefix condition
std::vector<Set> reference_design(std::size_t m, std::size_t ell, std::size_t t, long rho) {
  const std::size_t pairs = t - ell;
  std::vector<Set> all;
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pairs); ++mask) {
    Set s;
    for (std::size_t j = 0; j < pairs; ++j) s.push_back(2 * j + ((mask >> j) & 1));
    for (std::size_t e = 2 * pairs; e < t; ++e) s.push_back(e);
    all.push_back(s);
  }
  std::sort(all.begin(), all.end());
  std::vector<Set> out;
  for (std::size_t i = 0; i < m; ++i) {
    for (const auto& s : all) {
      long sum = 0;
      for (const auto& prev : out) sum += 1L << inter(s, prev);
      if (sum <= static_cast<long>(i) * rho) {
        out.push_back(s);
        break;
      }
    }
    if (out.size() != i + 1) return {};
  }
  return out;
}

}  // namespace

TEST_CASE("universe and rho") {
  CHECK(design_universe(5, Rat(1, 5)) == 9);
  CHECK(design_universe(8, Rat(1, 8)) == 12);
  CHECK(design_universe(10, Rat(1, 8)) == 15);
  CHECK(design_rho(5, Rat(1, 5)) == 16);
  CHECK(design_rho(8, Rat(1, 8)) == 128);
  CHECK_THROWS_AS(design_rho(5, Rat(1, 8)), Error);
}

TEST_CASE("m = 1 is the first selection") {
  const WeakDesign d = build_weak_design(1, 5, Rat(1, 5));
  CHECK(d.sets == std::vector<Set>{{0, 2, 4, 6, 8}});
  CHECK(verify_weak_design(d));
}

TEST_CASE("m = 2, ell = 5, alpha = 1/5") {
  const WeakDesign d = build_weak_design(2, 5, Rat(1, 5));
  CHECK(d.t == 9);
  CHECK(d.rho == 16);
  REQUIRE(d.sets.size() == 2);
  CHECK(inter(d.sets[0], d.sets[1]) <= 4);
  CHECK(d.sets[1] == Set{0, 2, 4, 7, 8});
  CHECK(verify_weak_design(d));
}

TEST_CASE("m = 8, ell = 5, alpha = 1/5 matches the slow reference") {
  const WeakDesign d = build_weak_design(8, 5, Rat(1, 5));
  CHECK(d.sets == reference_design(8, 5, 9, 16));
  CHECK(verify_weak_design(d));
  for (std::size_t i = 0; i < 8; ++i) {
    long sum = 0;
    for (std::size_t j = 0; j < i; ++j) sum += 1L << inter(d.sets[i], d.sets[j]);
    CHECK(d.prefix_sums[i] == sum);
    CHECK(sum <= static_cast<long>(i) * 16);
  }
}

TEST_CASE("verifier rejects") {
  WeakDesign d = build_weak_design(2, 5, Rat(1, 5));
  // two identical sets: 2^5 = 32 > 1 * 16
  d.sets[1] = d.sets[0];
  CHECK_FALSE(verify_weak_design(d));
  d = build_weak_design(2, 5, Rat(1, 5));
  d.sets[1].pop_back();
  CHECK_FALSE(verify_weak_design(d));
  d = build_weak_design(2, 5, Rat(1, 5));
  d.sets[1].back() = 9;  // outside [t]
  CHECK_FALSE(verify_weak_design(d));
  // m = 1, any legal set
  WeakDesign one = build_weak_design(1, 5, Rat(1, 5));
  one.sets[0] = {1, 3, 5, 7, 8};
  one.prefix_sums = design_prefix_sums(one.sets);
  CHECK(verify_weak_design(one));
}

TEST_CASE("infeasible parameters") {
  CHECK_THROWS_AS(build_weak_design(2, 5, Rat(1, 4)), Error);
  CHECK_THROWS_AS(build_weak_design(2, 5, Rat(0)), Error);
  CHECK_THROWS_AS(build_weak_design(2, 5, Rat(1, 8)), Error);
}

TEST_CASE("property: every feasible grid point builds, verifies, and matches the reference") {
  int built = 0;
  for (std::size_t ell : {4, 5, 8, 10})
    for (const Rat& alpha : {Rat(1, 5), Rat(1, 8)})
      for (std::size_t m : {1, 2, 8, 64}) {
        Rat e = (Rat(1) - alpha) * Rat(static_cast<unsigned long>(ell));
        e.canonicalize();
        if (e.get_den() != 1) {
          CHECK_THROWS_AS(build_weak_design(m, ell, alpha), Error);
          continue;
        }
        const WeakDesign d = build_weak_design(m, ell, alpha);
        CHECK(verify_weak_design(d));
        CHECK(d.sets == reference_design(m, ell, d.t, d.rho.get_si()));
        CHECK(d.sets == build_weak_design(m, ell, alpha, Exec::serial).sets);
        ++built;
      }
  CHECK(built == 12);
}

TEST_CASE("serialization keeps the certificate") {
  const WeakDesign d = build_weak_design(8, 8, Rat(1, 8));
  const auto j = design_to_json(d);
  const WeakDesign back = design_from_json(j);
  CHECK(back.sets == d.sets);
  CHECK(back.rho == d.rho);
  CHECK(back.t == d.t);
  CHECK(design_prefix_sums(back.sets) == d.prefix_sums);
  CHECK(verify_weak_design(back));
}
