#include <doctest.h>

#include <algorithm>

#include "gen.hpp"
#include "ltcd/ltf_analysis.hpp"

using namespace ltcd;

namespace {

std::vector<Int> W(std::vector<long> v) {
  std::vector<Int> w;
  for (long x : v) w.push_back(Int(x));
  return w;
}

// regularity of an explicit vector, empty counts as regular
bool regular_oracle(const std::vector<Int>& w, const Rat& eps) {
  Int s = 0;
  for (const auto& x : w) s += x * x;
  for (const auto& x : w)
    if (Rat(x * x) > eps * eps * Rat(s)) return false;
  return true;
}

std::vector<Int> sorted_desc(std::vector<Int> w) {
  std::stable_sort(w.begin(), w.end(), [](const Int& a, const Int& b) { return abs(a) > abs(b); });
  return w;
}

}  // namespace

TEST_CASE("is_regular examples") {
  CHECK(is_regular(W({1, 1, 1, 1}), Rat(1, 2)).regular);
  const auto r = is_regular(W({2, 1}), Rat(1, 2));
  CHECK_FALSE(r.regular);
  REQUIRE(r.witness);
  CHECK(*r.witness == 0);  // the first coordinate, 4 > 5/4
  CHECK(is_regular(W({1}), Rat(1)).regular);
  CHECK_FALSE(is_regular(W({1}), Rat(1)).witness);
  CHECK_THROWS_AS(is_regular(W({0, 0}), Rat(1, 2)), Error);
}

TEST_CASE("critical_index examples") {
  CHECK(critical_index(W({1, 1, 1}), Rat(1)).h == 1);
  CHECK(critical_index(W({4, 2, 1}), Rat(1, 2)).h == 3);
  std::vector<long> v{8};
  for (int i = 0; i < 64; ++i) v.push_back(1);
  CHECK(critical_index(W(v), Rat(1, 2)).h == 1);
  CHECK_THROWS_AS(critical_index(W({0}), Rat(1, 2)), Error);
}

TEST_CASE("critical index sorts by magnitude, ties by index") {
  const auto r = critical_index(W({1, -5, 3, -3}), Rat(1, 2));
  CHECK(r.order == std::vector<std::size_t>{1, 2, 3, 0});
}

TEST_CASE("property: critical index matches a suffix scan") {
  for (int rep = 0; rep < 300; ++rep) {
    const std::size_t n = static_cast<std::size_t>(gen::uniform(1, 12));
    std::vector<Int> w;
    for (std::size_t i = 0; i < n; ++i) w.push_back(Int(gen::uniform(-20, 20) * (gen::uniform(0, 3) ? 1 : 9)));
    if (std::all_of(w.begin(), w.end(), [](const Int& x) { return x == 0; })) w[0] = 1;
    Rat eps(gen::uniform(1, 9), 10);
    eps.canonicalize();
    const auto res = critical_index(w, eps);
    const auto s = sorted_desc(w);
    // oracle: the least h whose suffix w_{>h} is regular
    std::size_t h = n;
    for (std::size_t k = 1; k <= n; ++k)
      if (regular_oracle(std::vector<Int>(s.begin() + static_cast<long>(k), s.end()), eps)) {
        h = k;
        break;
      }
    CHECK(res.h == h);
    if (res.h > 1) {
      std::vector<Int> prev(s.begin() + static_cast<long>(res.h - 1), s.end());
      CHECK_FALSE(regular_oracle(prev, eps));
    }
  }
}

TEST_CASE("balance examples") {
  Ltf a{W({1, 1}), 0}, b{W({1, 1}), 3}, c{W({3, 4}), 5};
  CHECK(is_t_balanced(a, Rat(1)));
  CHECK_FALSE(is_t_balanced(b, Rat(1)));
  CHECK(is_t_balanced(c, Rat(1)));
  CHECK_FALSE(is_t_balanced(c, Rat(99, 100)));
  CHECK(is_t_balanced_pow(c, Int(1), Rat(0)));
  // 2^(1/2) ||w|| = 5 sqrt 2 >= 7
  Ltf d{W({3, 4}), 7};
  CHECK(is_t_balanced_pow(d, Int(2), Rat(1, 2)));
  Ltf e{W({3, 4}), 8};
  CHECK_FALSE(is_t_balanced_pow(e, Int(2), Rat(1, 2)));
}

TEST_CASE("property: balance is monotone in t") {
  for (int rep = 0; rep < 200; ++rep) {
    Ltf phi = gen::ltf(static_cast<std::size_t>(gen::uniform(1, 6)));
    if (phi.all_zero()) continue;
    Rat t(gen::uniform(0, 20), 4);
    t.canonicalize();
    if (is_t_balanced(phi, t)) {
      CHECK(is_t_balanced(phi, t + Rat(1, 4)));
      CHECK(is_t_balanced(phi, t * 3));
    }
  }
}

TEST_CASE("imbalanced majority value") {
  CHECK(imbalanced_majority_value(Ltf{W({1, 1, 1}), 10}) == -1);
  CHECK(imbalanced_majority_value(Ltf{W({1, 1, 1}), -10}) == 1);
  CHECK_THROWS_AS(imbalanced_majority_value(Ltf{W({1, 1}), 0}), Error);
  const Ltf m8{std::vector<Int>(8, Int(1)), Rat(7, 2)};
  const std::uint64_t acc = acceptance_count(m8);
  const int majority = 2 * acc > 256 ? -1 : 1;
  CHECK(imbalanced_majority_value(m8) == majority);
}

TEST_CASE("property: the returned constant is the enumerated majority when one side dominates") {
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = static_cast<std::size_t>(gen::uniform(1, 10));
    Ltf phi = gen::ltf(n);
    if (phi.threshold == 0 || phi.all_zero()) continue;
    const std::uint64_t acc = acceptance_count(phi);
    const std::uint64_t total = std::uint64_t{1} << n;
    const int sigma = imbalanced_majority_value(phi);
    // closeness to sigma above 1/2 pins sigma down
    const std::uint64_t agree = sigma == -1 ? acc : total - acc;
    if (!is_t_balanced(phi, Rat(1))) CHECK(2 * agree > total);
  }
}

TEST_CASE("norms") {
  CHECK(norm1(W({3, -4, 0})) == 7);
  CHECK(norm2_sq(W({3, -4, 0})) == 25);
}
