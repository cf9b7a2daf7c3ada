#include "ltcd/designs.hpp"

#include <algorithm>
#include <bit>
#include <climits>

namespace ltcd {

namespace {

constexpr const char* kMod = "designs";

std::size_t intersection(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
  std::size_t i = 0, j = 0, c = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++c;
      ++i;
      ++j;
    }
  }
  return c;
}

// candidate c picks, for pair block j, element 2j + (bit of c); block 0 is
// the most significant bit so ascending c is lexicographic order
std::vector<std::size_t> candidate(std::uint64_t c, std::size_t ell, std::size_t t) {
  const std::size_t pairs = t - ell;
  std::vector<std::size_t> s;
  s.reserve(ell);
  for (std::size_t j = 0; j < pairs; ++j) s.push_back(2 * j + ((c >> (pairs - 1 - j)) & 1));
  for (std::size_t e = 2 * pairs; e < t; ++e) s.push_back(e);
  return s;
}

}  // namespace

std::size_t design_universe(std::size_t ell, const Rat& alpha) {
  Rat v = (Rat(1) + Rat(4) * alpha) * Rat(static_cast<unsigned long>(ell));
  Int q;
  mpz_cdiv_q(q.get_mpz_t(), v.get_num().get_mpz_t(), v.get_den().get_mpz_t());
  return q.get_ui();
}

Int design_rho(std::size_t ell, const Rat& alpha) {
  Rat e = (Rat(1) - alpha) * Rat(static_cast<unsigned long>(ell));
  e.canonicalize();
  if (e.get_den() != 1 || e < 0)
    throw Error(ErrorCode::infeasible, kMod, "(1-alpha)*ell = " + rat_str(e) + " is not an integer");
  return Int(1) << static_cast<unsigned>(e.get_num().get_ui());
}

std::vector<Int> design_prefix_sums(const std::vector<std::vector<std::size_t>>& sets) {
  std::vector<Int> out(sets.size(), Int(0));
  for (std::size_t i = 0; i < sets.size(); ++i)
    for (std::size_t j = 0; j < i; ++j) out[i] += Int(1) << static_cast<unsigned>(intersection(sets[i], sets[j]));
  return out;
}

WeakDesign build_weak_design(std::size_t m, std::size_t ell, const Rat& alpha, Exec ex) {
  if (!(alpha > 0 && alpha < Rat(1, 4))) throw Error(ErrorCode::infeasible, kMod, "alpha must lie in (0, 1/4)");
  if (m == 0 || ell == 0) throw Error(ErrorCode::invalid_argument, kMod, "m and ell must be positive");
  WeakDesign d;
  d.m = m;
  d.ell = ell;
  d.alpha = alpha;
  d.t = design_universe(ell, alpha);
  d.rho = design_rho(ell, alpha);
  if (d.t > 2 * ell) throw Error(ErrorCode::infeasible, kMod, "t > 2*ell");
  if (d.t - ell > 40) throw Error(ErrorCode::budget_exceeded, kMod, "too many candidate selections");
  const std::uint64_t candidates = std::uint64_t{1} << (d.t - ell);

  for (std::size_t i = 0; i < m; ++i) {
    const Int cap = d.rho * Int(static_cast<unsigned long>(i));
    auto ok = [&](std::uint64_t c) {
      const auto s = candidate(c, ell, d.t);
      Int sum = 0;
      for (std::size_t j = 0; j < i; ++j) {
        sum += Int(1) << static_cast<unsigned>(intersection(s, d.sets[j]));
        if (sum > cap) return false;
      }
      return true;
    };
    std::uint64_t best = UINT64_MAX;
    const std::int64_t sc = static_cast<std::int64_t>(candidates);
    if (ex == Exec::parallel) {
#pragma omp parallel for reduction(min : best) schedule(static)
      for (std::int64_t c = 0; c < sc; ++c)
        if (static_cast<std::uint64_t>(c) < best && ok(static_cast<std::uint64_t>(c))) best = c;
    } else {
      for (std::uint64_t c = 0; c < candidates; ++c)
        if (ok(c)) {
          best = c;
          break;
        }
    }
    if (best == UINT64_MAX)
      throw Error(ErrorCode::infeasible, kMod, "no selection satisfies the prefix bound at i=" + std::to_string(i + 1));
    d.sets.push_back(candidate(best, ell, d.t));
  }
  d.prefix_sums = design_prefix_sums(d.sets);
  return d;
}

bool verify_weak_design(const WeakDesign& d) {
  if (d.sets.size() != d.m) return false;
  for (const auto& s : d.sets) {
    if (s.size() != d.ell) return false;
    if (!std::is_sorted(s.begin(), s.end()) || std::adjacent_find(s.begin(), s.end()) != s.end()) return false;
    if (!s.empty() && s.back() >= d.t) return false;
  }
  const auto sums = design_prefix_sums(d.sets);
  for (std::size_t i = 0; i < sums.size(); ++i)
    if (sums[i] > d.rho * Int(static_cast<unsigned long>(i))) return false;
  if (!d.prefix_sums.empty() && d.prefix_sums != sums) return false;
  return true;
}

nlohmann::json design_to_json(const WeakDesign& d) {
  nlohmann::json sums = nlohmann::json::array();
  for (const auto& s : d.prefix_sums) sums.push_back(s.get_str());
  return {{"m", d.m},     {"ell", d.ell},         {"t", d.t},          {"alpha", rat_str(d.alpha)},
          {"rho", d.rho.get_str()}, {"sets", d.sets}, {"prefix_sums", sums}};
}

WeakDesign design_from_json(const nlohmann::json& j) {
  WeakDesign d;
  try {
    d.m = j.at("m").get<std::size_t>();
    d.ell = j.at("ell").get<std::size_t>();
    d.t = j.at("t").get<std::size_t>();
    d.alpha = parse_rat(j.at("alpha").get<std::string>());
    d.rho = parse_int(j.at("rho").get<std::string>());
    d.sets = j.at("sets").get<std::vector<std::vector<std::size_t>>>();
    if (j.contains("prefix_sums"))
      for (const auto& s : j.at("prefix_sums")) d.prefix_sums.push_back(parse_int(s.get<std::string>()));
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::parse, kMod, e.what());
  }
  return d;
}

}  // namespace ltcd
