#include "ltcd/instances.hpp"

#include <algorithm>
#include <random>
#include <set>

namespace ltcd {

namespace {

constexpr const char* kMod = "instances";

Ltf pass_through() { return Ltf{{Int(1)}, Rat(0)}; }

}  // namespace

ThresholdCircuit constant_circuit(std::size_t n, int value) {
  ThresholdCircuit c;
  c.n = n;
  c.layers = {{Ltf::constant(n, value)}, {pass_through()}};
  return c;
}

ThresholdCircuit and_like_circuit(std::size_t n) { return point_exception_circuit(n, {0}); }

ThresholdCircuit point_exception_circuit(std::size_t n, const std::vector<std::uint64_t>& points, bool negated) {
  if (n == 0 || n > 62) throw Error(ErrorCode::invalid_argument, kMod, "arity outside [1, 62]");
  if (points.empty()) throw Error(ErrorCode::invalid_argument, kMod, "need at least one point");
  ThresholdCircuit c;
  c.n = n;
  std::vector<Ltf> bottom;
  // +1 iff x equals the point: <p, x> = n, otherwise <p, x> <= n - 2
  for (auto pt : points) {
    Ltf g;
    for (std::size_t i = 0; i < n; ++i) g.weights.push_back(Int(((pt >> i) & 1) ? -1 : 1));
    g.threshold = Rat(static_cast<long>(n) - 1);
    bottom.push_back(std::move(g));
  }
  const long k = static_cast<long>(points.size());
  Ltf top;
  top.weights.assign(points.size(), Int(negated ? -1 : 1));
  // some detector fires  <=>  sum >= 2 - k
  top.threshold = negated ? Rat(k - 1) : Rat(1 - k);
  c.layers = {std::move(bottom), {std::move(top)}};
  return c;
}

std::vector<std::uint64_t> random_points(std::size_t n, std::size_t k, std::uint64_t seed) {
  if (n > 62) throw Error(ErrorCode::invalid_argument, kMod, "arity too large");
  if (k > (std::uint64_t{1} << n)) throw Error(ErrorCode::invalid_argument, kMod, "more points than the cube");
  std::mt19937_64 rng(seed);
  std::set<std::uint64_t> pts;
  while (pts.size() < k) pts.insert(rng() & ((std::uint64_t{1} << n) - 1));
  return {pts.begin(), pts.end()};
}

ThresholdCircuit majority_tower(std::size_t n, std::size_t block) {
  if (block == 0 || n == 0) throw Error(ErrorCode::invalid_argument, kMod, "empty tower");
  ThresholdCircuit c;
  c.n = n;
  std::vector<Ltf> bottom;
  for (std::size_t lo = 0; lo < n; lo += block) {
    Ltf g{std::vector<Int>(n, Int(0)), Rat(0)};
    for (std::size_t i = lo; i < std::min(n, lo + block); ++i) g.weights[i] = 1;
    bottom.push_back(std::move(g));
  }
  const std::size_t m = bottom.size();
  c.layers = {std::move(bottom), {Ltf::majority(m)}};
  return c;
}

Ltf geometric_ltf(std::size_t n, unsigned ratio, const Rat& theta) {
  if (ratio < 2) throw Error(ErrorCode::invalid_argument, kMod, "ratio must be >= 2");
  Ltf g;
  for (std::size_t i = 0; i < n; ++i) {
    Int w;
    mpz_ui_pow_ui(w.get_mpz_t(), ratio, n - 1 - i);
    g.weights.push_back(w);
  }
  g.threshold = theta;
  return g;
}

ThresholdCircuit random_depth2(std::size_t n, std::size_t gates, std::size_t fanin_lo, std::size_t fanin_hi,
                               int wmax, std::uint64_t seed) {
  if (n == 0 || gates == 0 || fanin_lo == 0 || fanin_lo > fanin_hi || fanin_hi > n || wmax < 1)
    throw Error(ErrorCode::invalid_argument, kMod, "bad random circuit shape");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> fan(fanin_lo, fanin_hi);
  std::uniform_int_distribution<int> wd(1, wmax);
  std::bernoulli_distribution neg(0.5);
  ThresholdCircuit c;
  c.n = n;
  std::vector<Ltf> bottom;
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  for (std::size_t g = 0; g < gates; ++g) {
    std::shuffle(idx.begin(), idx.end(), rng);
    const std::size_t f = fan(rng);
    Ltf h{std::vector<Int>(n, Int(0)), Rat(0)};
    long mass = 0;
    for (std::size_t j = 0; j < f; ++j) {
      const int w = wd(rng);
      h.weights[idx[j]] = neg(rng) ? -w : w;
      mass += w;
    }
    std::uniform_int_distribution<long> th(-mass, mass);
    h.threshold = Rat(2 * th(rng) + 1, 2);
    bottom.push_back(std::move(h));
  }
  Ltf top{std::vector<Int>(gates, Int(0)), Rat(0)};
  long mass = 0;
  for (auto& w : top.weights) {
    const int v = wd(rng);
    w = neg(rng) ? -v : v;
    mass += v;
  }
  std::uniform_int_distribution<long> th(-mass / 2, mass / 2);
  top.threshold = Rat(2 * th(rng) + 1, 2);
  c.layers = {std::move(bottom), {std::move(top)}};
  return c;
}

ThresholdCircuit negate_circuit(const ThresholdCircuit& c) {
  c.validate(true);
  // the top sum v is an integer, so v < t  <=>  -v >= -t + 1/(2 den t)
  ThresholdCircuit out = c;
  Ltf& top = out.layers.back()[0];
  Ltf neg;
  for (const auto& w : top.weights) neg.weights.push_back(-w);
  const Int den = top.threshold.get_den();
  neg.threshold = -top.threshold + Rat(Int(1), Int(2) * den);
  neg.threshold.canonicalize();
  top = std::move(neg);
  return out;
}

nlohmann::json Instance::to_json() const {
  nlohmann::json j = {{"family", family}, {"circuit", circuit_to_json(circuit)}, {"acceptance_count", acceptance},
                      {"n", circuit.n}};
  if (declared_exceptions) j["declared_exceptions"] = *declared_exceptions;
  return j;
}

Instance make_instance(const std::string& family, ThresholdCircuit c, std::optional<std::uint64_t> declared) {
  Instance in;
  in.family = family;
  in.acceptance = acceptance_count(c, Budget::unlimited());
  in.circuit = std::move(c);
  in.declared_exceptions = declared;
  return in;
}

std::vector<Instance> generate_family(const std::string& family, std::size_t n, std::size_t count,
                                      std::uint64_t seed, std::size_t param) {
  std::vector<Instance> out;
  for (std::size_t i = 0; i < count; ++i) {
    const std::uint64_t s = split_seed(seed, i);
    if (family == "constant") {
      out.push_back(make_instance(family, constant_circuit(n, i % 2 ? 1 : -1), 0));
    } else if (family == "and-like") {
      out.push_back(make_instance(family, and_like_circuit(n), 1));
    } else if (family == "near-constant") {
      const std::size_t k = param ? param : 1 + (s % 3);
      const auto pts = random_points(n, k, s);
      out.push_back(make_instance(family, point_exception_circuit(n, pts, i % 2 == 1), k));
    } else if (family == "majority-tower") {
      out.push_back(make_instance(family, majority_tower(n, param ? param : 3)));
    } else if (family == "geometric") {
      std::mt19937_64 rng(s);
      const Ltf g = geometric_ltf(n, static_cast<unsigned>(param ? param : 2), Rat(static_cast<long>(rng() % 7) - 3, 2));
      out.push_back(make_instance(family, ThresholdCircuit::from_ltf(g)));
    } else if (family == "random") {
      const std::size_t gates = param ? param : std::max<std::size_t>(2, n / 3);
      out.push_back(make_instance(family, random_depth2(n, gates, 1, std::min<std::size_t>(n, 4), 3, s)));
    } else {
      throw Error(ErrorCode::invalid_argument, kMod, "unknown family " + family);
    }
  }
  return out;
}

}  // namespace ltcd
