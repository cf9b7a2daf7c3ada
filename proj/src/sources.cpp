#include "ltcd/sources.hpp"

#include <bit>
#include <cmath>
#include <map>

namespace ltcd {

namespace {

constexpr const char* kMod = "sources";

std::uint64_t low_mask(std::size_t bits) { return bits >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << bits) - 1; }

int poly_degree(std::uint64_t p) { return p == 0 ? -1 : 63 - std::countl_zero(p); }

std::uint64_t poly_mod(std::uint64_t a, std::uint64_t g) {
  const int dg = poly_degree(g);
  for (int da = poly_degree(a); da >= dg; da = poly_degree(a)) a ^= g << (da - dg);
  return a;
}

// least m with (n-1) * 2^(k/2) / 2^(m+1) <= delta, compared squared
unsigned aghp_degree(std::size_t n, std::size_t k, const Rat& delta) {
  if (delta <= 0) throw Error(ErrorCode::invalid_argument, kMod, "delta must be positive");
  const Int nm1 = Int(static_cast<unsigned long>(n - 1));
  const Rat lhs = Rat(nm1 * nm1 * (Int(1) << static_cast<unsigned>(k)));
  for (unsigned m = 1; m <= 31; ++m) {
    if (lhs <= delta * delta * Rat(Int(1) << (2 * m + 2))) return m;
  }
  throw Error(ErrorCode::infeasible, kMod, "almost-kwise seed would exceed 62 bits");
}

Int to_mpz(unsigned __int128 v) {
  Int hi = Int(static_cast<unsigned long>(v >> 64));
  Int lo = Int(static_cast<unsigned long>(static_cast<std::uint64_t>(v)));
  return (hi << 64) + lo;
}

std::uint64_t pack(std::span<const std::uint8_t> bits) {
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < bits.size() && i < 64; ++i)
    if (bits[i]) v |= std::uint64_t{1} << i;
  return v;
}

}  // namespace

const char* kind_name(SourceKind k) {
  switch (k) {
    case SourceKind::uniform: return "uniform-exhaustive";
    case SourceKind::almost_kwise: return "almost-kwise";
    case SourceKind::fixed: return "fixed";
    case SourceKind::ltf_fooling: return "ltf-fooling";
  }
  return "unknown";
}

void SeededSource::check_seed(std::span<const std::uint64_t> seed) const {
  if (seed.size() != seed_words())
    throw Error(ErrorCode::length_mismatch, kMod,
                "seed has " + std::to_string(seed.size()) + " words, expected " + std::to_string(seed_words()));
  if (seed_bits_ % 64 != 0 && !seed.empty() && (seed.back() >> (seed_bits_ % 64)) != 0)
    throw Error(ErrorCode::length_mismatch, kMod, "seed has bits beyond the declared seed length");
}

void SeededSource::generate(std::uint64_t seed, std::vector<std::uint8_t>& out) const {
  if (seed_bits_ > 64) throw Error(ErrorCode::length_mismatch, kMod, "seed longer than one word");
  if (seed_bits_ == 0) {
    generate(std::span<const std::uint64_t>{}, out);
    return;
  }
  std::uint64_t w = seed;
  generate(std::span<const std::uint64_t>(&w, 1), out);
}

std::uint64_t SeededSource::word(std::uint64_t seed) const {
  if (out_bits_ > 64) throw Error(ErrorCode::length_mismatch, kMod, "output longer than one word");
  thread_local std::vector<std::uint8_t> buf;
  generate(seed, buf);
  return pack(buf);
}

std::uint64_t SeededSource::seed_count() const {
  if (seed_bits_ >= 63) throw Error(ErrorCode::budget_exceeded, kMod, "seed space not enumerable");
  return std::uint64_t{1} << seed_bits_;
}

void SeededSource::sample(std::mt19937_64& rng, std::vector<std::uint8_t>& out) const {
  std::vector<std::uint64_t> seed(seed_words());
  for (auto& w : seed) w = rng();
  if (!seed.empty() && seed_bits_ % 64) seed.back() &= low_mask(seed_bits_ % 64);
  generate(seed, out);
}

nlohmann::json SeededSource::descriptor() const {
  return {{"kind", kind_name(kind())},
          {"n", out_bits_},
          {"params", params()},
          {"seed_len", seed_bits_},
          {"construction_id", construction_id()}};
}

void UniformSource::generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const {
  check_seed(seed);
  out.resize(out_bits());
  for (std::size_t i = 0; i < out_bits(); ++i) out[i] = (seed[i / 64] >> (i % 64)) & 1;
}

std::uint64_t UniformSource::word(std::uint64_t seed) const {
  if (out_bits() > 64) return SeededSource::word(seed);
  return seed & low_mask(out_bits());
}

void FixedSource::generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const {
  check_seed(seed);
  out = bits_;
}

nlohmann::json FixedSource::params() const {
  std::string s;
  for (auto b : bits_) s += b ? '1' : '0';
  return {{"bits", s}};
}

std::uint64_t gf2_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t poly, unsigned m) {
  std::uint64_t r = 0;
  while (b) {
    if (b & 1) r ^= a;
    b >>= 1;
    a <<= 1;
    if ((a >> m) & 1) a ^= poly;
  }
  return r;
}

bool gf2_irreducible(std::uint64_t poly) {
  const int m = poly_degree(poly);
  if (m < 1) return false;
  for (int d = 1; 2 * d <= m; ++d)
    for (std::uint64_t g = std::uint64_t{1} << d; g < (std::uint64_t{1} << (d + 1)); ++g)
      if (poly_mod(poly, g) == 0) return false;
  return true;
}

std::uint64_t gf2_first_irreducible(unsigned degree) {
  if (degree < 1 || degree > 62) throw Error(ErrorCode::invalid_argument, kMod, "field degree out of range");
  for (std::uint64_t p = (std::uint64_t{1} << degree); p < (std::uint64_t{1} << (degree + 1)); ++p)
    if (gf2_irreducible(p)) return p;
  throw Error(ErrorCode::infeasible, kMod, "no irreducible polynomial");
}

AlmostKwiseSource::AlmostKwiseSource(std::size_t n, std::size_t k, const Rat& delta)
    : SeededSource(n, 2 * aghp_degree(n, std::min(k, n), delta)),
      k_(std::min(k, n)),
      delta_(delta),
      m_(aghp_degree(n, std::min(k, n), delta)),
      poly_(gf2_first_irreducible(m_)) {
  if (n == 0 || k == 0) throw Error(ErrorCode::invalid_argument, kMod, "n and k must be positive");
}

void AlmostKwiseSource::generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const {
  check_seed(seed);
  const std::uint64_t s = seed.empty() ? 0 : seed[0];
  const std::uint64_t mask = low_mask(m_);
  const std::uint64_t a = s & mask, b = (s >> m_) & mask;
  out.resize(out_bits());
  std::uint64_t pw = 1;
  for (std::size_t i = 0; i < out_bits(); ++i) {
    out[i] = std::popcount(pw & b) & 1;
    pw = gf2_mulmod(pw, a, poly_, m_);
  }
}

std::uint64_t AlmostKwiseSource::word(std::uint64_t s) const {
  if (out_bits() > 64) return SeededSource::word(s);
  const std::uint64_t mask = low_mask(m_);
  const std::uint64_t a = s & mask, b = (s >> m_) & mask;
  std::uint64_t pw = 1, v = 0;
  for (std::size_t i = 0; i < out_bits(); ++i) {
    v |= static_cast<std::uint64_t>(std::popcount(pw & b) & 1) << i;
    pw = gf2_mulmod(pw, a, poly_, m_);
  }
  return v;
}

nlohmann::json AlmostKwiseSource::params() const {
  return {{"k", k_}, {"delta", rat_str(delta_)}, {"field_degree", m_}, {"modulus", poly_}};
}

LtfFoolingSource::LtfFoolingSource(std::size_t n, const Rat& eps)
    : SeededSource(n, 2 * aghp_degree(n, n, eps)), eps_(eps), inner_(n, n, eps) {}

void LtfFoolingSource::generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const {
  inner_.generate(seed, out);
}

std::uint64_t LtfFoolingSource::word(std::uint64_t seed) const { return inner_.word(seed); }

nlohmann::json LtfFoolingSource::params() const {
  return {{"eps", rat_str(eps_)}, {"guaranteed", true}, {"inner", inner_.params()}};
}

SourcePtr make_uniform(std::size_t n) { return std::make_shared<UniformSource>(n); }
SourcePtr make_fixed(std::vector<std::uint8_t> bits) { return std::make_shared<FixedSource>(std::move(bits)); }
SourcePtr make_almost_kwise(std::size_t n, std::size_t k, const Rat& delta) {
  return std::make_shared<AlmostKwiseSource>(n, k, delta);
}
SourcePtr make_ltf_fooling(std::size_t n, const Rat& eps) { return std::make_shared<LtfFoolingSource>(n, eps); }

std::vector<std::uint64_t> output_histogram(const SeededSource& src, const Budget& budget, Exec ex) {
  if (src.out_bits() > 26) throw Error(ErrorCode::budget_exceeded, kMod, "output space too large for a histogram");
  const std::uint64_t seeds = src.seed_count();
  budget.charge(seeds, kMod, "output_histogram");
  return kernels::histogram(seeds, std::size_t{1} << src.out_bits(), [&](std::uint64_t s) { return src.word(s); },
                            ex);
}

Rat max_kwise_distance(const SeededSource& src, std::size_t k, const Budget& budget, Exec ex) {
  const std::size_t n = src.out_bits();
  k = std::min(k, n);
  const auto hist = output_histogram(src, budget, ex);
  const std::uint64_t N = src.seed_count();
  std::vector<std::pair<std::uint64_t, std::uint64_t>> support;
  for (std::uint64_t v = 0; v < hist.size(); ++v)
    if (hist[v]) support.emplace_back(v, hist[v]);

  std::vector<std::uint64_t> subsets;
  for (std::size_t s = 1; s <= k; ++s) {
    std::uint64_t m = low_mask(s);
    const std::uint64_t limit = std::uint64_t{1} << n;
    while (m < limit) {
      subsets.push_back(m);
      const std::uint64_t c = m & -m, r = m + c;
      m = (((r ^ m) >> 2) / c) | r;
    }
  }
  budget.charge(sat_mul(subsets.size(), support.size()), kMod, "kwise projections");

  // distance of subset S is num_S / (2 N 2^|S|)
  std::vector<unsigned __int128> num(subsets.size());
  kernels::map_into(
      num,
      [&](std::uint64_t si) {
        const std::uint64_t mask = subsets[si];
        const int s = std::popcount(mask);
        std::vector<std::uint64_t> proj(std::size_t{1} << s, 0);
        for (const auto& [v, c] : support) {
          std::uint64_t key = 0, bit = 0;
          for (std::uint64_t mm = mask; mm; mm &= mm - 1, ++bit)
            key |= ((v >> std::countr_zero(mm)) & 1) << bit;
          proj[key] += c;
        }
        unsigned __int128 acc = 0;
        for (auto c : proj) {
          const unsigned __int128 lhs = static_cast<unsigned __int128>(c) << s;
          acc += lhs > N ? lhs - N : N - lhs;
        }
        return acc;
      },
      ex);
  Rat best = 0;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    const unsigned s = static_cast<unsigned>(std::popcount(subsets[i]));
    Rat d(to_mpz(num[i]), Int(2) * Int(static_cast<unsigned long>(N)) * (Int(1) << s));
    d.canonicalize();
    if (d > best) best = d;
  }
  return best;
}

bool check_kwise(const SeededSource& src, std::size_t k, const Rat& delta, const Budget& budget, Exec ex) {
  return max_kwise_distance(src, k, budget, ex) <= delta;
}

std::vector<bool> SelectionString::live() const {
  if (q == 0 || raw.size() % q) throw Error(ErrorCode::length_mismatch, kMod, "selection length not a multiple of q");
  std::vector<bool> out(raw.size() / q);
  for (std::size_t i = 0; i < out.size(); ++i) {
    bool all = true;
    for (std::size_t j = 0; j < q; ++j) all = all && raw[i * q + j];
    out[i] = all;
  }
  return out;
}

Restriction restriction_from_bits(std::span<const std::uint8_t> y, std::span<const std::uint8_t> z, std::size_t n,
                                  std::size_t q) {
  if (y.size() != q * n) throw Error(ErrorCode::length_mismatch, kMod, "y must have q*n bits");
  if (z.size() != n) throw Error(ErrorCode::length_mismatch, kMod, "z must have n bits");
  SelectionString sel{std::vector<std::uint8_t>(y.begin(), y.end()), q};
  const auto live = sel.live();
  Restriction r = Restriction::identity(n);
  for (std::size_t i = 0; i < n; ++i)
    if (!live[i]) r.a[i] = z[i] ? minus : plus;
  return r;
}

Restriction sample_restriction(const SeededSource& y_source, const SeededSource& z_source, std::size_t n,
                               std::size_t q, std::span<const std::uint64_t> y_seed,
                               std::span<const std::uint64_t> z_seed) {
  if (y_source.out_bits() != q * n) throw Error(ErrorCode::length_mismatch, kMod, "y_source length must be q*n");
  if (z_source.out_bits() != n) throw Error(ErrorCode::length_mismatch, kMod, "z_source length must be n");
  std::vector<std::uint8_t> y, z;
  y_source.generate(y_seed, y);
  z_source.generate(z_seed, z);
  return restriction_from_bits(y, z, n, q);
}

Restriction sample_restriction(const SeededSource& y_source, const SeededSource& z_source, std::size_t n,
                               std::size_t q, std::uint64_t y_seed, std::uint64_t z_seed) {
  if (y_source.out_bits() != q * n) throw Error(ErrorCode::length_mismatch, kMod, "y_source length must be q*n");
  if (z_source.out_bits() != n) throw Error(ErrorCode::length_mismatch, kMod, "z_source length must be n");
  std::vector<std::uint8_t> y, z;
  y_source.generate(y_seed, y);
  z_source.generate(z_seed, z);
  return restriction_from_bits(y, z, n, q);
}

namespace {

Rat prob_gap(std::uint64_t src_hits, std::uint64_t seeds, std::uint64_t unif_hits, std::size_t n) {
  Rat a(Int(static_cast<unsigned long>(src_hits)), Int(static_cast<unsigned long>(seeds)));
  Rat b(Int(static_cast<unsigned long>(unif_hits)), Int(1) << static_cast<unsigned>(n));
  a.canonicalize();
  b.canonicalize();
  return abs(Rat(a - b));
}

}  // namespace

Rat ltf_fooling_gap(const SeededSource& src, const Ltf& phi, const Budget& budget, Exec ex) {
  if (phi.arity() != src.out_bits()) throw Error(ErrorCode::length_mismatch, kMod, "LTF arity vs source length");
  const auto hist = output_histogram(src, budget, ex);
  budget.charge(hist.size(), kMod, "ltf_fooling_gap");
  CompiledCircuit cc(ThresholdCircuit::from_ltf(phi));
  const std::uint64_t src_hits =
      kernels::sum(hist.size(), [&](std::uint64_t v) { return cc.eval_index(v) == -1 ? hist[v] : 0; }, ex);
  const std::uint64_t unif_hits =
      kernels::count_if(hist.size(), [&](std::uint64_t v) { return cc.eval_index(v) == -1; }, ex);
  return prob_gap(src_hits, src.seed_count(), unif_hits, src.out_bits());
}

namespace {

Int weighted_sum(const std::vector<Int>& w, std::uint64_t v) {
  Int s = 0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if ((v >> i) & 1)
      s -= w[i];
    else
      s += w[i];
  }
  return s;
}

}  // namespace

Rat concentration_gap(const SeededSource& src, const std::vector<Int>& w, const Rat& a, const Rat& b,
                      const Budget& budget, Exec ex) {
  if (w.size() != src.out_bits()) throw Error(ErrorCode::length_mismatch, kMod, "weights vs source length");
  const auto hist = output_histogram(src, budget, ex);
  budget.charge(hist.size(), kMod, "concentration_gap");
  std::uint64_t src_hits = 0, unif_hits = 0;
  for (std::uint64_t v = 0; v < hist.size(); ++v) {
    const Rat s(weighted_sum(w, v));
    if (s >= a && s <= b) {
      ++unif_hits;
      src_hits += hist[v];
    }
  }
  return prob_gap(src_hits, src.seed_count(), unif_hits, src.out_bits());
}

ConcentrationProfile concentration_profile(const std::vector<std::uint64_t>& hist, std::uint64_t seeds,
                                           const std::vector<Int>& w) {
  const std::size_t n = w.size();
  if (hist.size() != (std::size_t{1} << n)) throw Error(ErrorCode::length_mismatch, kMod, "histogram size");
  std::map<Int, std::pair<std::uint64_t, std::uint64_t>> by_sum;  // sum -> (source, uniform)
  for (std::uint64_t v = 0; v < hist.size(); ++v) {
    auto& e = by_sum[weighted_sum(w, v)];
    e.first += hist[v];
    e.second += 1;
  }
  // D_j = F_src(s_j) - F_unif(s_j), scaled by N * 2^n; D_0 = 0 for the empty prefix
  const Int N = Int(static_cast<unsigned long>(seeds));
  const Int U = Int(1) << static_cast<unsigned>(n);
  Int cs = 0, cu = 0, dmax = 0, dmin = 0, amax = 0;
  for (const auto& [s, c] : by_sum) {
    cs += Int(static_cast<unsigned long>(c.first));
    cu += Int(static_cast<unsigned long>(c.second));
    Int d = cs * U - cu * N;
    if (d > dmax) dmax = d;
    if (d < dmin) dmin = d;
    if (abs(d) > amax) amax = abs(d);
  }
  ConcentrationProfile p;
  p.achievable_sums = by_sum.size();
  p.max_ltf_gap = Rat(amax, N * U);
  p.max_interval_gap = Rat(Int(dmax - dmin), N * U);
  p.max_ltf_gap.canonicalize();
  p.max_interval_gap.canonicalize();
  return p;
}

ConcentrationProfile concentration_profile(const SeededSource& src, const std::vector<Int>& w,
                                           const Budget& budget) {
  return concentration_profile(output_histogram(src, budget), src.seed_count(), w);
}

TailCheck tail_check(const AlmostKwiseSource& y, std::size_t q, const Rat& zeta, const Budget& budget) {
  if (q == 0 || y.out_bits() % q) throw Error(ErrorCode::length_mismatch, kMod, "y length must be a multiple of q");
  TailCheck tc;
  tc.q = q;
  tc.n = y.out_bits() / q;
  tc.t = y.k() / q;
  if (tc.t < 4 || tc.t % 2) throw Error(ErrorCode::invalid_argument, kMod, "tail bound needs even t >= 4");
  const std::uint64_t seeds = y.seed_count();
  budget.charge(seeds, kMod, "tail_check");
  const std::size_t n = tc.n;
  const std::uint64_t block = low_mask(q);
  auto hist = kernels::histogram(
      seeds, n + 1,
      [&](std::uint64_t s) {
        const std::uint64_t v = y.word(s);
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < n; ++i) cnt += ((v >> (i * q)) & block) == block;
        return cnt;
      },
      Exec::parallel);
  Int total = 0;
  for (std::size_t s = 0; s <= n; ++s) total += Int(static_cast<unsigned long>(hist[s])) * Int(static_cast<unsigned long>(s));
  const Rat N(Int(static_cast<unsigned long>(seeds)));
  tc.mu = Rat(total) / (N * Rat(static_cast<unsigned long>(n)));
  tc.mu.canonicalize();
  std::uint64_t bad = 0;
  for (std::size_t s = 0; s <= n; ++s) {
    Rat dev = Rat(static_cast<unsigned long>(s)) / Rat(static_cast<unsigned long>(n)) - tc.mu;
    if (abs(dev) >= zeta) bad += hist[s];
  }
  tc.empirical = Rat(Int(static_cast<unsigned long>(bad))) / N;
  tc.empirical.canonicalize();
  const double t = static_cast<double>(tc.t), dn = static_cast<double>(n), mu = tc.mu.get_d(), z = zeta.get_d();
  tc.bound = 8.0 * std::pow((t * mu * dn + t * t) / (z * z * dn * dn), t / 2) + std::pow(2.0 * dn, t) * y.delta().get_d();
  return tc;
}

std::size_t default_kwise_k(std::size_t q) { return 4 * q; }

Rat default_kwise_delta(std::size_t n) {
  Int n4;
  mpz_ui_pow_ui(n4.get_mpz_t(), n, 4);
  return Rat(Int(1), n4);
}

}  // namespace ltcd
