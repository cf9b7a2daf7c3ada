#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "ltcd/circuit.hpp"

namespace ltcd {

enum class SourceKind { uniform, almost_kwise, fixed, ltf_fooling };
const char* kind_name(SourceKind k);

// Deterministic map from a seed (bit string, packed LSB-first into 64-bit
// words) to an output bit string. Output bit b is read as the sign (-1)^b.
class SeededSource {
 public:
  virtual ~SeededSource() = default;
  virtual SourceKind kind() const = 0;
  std::size_t out_bits() const { return out_bits_; }
  std::size_t seed_bits() const { return seed_bits_; }
  std::size_t seed_words() const { return (seed_bits_ + 63) / 64; }

  virtual void generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const = 0;
  void generate(std::uint64_t seed, std::vector<std::uint8_t>& out) const;
  // packed output; needs out_bits <= 64 and seed_bits <= 64
  virtual std::uint64_t word(std::uint64_t seed) const;
  // 2^seed_bits, throws when not enumerable
  std::uint64_t seed_count() const;
  // draw a uniformly random seed and generate
  void sample(std::mt19937_64& rng, std::vector<std::uint8_t>& out) const;

  virtual nlohmann::json params() const { return nlohmann::json::object(); }
  virtual std::string construction_id() const = 0;
  nlohmann::json descriptor() const;

 protected:
  SeededSource(std::size_t out_bits, std::size_t seed_bits) : out_bits_(out_bits), seed_bits_(seed_bits) {}
  void check_seed(std::span<const std::uint64_t> seed) const;

 private:
  std::size_t out_bits_;
  std::size_t seed_bits_;
};

using SourcePtr = std::shared_ptr<const SeededSource>;

// seed length = output length, generator = identity
class UniformSource : public SeededSource {
 public:
  explicit UniformSource(std::size_t n) : SeededSource(n, n) {}
  SourceKind kind() const override { return SourceKind::uniform; }
  void generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const override;
  std::uint64_t word(std::uint64_t seed) const override;
  std::string construction_id() const override { return "identity"; }
};

// Output ignores the seed.
class FixedSource : public SeededSource {
 public:
  explicit FixedSource(std::vector<std::uint8_t> bits) : SeededSource(bits.size(), 0), bits_(std::move(bits)) {}
  SourceKind kind() const override { return SourceKind::fixed; }
  void generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const override;
  std::string construction_id() const override { return "constant"; }
  nlohmann::json params() const override;

 private:
  std::vector<std::uint8_t> bits_;
};

// Powering construction over GF(2^m): seed (a, b), bit i = <a^i, b> mod 2.
// Every nonempty parity has bias <= (n-1)/2^m, so each k-bit projection is
// within 2^(k/2-1) * (n-1)/2^m of uniform. m is the least value meeting delta.
class AlmostKwiseSource : public SeededSource {
 public:
  AlmostKwiseSource(std::size_t n, std::size_t k, const Rat& delta);
  SourceKind kind() const override { return SourceKind::almost_kwise; }
  void generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const override;
  std::uint64_t word(std::uint64_t seed) const override;
  std::string construction_id() const override { return "aghp-powering-gf2m"; }
  nlohmann::json params() const override;

  std::size_t k() const { return k_; }
  const Rat& delta() const { return delta_; }
  unsigned field_degree() const { return m_; }
  std::uint64_t modulus() const { return poly_; }

 private:
  std::size_t k_;
  Rat delta_;
  unsigned m_;
  std::uint64_t poly_;
};

// LTF-fooling interface backed by the powering construction with full
// independence k = n: statistical distance to uniform is at most eps, so the
// fooling error eps is guaranteed rather than measured.
class LtfFoolingSource : public SeededSource {
 public:
  LtfFoolingSource(std::size_t n, const Rat& eps);
  SourceKind kind() const override { return SourceKind::ltf_fooling; }
  void generate(std::span<const std::uint64_t> seed, std::vector<std::uint8_t>& out) const override;
  std::uint64_t word(std::uint64_t seed) const override;
  std::string construction_id() const override { return "aghp-full-independence"; }
  nlohmann::json params() const override;
  const Rat& eps() const { return eps_; }

 private:
  Rat eps_;
  AlmostKwiseSource inner_;
};

SourcePtr make_uniform(std::size_t n);
SourcePtr make_fixed(std::vector<std::uint8_t> bits);
SourcePtr make_almost_kwise(std::size_t n, std::size_t k, const Rat& delta);
SourcePtr make_ltf_fooling(std::size_t n, const Rat& eps);

// GF(2) helpers, exposed for tests
bool gf2_irreducible(std::uint64_t poly);
std::uint64_t gf2_first_irreducible(unsigned degree);
std::uint64_t gf2_mulmod(std::uint64_t a, std::uint64_t b, std::uint64_t poly, unsigned m);

// Exact output distribution: hist[v] = #seeds whose packed output is v.
std::vector<std::uint64_t> output_histogram(const SeededSource& src, const Budget& budget = {},
                                            Exec ex = Exec::parallel);

// true iff every projection onto <= k coordinates is delta-close to uniform
bool check_kwise(const SeededSource& src, std::size_t k, const Rat& delta, const Budget& budget = {},
                 Exec ex = Exec::parallel);
// largest statistical distance over projections of size <= k
Rat max_kwise_distance(const SeededSource& src, std::size_t k, const Budget& budget = {},
                       Exec ex = Exec::parallel);

struct SelectionString {
  std::vector<std::uint8_t> raw;  // q*n bits
  std::size_t q = 1;
  // variable i live iff bits [q*i, q*i+q) are all ones
  std::vector<bool> live() const;
};

Restriction restriction_from_bits(std::span<const std::uint8_t> y, std::span<const std::uint8_t> z, std::size_t n,
                                  std::size_t q);
Restriction sample_restriction(const SeededSource& y_source, const SeededSource& z_source, std::size_t n,
                               std::size_t q, std::span<const std::uint64_t> y_seed,
                               std::span<const std::uint64_t> z_seed);
Restriction sample_restriction(const SeededSource& y_source, const SeededSource& z_source, std::size_t n,
                               std::size_t q, std::uint64_t y_seed, std::uint64_t z_seed);

// |Pr_src[phi = -1] - Pr_uniform[phi = -1]|
Rat ltf_fooling_gap(const SeededSource& src, const Ltf& phi, const Budget& budget = {}, Exec ex = Exec::parallel);
// |Pr_src[<w,z> in [a,b]] - Pr_uniform[<w,z> in [a,b]]|
Rat concentration_gap(const SeededSource& src, const std::vector<Int>& w, const Rat& a, const Rat& b,
                      const Budget& budget = {}, Exec ex = Exec::parallel);

// Worst gaps for one weight vector, over every threshold and every interval
// with achievable-sum endpoints.
struct ConcentrationProfile {
  Rat max_ltf_gap;
  Rat max_interval_gap;
  std::size_t achievable_sums = 0;
};
ConcentrationProfile concentration_profile(const std::vector<std::uint64_t>& hist, std::uint64_t seeds,
                                           const std::vector<Int>& w);
ConcentrationProfile concentration_profile(const SeededSource& src, const std::vector<Int>& w,
                                           const Budget& budget = {});

// Tail of the average of block-AND bits X_i = AND(y block i), exact over all
// seeds, against the almost-t-wise tail bound.
struct TailCheck {
  std::size_t n = 0, q = 0, t = 0;
  Rat mu;
  Rat empirical;  // Pr[|avg - mu| >= zeta]
  double bound = 0;
};
TailCheck tail_check(const AlmostKwiseSource& y, std::size_t q, const Rat& zeta, const Budget& budget = {});

// default (k, delta) for a selection source with keep-probability p = 2^-q
std::size_t default_kwise_k(std::size_t q);
Rat default_kwise_delta(std::size_t n);

}  // namespace ltcd
