#include "ltcd/codes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Dense>

namespace ltcd {

namespace {

constexpr const char* kMod = "codes";

std::uint64_t ipow(std::uint64_t b, std::size_t e) {
  std::uint64_t r = 1;
  for (std::size_t i = 0; i < e; ++i) r = sat_mul(r, b);
  return r;
}

std::vector<std::uint32_t> cancel_pairs(std::vector<std::uint32_t> v) {
  std::sort(v.begin(), v.end());
  std::vector<std::uint32_t> out;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    if ((j - i) % 2) out.push_back(v[i]);
    i = j;
  }
  return out;
}

}  // namespace

Bits LinearMap::apply(const Bits& x) const {
  if (x.size() != in) throw Error(ErrorCode::length_mismatch, kMod, "linear map input length");
  Bits y(rows.size(), 0);
  for (std::size_t j = 0; j < rows.size(); ++j) {
    std::uint8_t b = 0;
    for (auto i : rows[j]) b ^= x[i];
    y[j] = b;
  }
  return y;
}

LinearMap LinearMap::then(const LinearMap& next) const {
  if (next.in != out()) throw Error(ErrorCode::length_mismatch, kMod, "composed maps disagree on width");
  LinearMap m;
  m.in = in;
  m.rows.reserve(next.rows.size());
  for (const auto& r : next.rows) {
    std::vector<std::uint32_t> acc;
    for (auto k : r) acc.insert(acc.end(), rows[k].begin(), rows[k].end());
    m.rows.push_back(cancel_pairs(std::move(acc)));
  }
  return m;
}

std::size_t LinearMap::max_support() const {
  std::size_t k = 0;
  for (const auto& r : rows) k = std::max(k, r.size());
  return k;
}

Bits LinearCode::encode(const Bits& x) const {
  if (x.size() != r) throw Error(ErrorCode::length_mismatch, kMod, "message length");
  std::uint64_t v = 0;
  for (std::size_t i = 0; i < r; ++i)
    if (x[i]) v |= std::uint64_t{1} << i;
  Bits y(rbar);
  for (std::size_t j = 0; j < rbar; ++j) y[j] = std::popcount(v & rows[j]) & 1;
  return y;
}

LinearMap LinearCode::map() const {
  LinearMap m;
  m.in = r;
  for (auto row : rows) {
    std::vector<std::uint32_t> s;
    for (std::size_t i = 0; i < r; ++i)
      if ((row >> i) & 1) s.push_back(static_cast<std::uint32_t>(i));
    m.rows.push_back(s);
  }
  return m;
}

Rat min_relative_weight(const LinearCode& c) {
  if (c.r == 0 || c.r > 30) throw Error(ErrorCode::budget_exceeded, kMod, "message length outside [1, 30]");
  std::size_t best = c.rbar;
  for (std::uint64_t v = 1; v < (std::uint64_t{1} << c.r); ++v) {
    std::size_t w = 0;
    for (auto row : c.rows) w += std::popcount(v & row) & 1;
    best = std::min(best, w);
  }
  Rat d(static_cast<unsigned long>(best), static_cast<unsigned long>(c.rbar));
  d.canonicalize();
  return d;
}

LinearCode find_base_code(std::size_t r, std::size_t rbar, std::uint64_t seed, std::size_t tries) {
  if (rbar == 0) rbar = 2 * r;
  if (r == 0 || r > 30 || rbar < r) throw Error(ErrorCode::invalid_argument, kMod, "bad base code shape");
  std::mt19937_64 rng(seed);
  const std::uint64_t mask = (std::uint64_t{1} << r) - 1;
  LinearCode best;
  best.r = r;
  best.rbar = rbar;
  best.distance = -1;
  for (std::size_t t = 0; t < tries; ++t) {
    LinearCode c;
    c.r = r;
    c.rbar = rbar;
    for (std::size_t j = 0; j < rbar; ++j) {
      std::uint64_t row = 0;
      while (row == 0) row = rng() & mask;
      c.rows.push_back(row);
    }
    c.distance = min_relative_weight(c);
    if (c.distance > best.distance) best = c;
  }
  if (best.distance < Rat(1, 3))
    throw Error(ErrorCode::verification_failed, kMod, "no base code reached relative distance 1/3");
  return best;
}

namespace {

// strides for dims with axis 0 fastest
std::vector<std::uint64_t> strides_of(const std::vector<std::size_t>& dims) {
  std::vector<std::uint64_t> s(dims.size(), 1);
  for (std::size_t a = 1; a < dims.size(); ++a) s[a] = s[a - 1] * dims[a - 1];
  return s;
}

template <class Visit>
void for_each_fiber(const std::vector<std::size_t>& dims, std::size_t axis, Visit&& visit) {
  // visit(base offset) for every assignment of the axes other than `axis`
  const auto st = strides_of(dims);
  std::uint64_t total = 1;
  for (std::size_t a = 0; a < dims.size(); ++a)
    if (a != axis) total *= dims[a];
  for (std::uint64_t k = 0; k < total; ++k) {
    std::uint64_t rem = k, off = 0;
    for (std::size_t a = 0; a < dims.size(); ++a) {
      if (a == axis) continue;
      off += (rem % dims[a]) * st[a];
      rem /= dims[a];
    }
    visit(off);
  }
}

}  // namespace

Bits tensor_encode(const Bits& x, const LinearCode& base, std::size_t d) {
  if (d == 0) throw Error(ErrorCode::invalid_argument, kMod, "tensor order must be positive");
  if (base.distance < Rat(1, 3)) throw Error(ErrorCode::verification_failed, kMod, "base distance uncertified");
  const std::uint64_t full = ipow(base.r, d);
  if (x.size() > full) throw Error(ErrorCode::length_mismatch, kMod, "message longer than r^d");
  Bits cur(full, 0);
  std::copy(x.begin(), x.end(), cur.begin());
  std::vector<std::size_t> dims(d, base.r);
  for (std::size_t axis = 0; axis < d; ++axis) {
    auto nd = dims;
    nd[axis] = base.rbar;
    Bits next(cur.size() / base.r * base.rbar, 0);
    const auto so = strides_of(dims), sn = strides_of(nd);
    for_each_fiber(dims, axis, [&](std::uint64_t off) {
      // offsets of the other axes are identical in both layouts only if we
      // recompute them; decode from the old layout
      std::uint64_t rem = off, offn = 0;
      for (std::size_t a = d; a-- > 0;) {
        const std::uint64_t c = rem / so[a];
        rem %= so[a];
        offn += c * sn[a];
      }
      Bits msg(base.r);
      for (std::size_t u = 0; u < base.r; ++u) msg[u] = cur[off + u * so[axis]];
      const Bits cw = base.encode(msg);
      for (std::size_t v = 0; v < base.rbar; ++v) next[offn + v * sn[axis]] = cw[v];
    });
    cur.swap(next);
    dims = nd;
  }
  return cur;
}

std::vector<LinearMap> tensor_passes(const LinearCode& base, std::size_t d) {
  if (d == 0) throw Error(ErrorCode::invalid_argument, kMod, "tensor order must be positive");
  std::vector<LinearMap> passes;
  std::vector<std::size_t> dims(d, base.r);
  const LinearMap bm = base.map();
  for (std::size_t axis = 0; axis < d; ++axis) {
    auto nd = dims;
    nd[axis] = base.rbar;
    const auto so = strides_of(dims), sn = strides_of(nd);
    LinearMap m;
    m.in = 1;
    for (auto x : dims) m.in *= x;
    std::size_t outs = 1;
    for (auto x : nd) outs *= x;
    m.rows.assign(outs, {});
    for_each_fiber(dims, axis, [&](std::uint64_t off) {
      std::uint64_t rem = off, offn = 0;
      for (std::size_t a = d; a-- > 0;) {
        const std::uint64_t c = rem / so[a];
        rem %= so[a];
        offn += c * sn[a];
      }
      for (std::size_t v = 0; v < base.rbar; ++v) {
        auto& row = m.rows[offn + v * sn[axis]];
        for (auto u : bm.rows[v]) row.push_back(static_cast<std::uint32_t>(off + u * so[axis]));
      }
    });
    passes.push_back(std::move(m));
    dims = nd;
  }
  return passes;
}

double circulant_lambda_closed_form(const ExpanderSpec& g) {
  double best = 0;
  const double n = static_cast<double>(g.vertices);
  for (std::size_t j = 1; j < g.vertices; ++j) {
    double s = 0;
    for (auto o : g.offsets) s += std::cos(2 * std::numbers::pi * static_cast<double>(j * o % g.vertices) / n);
    best = std::max(best, std::abs(s / static_cast<double>(g.degree())));
  }
  return best;
}

double circulant_lambda_eigen(const ExpanderSpec& g) {
  const std::size_t n = g.vertices;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t v = 0; v < n; ++v)
    for (std::size_t s = 0; s < g.degree(); ++s)
      a(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(g.neighbour(v, s))) += 1.0 / static_cast<double>(g.degree());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a);
  std::vector<double> ev;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(ev.rbegin(), ev.rend());
  return ev.size() > 1 ? ev[1] : 0.0;
}

ExpanderSpec circulant_expander(std::size_t n, std::vector<std::size_t> offsets) {
  if (n == 0 || offsets.empty()) throw Error(ErrorCode::invalid_argument, kMod, "empty graph");
  for (auto& o : offsets) o %= n;
  // symmetric multiset, so the walk matrix is self-adjoint
  auto sorted = offsets;
  std::sort(sorted.begin(), sorted.end());
  auto neg = offsets;
  for (auto& o : neg) o = (n - o) % n;
  std::sort(neg.begin(), neg.end());
  if (sorted != neg) throw Error(ErrorCode::invalid_argument, kMod, "circulant offsets must be closed under negation");
  ExpanderSpec g;
  g.vertices = n;
  g.offsets = offsets;
  g.lambda_numeric = n > 1 ? circulant_lambda_eigen(g) : 0.0;
  g.closed_form = circulant_lambda_closed_form(g);
  constexpr double tol = 1e-9;
  if (std::abs(g.lambda_numeric - g.closed_form) > tol)
    throw Error(ErrorCode::verification_failed, kMod, "eigensolver disagrees with the circulant spectrum");
  // round up to a dyadic rational that dominates the computed value
  const double up = std::ceil((g.lambda_numeric + tol) * 4294967296.0);
  g.lambda = Rat(Int(static_cast<unsigned long>(up)), Int(1) << 32);
  g.lambda.canonicalize();
  if (g.lambda >= 1) throw Error(ErrorCode::verification_failed, kMod, "graph has no spectral gap");
  return g;
}

ExpanderSpec complete_expander(std::size_t n) {
  std::vector<std::size_t> off(n);
  for (std::size_t i = 0; i < n; ++i) off[i] = i;
  ExpanderSpec g = circulant_expander(n, off);
  // walk matrix is J/n, exactly rank one
  g.lambda = 0;
  return g;
}

std::size_t walk_length(const Rat& rho, const Rat& lambda, const Rat& eps) {
  if (rho <= 0 || rho > 1 || eps <= 0) throw Error(ErrorCode::invalid_argument, kMod, "rho in (0,1], eps > 0");
  const Rat base = Rat(1) - rho * (Rat(1) - lambda);
  Rat p = 1;
  for (std::size_t ell = 1; ell <= 62; ++ell) {
    if (p <= eps) return ell;
    p *= base;
  }
  throw Error(ErrorCode::infeasible, kMod, "walk length budget exceeded");
}

std::uint64_t amplified_length(std::size_t nhat, const ExpanderSpec& g, std::size_t ell) {
  return sat_mul(sat_mul(nhat, ipow(g.degree(), ell - 1)), pow2_sat(static_cast<unsigned>(ell)));
}

Bits amplify_encode(const Bits& xhat, const ExpanderSpec& g, std::size_t ell) {
  if (xhat.size() != g.vertices) throw Error(ErrorCode::length_mismatch, kMod, "graph size vs message");
  const std::uint64_t len = amplified_length(g.vertices, g, ell);
  if (len > (std::uint64_t{1} << 32)) throw Error(ErrorCode::budget_exceeded, kMod, "amplified code too long");
  Bits out(len);
  const std::uint64_t walks_per_start = ipow(g.degree(), ell - 1);
  const std::uint64_t subsets = std::uint64_t{1} << ell;
  std::uint64_t pos = 0;
  std::vector<std::size_t> steps(ell - 1, 0);
  for (std::size_t start = 0; start < g.vertices; ++start) {
    std::fill(steps.begin(), steps.end(), 0);
    for (std::uint64_t w = 0; w < walks_per_start; ++w) {
      std::uint64_t vbits = xhat[start];
      std::size_t v = start;
      for (std::size_t j = 0; j + 1 < ell; ++j) {
        v = g.neighbour(v, steps[j]);
        vbits |= static_cast<std::uint64_t>(xhat[v]) << (j + 1);
      }
      for (std::uint64_t s = 0; s < subsets; ++s) out[pos++] = std::popcount(vbits & s) & 1;
      // odometer, last step least significant
      for (std::size_t j = ell - 1; j-- > 0;) {
        if (++steps[j] < g.degree()) break;
        steps[j] = 0;
      }
    }
  }
  return out;
}

Bits amplify_encode(const Bits& xhat, const ExpanderSpec& g, const Rat& eps, const Rat& rho) {
  return amplify_encode(xhat, g, walk_length(rho, g.lambda, eps));
}

LinearMap amplify_map(const ExpanderSpec& g, std::size_t ell) {
  const std::uint64_t len = amplified_length(g.vertices, g, ell);
  if (len > (std::uint64_t{1} << 24)) throw Error(ErrorCode::budget_exceeded, kMod, "amplified map too large");
  LinearMap m;
  m.in = g.vertices;
  m.rows.reserve(len);
  const std::uint64_t walks_per_start = ipow(g.degree(), ell - 1);
  std::vector<std::size_t> steps(ell - 1, 0), walk(ell);
  for (std::size_t start = 0; start < g.vertices; ++start) {
    std::fill(steps.begin(), steps.end(), 0);
    for (std::uint64_t w = 0; w < walks_per_start; ++w) {
      walk[0] = start;
      for (std::size_t j = 0; j + 1 < ell; ++j) walk[j + 1] = g.neighbour(walk[j], steps[j]);
      for (std::uint64_t s = 0; s < (std::uint64_t{1} << ell); ++s) {
        std::vector<std::uint32_t> row;
        for (std::size_t j = 0; j < ell; ++j)
          if ((s >> j) & 1) row.push_back(static_cast<std::uint32_t>(walk[j]));
        m.rows.push_back(cancel_pairs(std::move(row)));
      }
      for (std::size_t j = ell - 1; j-- > 0;) {
        if (++steps[j] < g.degree()) break;
        steps[j] = 0;
      }
    }
  }
  return m;
}

Rat amplified_weight_formula(const Bits& xhat, const ExpanderSpec& g, std::size_t ell) {
  std::vector<Int> miss(g.vertices), next(g.vertices);
  for (std::size_t v = 0; v < g.vertices; ++v) miss[v] = xhat[v] ? 0 : 1;
  for (std::size_t j = 1; j < ell; ++j) {
    for (auto& x : next) x = 0;
    for (std::size_t v = 0; v < g.vertices; ++v)
      for (std::size_t s = 0; s < g.degree(); ++s) {
        const std::size_t u = g.neighbour(v, s);
        if (!xhat[u]) next[u] += miss[v];
      }
    miss.swap(next);
  }
  Int missed = 0;
  for (const auto& x : miss) missed += x;
  Int walks = Int(static_cast<unsigned long>(g.vertices));
  for (std::size_t j = 1; j < ell; ++j) walks *= static_cast<unsigned long>(g.degree());
  Rat r(walks - missed, Int(2) * walks);
  r.canonicalize();
  return r;
}

std::size_t BalancedCode::message_bits() const { return static_cast<std::size_t>(ipow(base.r, d)); }
std::size_t BalancedCode::inner_bits() const { return static_cast<std::size_t>(ipow(base.rbar, d)); }
std::uint64_t BalancedCode::length() const { return amplified_length(inner_bits(), graph, ell); }

Bits BalancedCode::encode(const Bits& x) const { return amplify_encode(tensor_encode(x, base, d), graph, ell); }

std::vector<LinearMap> BalancedCode::passes() const {
  auto p = tensor_passes(base, d);
  p.back() = p.back().then(amplify_map(graph, ell));
  return p;
}

nlohmann::json BalancedCode::to_json() const {
  return {{"base", code_to_json(base)}, {"d", d}, {"graph", expander_to_json(graph)}, {"eps", rat_str(eps)},
          {"rho", rat_str(rho)},        {"ell", ell}, {"length", length()}};
}

BalancedCode make_balanced_code(const LinearCode& base, std::size_t d, const Rat& eps) {
  BalancedCode c;
  c.base = base;
  c.d = d;
  c.eps = eps;
  Int p3;
  mpz_ui_pow_ui(p3.get_mpz_t(), 3, d);
  c.rho = Rat(Int(1), p3);
  c.graph = complete_expander(c.inner_bits());
  c.ell = walk_length(c.rho, c.graph.lambda, eps);
  return c;
}

Bits balanced_encode(const Bits& x, const Rat& eps, std::size_t d, const LinearCode& base) {
  return make_balanced_code(base, d, eps).encode(x);
}

JohnsonParams johnson_params(const Rat& delta) {
  if (!(delta > 0 && delta < Rat(1, 2))) throw Error(ErrorCode::invalid_argument, kMod, "delta must lie in (0, 1/2)");
  JohnsonParams j;
  j.delta = delta;
  j.eps = delta * delta;
  j.list_bound = Rat(1) / j.eps;
  return j;
}

std::size_t max_list_size(const std::vector<Bits>& codewords, const std::vector<Bits>& centers, const Rat& delta) {
  std::size_t best = 0;
  for (const auto& c : centers) {
    std::size_t cnt = 0;
    for (const auto& w : codewords) {
      if (w.size() != c.size()) throw Error(ErrorCode::length_mismatch, kMod, "center length");
      std::size_t dist = 0;
      for (std::size_t i = 0; i < w.size(); ++i) dist += w[i] != c[i];
      if (frac(dist, w.size()) <= Rat(1, 2) - delta) ++cnt;
    }
    best = std::max(best, cnt);
  }
  return best;
}

ThresholdCircuit parity_circuit(std::size_t k) {
  if (k == 0) throw Error(ErrorCode::invalid_argument, kMod, "parity of zero bits");
  if (k == 1) return ThresholdCircuit{1, {{Ltf{{Int(1)}, Rat(0)}}}};
  LinearMap m;
  m.in = k;
  m.rows.push_back({});
  for (std::size_t i = 0; i < k; ++i) m.rows[0].push_back(static_cast<std::uint32_t>(i));
  return emit_linear_circuit({m});
}

ThresholdCircuit emit_linear_circuit(const std::vector<LinearMap>& passes) {
  if (passes.empty()) throw Error(ErrorCode::invalid_argument, kMod, "no linear passes");
  ThresholdCircuit c;
  c.n = passes[0].in;
  std::size_t width = c.n;
  for (const auto& p : passes) {
    if (p.in != width) throw Error(ErrorCode::length_mismatch, kMod, "pass widths do not chain");
    std::vector<Ltf> low, top;
    for (const auto& row : p.rows) {
      for (auto i : row)
        if (i >= width) throw Error(ErrorCode::malformed, kMod, "row reads past its input");
      if (std::adjacent_find(row.begin(), row.end()) != row.end() || !std::is_sorted(row.begin(), row.end()))
        throw Error(ErrorCode::malformed, kMod, "rows must be sorted without repeats");
    }
    // first layer, remembering where each output's gadget gates start
    std::vector<std::pair<std::size_t, std::size_t>> span;
    for (const auto& row : p.rows) {
      const std::size_t k = row.size();
      span.emplace_back(low.size(), k);
      if (k == 1) {
        Ltf g{std::vector<Int>(width, Int(0)), Rat(0)};
        g.weights[row[0]] = 1;
        low.push_back(std::move(g));
        continue;
      }
      for (std::size_t j = 1; j <= k; ++j) {
        Ltf g{std::vector<Int>(width, Int(0)), Rat(static_cast<long>(2 * k) - static_cast<long>(4 * j) + 1, 2)};
        for (auto i : row) g.weights[i] = 1;
        low.push_back(std::move(g));
      }
    }
    if (low.empty()) low.push_back(Ltf::constant(width, 1));
    for (std::size_t o = 0; o < p.rows.size(); ++o) {
      const auto [start, k] = span[o];
      Ltf g{std::vector<Int>(low.size(), Int(0)), Rat(-1)};
      if (k == 1) {
        g.weights[start] = 1;
        g.threshold = 0;
      } else if (k > 1) {
        long csum = 0;
        for (std::size_t j = 1; j <= k; ++j) {
          const long cj = (j % 2) ? 1 : -1;
          g.weights[start + j - 1] = cj;
          csum += cj;
        }
        g.threshold = Rat(2 * csum - 3, 2);
      }
      top.push_back(std::move(g));
    }
    width = top.size();
    c.layers.push_back(std::move(low));
    c.layers.push_back(std::move(top));
  }
  c.validate(false);
  return c;
}

std::string bits_to_hex(const Bits& b) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  for (std::size_t i = 0; i < b.size(); i += 4) {
    unsigned v = 0;
    for (std::size_t j = 0; j < 4 && i + j < b.size(); ++j) v |= (b[i + j] & 1u) << j;
    s += digits[v];
  }
  return s;
}

Bits bits_from_hex(const std::string& hex, std::size_t n) {
  Bits b(n, 0);
  for (std::size_t i = 0; i < hex.size(); ++i) {
    const char ch = hex[i];
    unsigned v;
    if (ch >= '0' && ch <= '9')
      v = ch - '0';
    else if (ch >= 'a' && ch <= 'f')
      v = ch - 'a' + 10;
    else
      throw Error(ErrorCode::parse, kMod, "bad hex digit");
    for (std::size_t j = 0; j < 4 && 4 * i + j < n; ++j) b[4 * i + j] = (v >> j) & 1;
  }
  return b;
}

nlohmann::json code_to_json(const LinearCode& c) {
  nlohmann::json rows = nlohmann::json::array();
  for (auto r : c.rows) {
    std::string s;
    for (std::size_t i = 0; i < c.r; ++i) s += ((r >> i) & 1) ? '1' : '0';
    rows.push_back(s);
  }
  return {{"r", c.r}, {"rbar", c.rbar}, {"generator_rows", rows}, {"distance", rat_str(c.distance)}};
}

nlohmann::json expander_to_json(const ExpanderSpec& g) {
  return {{"vertices", g.vertices},
          {"degree", g.degree()},
          {"offsets", g.offsets},
          {"lambda_bound", rat_str(g.lambda)},
          {"lambda_numeric", g.lambda_numeric}};
}

}  // namespace ltcd
