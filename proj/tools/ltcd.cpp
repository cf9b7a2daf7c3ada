// ltcd: batch front end. Every command builds a config object, runs, and
// emits {version, config, result, verified}. `replay` re-runs a report's
// config.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltcd/codes.hpp"
#include "ltcd/derand.hpp"
#include "ltcd/designs.hpp"
#include "ltcd/instances.hpp"
#include "ltcd/ltf_analysis.hpp"
#include "ltcd/restriction.hpp"
#include "ltcd/sampler.hpp"
#include "ltcd/sources.hpp"

#ifndef LTCD_VERSION
#define LTCD_VERSION "unknown"
#endif

using namespace ltcd;
using nlohmann::json;

namespace {

enum Exit { kOk = 0, kOther = 1, kVerify = 2, kInfeasible = 3, kBudget = 4 };

struct Outcome {
  json result;
  bool verified = true;
};

// per-command child seeds; index 0 is reserved
enum SeedSlot : std::uint64_t { slot_code = 1, slot_tests = 2, slot_trials = 3, slot_points = 4 };

std::uint64_t child(const json& cfg, SeedSlot s) { return split_seed(cfg.at("seed").get<std::uint64_t>(), s); }

Budget budget_of(const json& cfg) { return Budget{cfg.at("budget").get<std::uint64_t>()}; }

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::parse, "cli", "cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, "cli", path + ": " + e.what());
  }
}

// a bare circuit or an instance record with a "circuit" field
ThresholdCircuit load_circuit(const std::string& path) {
  json j = read_json_file(path);
  if (j.contains("circuit")) j = j["circuit"];
  return circuit_from_json(j);
}

std::uint64_t pow2(std::size_t n) { return std::uint64_t{1} << n; }

Outcome cmd_derand(const json& cfg) {
  const json& p = cfg.at("params");
  const ThresholdCircuit c = load_circuit(p.at("circuit"));
  c.validate(true);
  const Rat eps = parse_rat(p.at("eps"));
  const Budget budget = budget_of(cfg);
  const bool override_mode = cfg.at("override_params").get<bool>();
  Outcome o;

  std::optional<Int> B;
  if (!p.at("B").get<std::string>().empty()) B = parse_int(p.at("B"));

  if (p.at("mode") == "depth2") {
    const Depth2Params dp = depth2_params(c.n, eps);
    const Depth2Sources src = p.at("sources") == "uniform" ? uniform_depth2_sources(dp) : default_depth2_sources(dp);
    const Depth2Verdict v = derandomize_depth2(c, dp, src, budget);
    o.result = {{"params", dp.to_json()},
                {"sources", {src.y->descriptor(), src.z->descriptor(), src.x->descriptor()}},
                {"verdict", v.to_json()}};
    o.result["decision"] = v.accept ? "accept" : "reject";
  } else {
    DerandConfig dc;
    dc.eps = eps;
    dc.B = B;
    unsigned q = 1;
    if (override_mode) {
      dc.restrict_opt.override_mode = true;
      dc.restrict_opt.params = [](std::size_t n, const Rat&) { return desk_layer_params(n); };
    } else {
      q = default_layer_params(c.n, eps).q;
    }
    if (p.at("sources") != "uniform") throw Error(ErrorCode::invalid_argument, "cli", "quantified mode needs uniform sources");
    dc.y = make_uniform(q * c.n);
    dc.z = make_uniform(c.n);
    const DerandVerdict v = quantified_derandomize(c, dc, budget);
    o.result = {{"verdict", v.to_json()}, {"decision", v.accept ? "accept" : "reject"}};
  }

  // ground truth when the circuit is small enough and B was declared
  if (B && c.n <= 24) {
    const std::uint64_t acc = acceptance_count(c, Budget::unlimited());
    const Int rej = Int(static_cast<unsigned long>(pow2(c.n) - acc));
    json gt = {{"acceptance_count", acc}};
    const bool decided = o.result["decision"] == "accept";
    if (rej <= *B) {
      gt["expected"] = "accept";
      o.verified = decided;
    } else if (Int(static_cast<unsigned long>(acc)) <= *B) {
      gt["expected"] = "reject";
      o.verified = !decided;
    } else {
      gt["expected"] = "outside promise";
    }
    o.result["ground_truth"] = gt;
  }
  return o;
}

Outcome cmd_design(const json& cfg) {
  const json& p = cfg.at("params");
  const WeakDesign d = build_weak_design(p.at("m"), p.at("ell"), parse_rat(p.at("alpha")));
  Outcome o;
  o.verified = verify_weak_design(d);
  o.result = {{"design", design_to_json(d)}, {"verify", o.verified}};
  return o;
}

Bits bits_of(const std::vector<std::int8_t>& v) {
  Bits b(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) b[i] = v[i] < 0;
  return b;
}

// codeword through the threshold-circuit form of the same passes
Bits encode_by_circuit(const std::vector<LinearMap>& passes, const Bits& x) {
  const ThresholdCircuit c = emit_linear_circuit(passes);
  Point pt(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) pt[i] = x[i] ? -1 : 1;
  return bits_of(eval_outputs(c, pt));
}

Outcome cmd_encode(const json& cfg) {
  const json& p = cfg.at("params");
  const std::string kind = p.at("code");
  const std::size_t r = p.at("r"), d = p.at("d");
  const LinearCode base = find_base_code(r, 0, child(cfg, slot_code));
  Outcome o;
  if (kind == "tensor") {
    std::size_t k = 1;
    for (std::size_t i = 0; i < d; ++i) k *= r;
    const Bits x = bits_from_hex(p.at("message"), k);
    const Bits cw = tensor_encode(x, base, d);
    const Bits by_circuit = encode_by_circuit(tensor_passes(base, d), x);
    o.verified = cw == by_circuit;
    o.result = {{"base", code_to_json(base)},
                {"message_bits", k},
                {"length", cw.size()},
                {"codeword", bits_to_hex(cw)},
                {"weight", std::count(cw.begin(), cw.end(), 1)},
                {"circuit_agrees", o.verified}};
  } else if (kind == "balanced") {
    const BalancedCode bc = make_balanced_code(base, d, parse_rat(p.at("eps")));
    const Bits x = bits_from_hex(p.at("message"), bc.message_bits());
    const Bits cw = bc.encode(x);
    // the circuit form is only built for short codes
    json agrees = nullptr;
    if (cw.size() <= (std::size_t{1} << 16)) agrees = cw == encode_by_circuit(bc.passes(), x);
    o.verified = agrees.is_null() || agrees.get<bool>();
    const auto w = std::count(cw.begin(), cw.end(), 1);
    // nonzero messages must land in [1/2 - eps, 1/2]
    bool in_range = true;
    if (w != 0) {
      const Rat rel(Int(static_cast<long>(w)), Int(static_cast<unsigned long>(cw.size())));
      in_range = rel <= Rat(1, 2) && rel >= Rat(1, 2) - bc.eps;
    }
    o.verified = o.verified && in_range;
    o.result = {{"code", bc.to_json()},        {"length", cw.size()},       {"codeword", bits_to_hex(cw)},
                {"weight", w},                 {"weight_in_range", in_range}, {"circuit_agrees", agrees}};
  } else {
    throw Error(ErrorCode::invalid_argument, "cli", "unknown code kind " + kind);
  }
  return o;
}

SamplerSpec sampler_from(const json& cfg) {
  const json& p = cfg.at("params");
  return desk_sampler_spec(p.at("n"), p.at("m"), p.at("k"), p.at("ell"), parse_rat(p.at("alpha")),
                           child(cfg, slot_code));
}

Outcome cmd_sampler(const json& cfg) {
  const json& p = cfg.at("params");
  const SamplerSpec spec = sampler_from(cfg);
  auto tests = random_tests(spec.m, p.at("tests"), child(cfg, slot_tests));
  for (auto t : adversarial_tests(spec.m)) tests.push_back(t);
  const SamplerReport rep = verify_sampler(spec, parse_rat(p.at("eps")), parse_rat(p.at("delta")), tests,
                                           budget_of(cfg));
  Outcome o;
  o.verified = rep.pass;
  o.result = {{"spec", spec.to_json()}, {"report", rep.to_json()}};
  return o;
}

Outcome cmd_reduce(const json& cfg) {
  const json& p = cfg.at("params");
  const ThresholdCircuit c = load_circuit(p.at("circuit"));
  const SamplerSpec spec = sampler_from(cfg);
  if (c.n != spec.m) throw Error(ErrorCode::length_mismatch, "cli", "circuit arity must equal sampler m");
  const ReductionCircuit rc = build_reduction_circuit(c, spec);
  const Budget budget = budget_of(cfg);
  budget.charge(pow2(spec.n), "cli", "reduction check");
  const CompiledCircuit cc(rc.circuit);
  std::uint64_t mismatches = 0, accepted = 0;
  for (std::uint64_t x = 0; x < pow2(spec.n); ++x) {
    const int a = cc.eval_index(x);
    mismatches += a != reduction_direct(c, spec, x);
    accepted += a == -1;
  }
  Outcome o;
  // 3d + 2 applies when the code order equals the depth of C
  json three_d = nullptr;
  if (c.depth() == spec.d) three_d = rc.circuit.depth() == 3 * spec.d + 2;
  o.verified = mismatches == 0 && rc.accounting_ok && (three_d.is_null() || three_d.get<bool>());
  o.result = {{"spec", spec.to_json()},
              {"reduction", rc.to_json()},
              {"circuit", circuit_to_json(rc.circuit)},
              {"depth", rc.circuit.depth()},
              {"depth_is_3d_plus_2", three_d},
              {"mismatches", mismatches},
              {"acceptance_count", accepted},
              {"constant", accepted == 0 || accepted == pow2(spec.n)}};
  return o;
}

Outcome cmd_harness(const json& cfg) {
  const json& p = cfg.at("params");
  const std::string kind = p.at("kind");
  const std::uint64_t trials = p.at("trials");
  const std::size_t n = p.at("n");
  Outcome o;
  if (kind == "lemma") {
    const unsigned q = p.at("q");
    const Rat t = parse_rat(p.at("t"));
    const HarnessRate r = harness_single_ltf_lemma(Ltf::majority(n), q, t, UniformSource(q * n), UniformSource(n),
                                                   trials, child(cfg, slot_trials));
    const double bound = 8.0 * std::sqrt(std::ldexp(1.0, -static_cast<int>(q)));
    o.verified = r.rate() <= bound;
    o.result = {{"rate", r.to_json()}, {"bound", bound}};
  } else if (kind == "kw") {
    const Rat pr = parse_rat(p.at("p"));
    const KwFamily fam = p.at("family") == "partition" ? KwFamily::partition : KwFamily::bernoulli;
    const KwReport r = harness_kw_restriction(Ltf::majority(n), fam, pr, UniformSource(n), trials,
                                              child(cfg, slot_trials));
    const double pd = pr.get_d();
    const double bound = 8.0 * static_cast<double>(n) * pd * std::sqrt(pd);
    o.verified = r.rate() <= bound;
    o.result = {{"report", r.to_json()}, {"bound", bound}};
  } else if (kind == "concentration") {
    // majority weights against the almost-kwise and ltf-fooling sources
    const std::vector<Int> w(n, Int(1));
    json rows = json::array();
    for (const SourcePtr& s : {make_almost_kwise(n, std::min<std::size_t>(n, 4), Rat(1, 8)),
                               make_ltf_fooling(n, Rat(1, 16))}) {
      const ConcentrationProfile prof = concentration_profile(*s, w, budget_of(cfg));
      const bool ok = prof.max_ltf_gap <= prof.max_interval_gap && prof.max_interval_gap <= 2 * prof.max_ltf_gap;
      o.verified = o.verified && ok;
      rows.push_back({{"source", s->descriptor()},
                      {"max_ltf_gap", rat_str(prof.max_ltf_gap)},
                      {"max_interval_gap", rat_str(prof.max_interval_gap)},
                      {"equivalence_holds", ok}});
    }
    o.result = {{"profiles", rows}};
  } else {
    throw Error(ErrorCode::invalid_argument, "cli", "unknown harness " + kind);
  }
  return o;
}

Outcome cmd_gen(const json& cfg) {
  const json& p = cfg.at("params");
  const auto inst = generate_family(p.at("family"), p.at("n"), p.at("count"), child(cfg, slot_points), p.at("param"));
  Outcome o;
  o.result = json::array();
  for (const auto& in : inst) {
    // re-enumerate: the embedded count is the ground truth
    o.verified = o.verified && acceptance_count(in.circuit, budget_of(cfg)) == in.acceptance;
    o.result.push_back(in.to_json());
  }
  return o;
}

Outcome dispatch(const json& cfg) {
  const std::string cmd = cfg.at("command");
  if (cmd == "derand") return cmd_derand(cfg);
  if (cmd == "design") return cmd_design(cfg);
  if (cmd == "encode") return cmd_encode(cfg);
  if (cmd == "sampler") return cmd_sampler(cfg);
  if (cmd == "reduce") return cmd_reduce(cfg);
  if (cmd == "harness") return cmd_harness(cfg);
  if (cmd == "gen") return cmd_gen(cfg);
  throw Error(ErrorCode::invalid_argument, "cli", "unknown command " + cmd);
}

int exit_for(ErrorCode c) {
  switch (c) {
    case ErrorCode::verification_failed:
      return kVerify;
    case ErrorCode::infeasible:
      return kInfeasible;
    case ErrorCode::budget_exceeded:
      return kBudget;
    default:
      return kOther;
  }
}

void emit(const json& doc, const std::string& out) {
  const std::string text = doc.dump(1) + "\n";
  if (out.empty() || out == "-") {
    std::cout << text;
    return;
  }
  std::ofstream f(out);
  if (!f) throw Error(ErrorCode::parse, "cli", "cannot write " + out);
  f << text;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"threshold-circuit derandomization toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  std::uint64_t seed = 1;
  std::uint64_t budget = Budget::from_env().limit;
  int workers = 0;
  std::string out;
  bool override_params = false;
  app.add_option("--seed", seed, "master seed");
  app.add_option("--budget", budget, "evaluation budget (default LTCD_BUDGET or 2^22)");
  app.add_option("--workers", workers, "OpenMP threads, 0 = runtime default");
  app.add_option("--out", out, "report path, - for stdout");
  app.add_flag("--override-params", override_params, "desk-scale parameter overrides");

  json params = json::object();

  std::string circuit, eps = "1/40", B, mode = "quantified", sources = "uniform";
  auto* derand = app.add_subcommand("derand", "quantified derandomization of a circuit file");
  derand->add_option("--circuit", circuit)->required();
  derand->add_option("--eps", eps);
  derand->add_option("--B", B, "declared exceptional-input budget");
  derand->add_option("--mode", mode)->check(CLI::IsMember({"quantified", "depth2"}));
  derand->add_option("--sources", sources)->check(CLI::IsMember({"uniform", "default"}));

  std::size_t m = 8, ell = 5;
  std::string alpha = "1/5";
  auto* design = app.add_subcommand("design", "weak design");
  design->add_option("--m", m);
  design->add_option("--ell", ell);
  design->add_option("--alpha", alpha);

  std::string code = "tensor", message = "0", code_eps = "1/8";
  std::size_t r = 3, d = 2;
  auto* encode = app.add_subcommand("encode", "encode a message");
  encode->add_option("--code", code)->check(CLI::IsMember({"tensor", "balanced"}));
  encode->add_option("--r", r);
  encode->add_option("--d", d);
  encode->add_option("--eps", code_eps);
  encode->add_option("--message", message, "hex, bit 0 first");

  std::size_t sn = 10, sm = 2, sk = 6, sell = 5, tests = 50;
  std::string salpha = "1/5", seps = "1/2", sdelta = "1/4";
  auto add_sampler = [&](CLI::App* a) {
    a->add_option("--n", sn);
    a->add_option("--m", sm);
    a->add_option("--k", sk);
    a->add_option("--ell", sell);
    a->add_option("--alpha", salpha);
  };
  auto* sampler = app.add_subcommand("sampler", "build and verify a desk sampler");
  add_sampler(sampler);
  sampler->add_option("--tests", tests);
  sampler->add_option("--eps", seps);
  sampler->add_option("--delta", sdelta);

  std::string rcircuit;
  auto* reduce = app.add_subcommand("reduce", "reduction circuit for an m-input circuit");
  reduce->add_option("--circuit", rcircuit)->required();
  add_sampler(reduce);

  std::string hkind = "lemma", hp = "1/16", ht = "1", family = "bernoulli";
  std::size_t hn = 64;
  unsigned hq = 4;
  std::uint64_t trials = 10000;
  auto* harness = app.add_subcommand("harness", "statistical harnesses");
  harness->add_option("--kind", hkind)->check(CLI::IsMember({"lemma", "kw", "concentration"}));
  harness->add_option("--n", hn);
  harness->add_option("--q", hq);
  harness->add_option("--t", ht);
  harness->add_option("--p", hp);
  harness->add_option("--family", family)->check(CLI::IsMember({"bernoulli", "partition"}));
  harness->add_option("--trials", trials);

  std::string gfamily = "near-constant";
  std::size_t gn = 8, gcount = 4, gparam = 0;
  auto* gen = app.add_subcommand("gen", "curated instance families");
  gen->add_option("--family", gfamily);
  gen->add_option("--n", gn);
  gen->add_option("--count", gcount);
  gen->add_option("--param", gparam);

  std::string replay;
  auto* rep = app.add_subcommand("replay", "re-run the config embedded in a report");
  rep->add_option("report", replay)->required();

  CLI11_PARSE(app, argc, argv);

  try {
    json cfg;
    if (*rep) {
      cfg = read_json_file(replay).at("config");
    } else {
      std::string cmd = app.get_subcommands().front()->get_name();
      if (cmd == "derand")
        params = {{"circuit", circuit}, {"eps", eps}, {"B", B}, {"mode", mode}, {"sources", sources}};
      else if (cmd == "design")
        params = {{"m", m}, {"ell", ell}, {"alpha", alpha}};
      else if (cmd == "encode")
        params = {{"code", code}, {"r", r}, {"d", d}, {"eps", code_eps}, {"message", message}};
      else if (cmd == "sampler" || cmd == "reduce") {
        params = {{"n", sn}, {"m", sm}, {"k", sk}, {"ell", sell}, {"alpha", salpha}};
        if (cmd == "sampler") {
          params["tests"] = tests;
          params["eps"] = seps;
          params["delta"] = sdelta;
        } else {
          params["circuit"] = rcircuit;
        }
      } else if (cmd == "harness")
        params = {{"kind", hkind}, {"n", hn}, {"q", hq}, {"t", ht}, {"p", hp}, {"family", family}, {"trials", trials}};
      else if (cmd == "gen")
        params = {{"family", gfamily}, {"n", gn}, {"count", gcount}, {"param", gparam}};
      cfg = {{"command", cmd},   {"params", params},   {"seed", seed},
             {"budget", budget}, {"workers", workers}, {"override_params", override_params}};
    }
    if (cfg.at("workers").get<int>() > 0) set_workers(cfg.at("workers"));

    const Outcome o = dispatch(cfg);
    emit({{"version", LTCD_VERSION}, {"config", cfg}, {"result", o.result}, {"verified", o.verified}}, out);
    if (!o.verified) {
      std::cerr << cfg.at("command").get<std::string>() << ": verification failed\n";
      return kVerify;
    }
    return kOk;
  } catch (const Error& e) {
    std::cerr << e.what() << "\n";
    return exit_for(e.code());
  } catch (const json::exception& e) {
    std::cerr << "cli.parse: " << e.what() << "\n";
    return kOther;
  } catch (const std::exception& e) {
    std::cerr << e.what() << "\n";
    return kOther;
  }
}
