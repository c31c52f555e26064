#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <sstream>

#include <CLI11.hpp>

#include "finetti/composite.hpp"
#include "finetti/definetti.hpp"
#include "finetti/errors.hpp"
#include "finetti/io.hpp"
#include "finetti/quantum.hpp"
#include "finetti/state_space.hpp"
#include "finetti/test_space.hpp"

namespace finetti::cli {

namespace fs = std::filesystem;
using io::json;

namespace {

constexpr double kRecoveryThreshold = 1e-7;

struct Options {
  bool json = false;
  double tol = kTol;
  std::uint64_t seed = 42;
  std::string support;
  std::size_t n = 0;
  std::size_t grid = 16;
  std::size_t samples = 0;
  std::vector<std::string> files;
  std::string demo;
};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

json systems_json(const std::vector<std::size_t>& s) {
  json out = json::array();
  for (auto i : s) out.push_back(i + 1);
  return out;
}

TestSpace load_space(const std::string& path) {
  return io::space_from_json(io::load_json_file(path), fs::path(path).parent_path());
}

JointState load_joint(const std::string& path, double tol) {
  return io::joint_from_json(io::load_json_file(path), fs::path(path).parent_path(), tol);
}

int cmd_validate(const Options& o, std::ostream& out) {
  const auto space = load_space(o.files.at(0));
  const auto report = validate(space);
  if (o.json) {
    json v = json::array();
    for (const auto& r : report) v.push_back(r.message);
    out << json{{"valid", report.empty()},
                {"outcomes", space.outcome_count()},
                {"tests", space.test_count()},
                {"violations", v}}
               .dump(2)
        << "\n";
  } else if (report.empty()) {
    out << "valid: " << space.outcome_count() << " outcomes, " << space.test_count() << " tests\n";
  } else {
    out << "invalid:\n";
    for (const auto& r : report) out << "  " << r.message << "\n";
  }
  return report.empty() ? kOk : kCheckFailed;
}

int cmd_dim(const Options& o, std::ostream& out) {
  const auto space = load_space(o.files.at(0));
  const auto d = dimension(space);
  if (o.json)
    out << json{{"dimension", d}}.dump(2) << "\n";
  else
    out << "dimension: " << d << "\n";
  return kOk;
}

int cmd_frame(const Options& o, std::ostream& out) {
  const auto space = share(load_space(o.files.at(0)));
  const auto frame = build_frame(space, o.tol);
  if (o.json) {
    out << io::frame_to_json(frame).dump(2) << "\n";
    return kOk;
  }
  out << "frame: d = " << frame.d() << ", c = " << frame.shift() << "\n";
  for (std::size_t i = 0; i < frame.d(); ++i) {
    out << "  a" << i + 1 << " =";
    const auto m = frame.member(i).covector;
    for (Eigen::Index e = 0; e < m.size(); ++e) out << ' ' << m(e);
    out << "\n";
  }
  return kOk;
}

int cmd_greechie(const Options& o, std::ostream& out) {
  out << export_greechie(load_space(o.files.at(0)));
  return kOk;
}

json ns_json(const NonsignallingReport& r) {
  json v = json::array();
  for (const auto& s : r.violations)
    v.push_back(json{{"source", systems_json(s.source)}, {"affected", systems_json(s.affected)}, {"magnitude", s.magnitude}});
  return json{{"pass", r.pass}, {"worst", r.worst}, {"violations", v}};
}

void print_ns(const NonsignallingReport& r, std::ostream& out) {
  if (r.pass) {
    out << "nonsignalling: pass (worst deviation " << sci(r.worst) << ")\n";
    return;
  }
  out << "nonsignalling: FAIL\n";
  for (const auto& s : r.violations)
    out << "  systems " << format_systems(s.affected) << " affected by test choice at " << format_systems(s.source)
        << ": deviation " << sci(s.magnitude) << "\n";
}

int cmd_check_ns(const Options& o, std::ostream& out) {
  const auto js = load_joint(o.files.at(0), o.tol);
  const auto r = check_nonsignalling(js, o.tol);
  if (o.json)
    out << ns_json(r).dump(2) << "\n";
  else
    print_ns(r, out);
  return r.pass ? kOk : kCheckFailed;
}

// Sums the last system over its first test without any consistency check;
// clause 3 then compares this against every other test of that system.
JointState drop_last(const JointState& js, double tol) {
  const auto& p = js.product();
  std::vector<SpaceHandle> rest(p.factors().begin(), p.factors().end() - 1);
  const std::size_t last = p.shape().back();
  std::vector<double> t(js.tensor().size() / last, 0.0);
  for (std::size_t i = 0; i < t.size(); ++i)
    for (auto e : p.factor(p.n() - 1).tests().front()) t[i] += js.tensor()[i * last + e];
  return JointState(ProductSpace(rest), std::move(t), tol);
}

int cmd_check_exchangeable(const Options& o, std::ostream& out) {
  std::vector<JointState> states;
  for (const auto& f : o.files) states.push_back(load_joint(f, o.tol));
  std::sort(states.begin(), states.end(), [](const auto& a, const auto& b) { return a.n() < b.n(); });
  // Levels missing below a given one are filled in from it.
  std::vector<JointState> filled;
  for (auto& js : states) {
    std::vector<JointState> below;
    const std::size_t have = filled.empty() ? 0 : filled.back().n();
    if (js.n() <= have) throw InvalidArgument("check-exchangeable: two files with " + std::to_string(js.n()) + " systems");
    for (std::size_t k = js.n() - 1; k > have; --k) below.insert(below.begin(), drop_last(below.empty() ? js : below.front(), o.tol));
    filled.insert(filled.end(), below.begin(), below.end());
    filled.push_back(std::move(js));
  }
  states = std::move(filled);
  const auto r = check_exchangeable(SequencePrefix(std::move(states)), o.tol);
  if (o.json) {
    json f = json::array();
    for (const auto& c : r.failures)
      f.push_back(json{{"n", c.n}, {"clause", c.clause}, {"deviation", c.deviation}, {"message", c.message}});
    out << json{{"prefix_consistent", r.prefix_consistent}, {"worst_deviation", r.worst_deviation}, {"failures", f}}
               .dump(2)
        << "\n";
  } else if (r.prefix_consistent) {
    out << "exchangeable (prefix-consistent): worst deviation " << sci(r.worst_deviation) << "\n";
  } else {
    out << "not exchangeable:\n";
    for (const auto& c : r.failures) out << "  " << c.message << "\n";
  }
  return r.prefix_consistent ? kOk : kCheckFailed;
}

int cmd_recover(const Options& o, std::ostream& out) {
  auto js = load_joint(o.files.at(0), o.tol);
  if (o.n > 0) {
    if (o.n > js.n())
      throw InvalidArgument("--n " + std::to_string(o.n) + " exceeds the " + std::to_string(js.n()) +
                            " systems in the joint state");
    std::vector<std::size_t> keep(o.n);
    for (std::size_t i = 0; i < o.n; ++i) keep[i] = i;
    js = marginal(js, keep, o.tol);
  }
  RecoveryOptions opts;
  opts.tol = o.tol;
  opts.seed = o.seed;
  opts.interior_samples = o.samples;
  if (!o.support.empty()) {
    const auto doc = io::load_json_file(o.support);
    if (!doc.is_object() || !doc.contains("states") || !doc["states"].is_array())
      throw ParseError(o.support, "support file needs a \"states\" array");
    const auto& space = js.product().factors().front();
    for (std::size_t i = 0; i < doc["states"].size(); ++i) {
      const auto& row = doc["states"][i];
      if (!row.is_array()) throw ParseError(o.support + " /states/" + std::to_string(i), "expected an array");
      Eigen::VectorXd p(static_cast<Eigen::Index>(row.size()));
      for (std::size_t k = 0; k < row.size(); ++k) p(static_cast<Eigen::Index>(k)) = row[k].get<double>();
      try {
        opts.extra_support.emplace_back(space, std::move(p), o.tol);
      } catch (const Error& e) {
        throw ParseError(o.support + " /states/" + std::to_string(i), e.what());
      }
    }
  }
  const auto r = recover_mixture(js, opts);
  const bool ok = r.residual <= kRecoveryThreshold;
  if (o.json) {
    out << io::recovery_to_json(r).dump(2) << "\n";
  } else {
    out << "residual: " << sci(r.residual) << (ok ? "" : "  (no exact representation on this support)") << "\n";
    out << "unique: " << (r.unique ? "yes" : "no") << "\n";
    for (const auto& c : r.mixture.components()) {
      out << "  weight " << c.weight << " :";
      for (Eigen::Index e = 0; e < c.state.probs().size(); ++e) out << ' ' << c.state.probs()(e);
      out << "\n";
    }
  }
  return ok ? kOk : kCheckFailed;
}

int cmd_posterior(const Options& o, std::ostream& out) {
  if (o.files.size() < 2) throw InvalidArgument("posterior needs a mixture file and an observations file");
  const auto mix = io::mixture_from_json(io::load_json_file(o.files[0]), fs::path(o.files[0]).parent_path(), o.tol);
  const auto obs = io::observations_from_json(io::load_json_file(o.files[1]), *mix.space());
  const auto post = posterior_update(mix, obs);
  if (o.json) {
    out << io::mixture_to_json(post).dump(2) << "\n";
  } else {
    out << "posterior after " << obs.size() << " observations:\n";
    for (const auto& c : post.components()) {
      out << "  weight " << c.weight << " :";
      for (Eigen::Index e = 0; e < c.state.probs().size(); ++e) out << ' ' << c.state.probs()(e);
      out << "\n";
    }
  }
  return kOk;
}

// P(ab|xy) = 1/2 when a xor b == x.y.
JointState pr_box(const SpaceHandle& box) {
  std::vector<double> t(16, 0.0);
  ProductSpace p = power(box, 2);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
          if ((a ^ b) == (x & y)) t[p.flat_index({x * 2 + a, y * 2 + b})] = 0.5;
  return JointState(std::move(p), std::move(t));
}

// System 2 outputs system 1's input; system 1 outputs a fair coin.
JointState one_way_box(const SpaceHandle& box) {
  std::vector<double> t(16, 0.0);
  ProductSpace p = power(box, 2);
  for (std::size_t x = 0; x < 2; ++x)
    for (std::size_t y = 0; y < 2; ++y)
      for (std::size_t a = 0; a < 2; ++a) t[p.flat_index({x * 2 + a, y * 2 + x})] = 0.5;
  return JointState(std::move(p), std::move(t));
}

int demo_pr_box(const Options& o, std::ostream& out) {
  const auto box = share(make_process(2, 2));
  const auto pr = pr_box(box);
  const auto ns = check_nonsignalling(pr, o.tol);
  const auto frame = build_frame(box, o.tol);
  const auto coords = tensor_coordinates(frame, pr, o.tol);
  const auto back = reconstruct_tensor({frame, frame}, coords);
  double err = 0.0;
  for (std::size_t i = 0; i < back.size(); ++i) err = std::max(err, std::abs(back[i] - pr.tensor()[i]));
  const auto m1 = marginal(pr, {0}, o.tol);
  const auto fit = recover_mixture(pr);

  const auto one_way = one_way_box(box);
  const auto ns_one_way = check_nonsignalling(one_way, o.tol);
  bool keep1_ok = true;
  std::string keep2_error;
  try {
    (void)marginal(one_way, {0}, o.tol);
  } catch (const SignallingState&) {
    keep1_ok = false;
  }
  try {
    (void)marginal(one_way, {1}, o.tol);
  } catch (const SignallingState& e) {
    keep2_error = e.what();
  }
  const bool ok = ns.pass && !ns_one_way.pass && keep1_ok && !keep2_error.empty() && err <= 1e-9;

  if (o.json) {
    out << json{{"pr_box", {{"nonsignalling", ns_json(ns)},
                            {"marginal_system1", m1.tensor()},
                            {"frame_dimension", frame.d()},
                            {"coordinate_roundtrip_error", err},
                            {"product_mixture_residual", fit.residual}}},
                {"one_way", {{"nonsignalling", ns_json(ns_one_way)},
                             {"marginal_keep_1", keep1_ok ? "defined" : "error"},
                             {"marginal_keep_2", keep2_error.empty() ? "defined" : keep2_error}}},
                {"pass", ok}}
               .dump(2)
        << "\n";
  } else {
    out << "PR box on process(2,2) x process(2,2)\n";
    print_ns(ns, out);
    out << "  marginal of system 1:";
    for (double v : m1.tensor()) out << ' ' << v;
    out << "\n  frame dimension " << frame.d() << ", coordinate round-trip error " << sci(err) << "\n";
    out << "  best mixture of product states: residual " << sci(fit.residual) << " (not a de Finetti state)\n";
    out << "one-way signalling box (system 2 outputs system 1's input)\n";
    print_ns(ns_one_way, out);
    out << "  marginal keeping system 1: " << (keep1_ok ? "defined" : "error") << "\n";
    out << "  marginal keeping system 2: " << (keep2_error.empty() ? "defined" : keep2_error) << "\n";
  }
  return ok ? kOk : kCheckFailed;
}

int demo_rebit(const Options& o, std::ostream& out) {
  const std::size_t n = o.n ? o.n : 2;
  const auto r = quantum::rebit_counterexample(n, o.grid);
  const bool ok = r.real_symmetric && r.permutation_symmetric && r.trace_consistency <= 1e-9 &&
                  r.restricted_embedding_gap <= 1e-9 && r.recovery_residual <= 1e-9 && r.recovered_delta_on_mixed &&
                  std::abs(r.correlator - 1.0) <= 1e-9 && std::abs(r.best_real_product_correlator) <= 1e-9;
  if (o.json) {
    out << json{{"n", r.n},
                {"grid", r.grid},
                {"max_imaginary", r.max_imaginary},
                {"real_symmetric", r.real_symmetric},
                {"permutation_symmetric", r.permutation_symmetric},
                {"trace_consistency", r.trace_consistency},
                {"restricted_embedding_gap", r.restricted_embedding_gap},
                {"recovery_residual", r.recovery_residual},
                {"recovered_mixed_weight", r.recovered_mixed_weight},
                {"correlator", r.correlator},
                {"best_real_product_correlator", r.best_real_product_correlator},
                {"gap", r.gap},
                {"pass", ok}}
               .dump(2)
        << "\n";
  } else {
    out << "rebit counterexample, n = " << r.n << ", grid = " << r.grid << "\n";
    out << "  real symmetric: " << (r.real_symmetric ? "yes" : "no")
        << ", permutation symmetric: " << (r.permutation_symmetric ? "yes" : "no")
        << ", partial-trace consistency " << sci(r.trace_consistency) << "\n";
    out << "  x/z statistics equal those of (I/2)^n to " << sci(r.restricted_embedding_gap)
        << "; recovered weight on I/2 = " << r.recovered_mixed_weight << " (residual " << sci(r.recovery_residual)
        << ")\n";
    out << "  Tr(sy x sy omega^2) = " << r.correlator << ", best over real product mixtures = "
        << r.best_real_product_correlator << ", gap = " << r.gap << "\n";
  }
  return ok ? kOk : kCheckFailed;
}

int demo_fig1(const Options& o, std::ostream& out) {
  const auto space = share(make_fig1());
  const auto verts = vertices(space);
  const auto frame = build_frame(space, o.tol);
  if (o.json) {
    json vs = json::array();
    for (const auto& v : verts) vs.push_back(std::vector<double>(v.probs().data(), v.probs().data() + v.probs().size()));
    out << json{{"space", io::space_to_json(*space)},
                {"dimension", frame.d()},
                {"vertices", vs},
                {"frame", io::frame_to_json(frame)},
                {"greechie", export_greechie(*space)}}
               .dump(2)
        << "\n";
  } else {
    out << "valid: " << space->outcome_count() << " outcomes, " << space->test_count() << " tests\n";
    out << "dimension: " << frame.d() << ", vertices: " << verts.size() << ", frame shift c = " << frame.shift()
        << "\n";
    out << export_greechie(*space);
  }
  return kOk;
}

int cmd_demo(const Options& o, std::ostream& out) {
  if (o.demo == "pr-box") return demo_pr_box(o, out);
  if (o.demo == "rebit") return demo_rebit(o, out);
  if (o.demo == "fig1") return demo_fig1(o, out);
  throw InvalidArgument("unknown demo \"" + o.demo + "\" (choose pr-box, rebit, fig1)");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Options o;
  CLI::App app{"Finite test spaces: state polytopes, frames, nonsignalling checks and de Finetti recovery"};
  app.name("finetti");
  app.require_subcommand(1);
  app.fallthrough();
  app.add_flag("--json", o.json, "Emit machine-readable JSON");
  app.add_option("--tol", o.tol, "Numerical tolerance")->check(CLI::PositiveNumber);
  app.add_option("--seed", o.seed, "Seed for random support states");

  auto file = [&](CLI::App* sub, const char* what) { sub->add_option("file", o.files, what)->required()->expected(1); };
  file(app.add_subcommand("validate", "Check test-space invariants"), "test-space JSON");
  file(app.add_subcommand("dim", "Dimension of the span of states"), "test-space JSON");
  file(app.add_subcommand("frame", "Informationally complete frame"), "test-space JSON");
  file(app.add_subcommand("greechie", "Greechie diagram as DOT"), "test-space JSON");
  file(app.add_subcommand("check-ns", "Nonsignalling check of a joint state"), "joint-state JSON");
  auto* exch = app.add_subcommand("check-exchangeable", "Exchangeability of a prefix omega^1..omega^N");
  exch->add_option("files", o.files, "joint-state JSON files, one per n")->required();
  auto* rec = app.add_subcommand("recover", "Recover a de Finetti mixture from a joint state");
  rec->add_option("file", o.files, "joint-state JSON")->required()->expected(1);
  rec->add_option("--n", o.n, "Use the marginal on the first n systems");
  rec->add_option("--support", o.support, "JSON file {\"states\": [[probs]...]} of extra candidate states");
  rec->add_option("--samples", o.samples, "Random interior candidate states");
  auto* post = app.add_subcommand("posterior", "Bayesian update of a mixture");
  post->add_option("files", o.files, "mixture JSON, observations JSON")->required()->expected(2);
  auto* demo = app.add_subcommand("demo", "Built-in examples");
  demo->add_option("name", o.demo, "pr-box | rebit | fig1")->required();
  demo->add_option("--grid", o.grid, "Bloch-circle grid resolution (rebit)");
  demo->add_option("--n", o.n, "Number of systems (rebit)");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << "\n" << app.help();
    return kUsage;
  }

  const std::string verb = app.get_subcommands().front()->get_name();
  try {
    if (verb == "validate") return cmd_validate(o, out);
    if (verb == "dim") return cmd_dim(o, out);
    if (verb == "frame") return cmd_frame(o, out);
    if (verb == "greechie") return cmd_greechie(o, out);
    if (verb == "check-ns") return cmd_check_ns(o, out);
    if (verb == "check-exchangeable") return cmd_check_exchangeable(o, out);
    if (verb == "recover") return cmd_recover(o, out);
    if (verb == "posterior") return cmd_posterior(o, out);
    if (verb == "demo") return cmd_demo(o, out);
  } catch (const ParseError& e) {
    err << "parse error: " << e.what() << "\n";
    return kUsage;
  } catch (const InvalidArgument& e) {
    err << "error: " << e.what() << "\n";
    return verb == "validate" ? kCheckFailed : kUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kCheckFailed;
  }
  return kUsage;
}

}  // namespace finetti::cli
