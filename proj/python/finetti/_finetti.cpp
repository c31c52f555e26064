#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "finetti/composite.hpp"
#include "finetti/definetti.hpp"
#include "finetti/errors.hpp"
#include "finetti/io.hpp"
#include "finetti/quantum.hpp"
#include "finetti/state_space.hpp"
#include "finetti/test_space.hpp"

namespace py = pybind11;
using namespace finetti;

namespace {

using Space = std::shared_ptr<TestSpace>;

// TestSpace has no mutators, so handing Python a non-const pointer is safe.
Space to_py(const SpaceHandle& h) { return std::const_pointer_cast<TestSpace>(h); }

Eigen::MatrixXd stack(const std::vector<State>& states, std::size_t cols) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(states.size()), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < states.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = states[i].probs().transpose();
  return m;
}

std::vector<State> unstack(const SpaceHandle& space, const Eigen::MatrixXd& rows, double tol) {
  std::vector<State> out;
  for (Eigen::Index i = 0; i < rows.rows(); ++i) out.emplace_back(space, rows.row(i).transpose(), tol);
  return out;
}

Mixture make_mixture(const Space& space, const std::vector<double>& weights, const Eigen::MatrixXd& states, double tol) {
  if (weights.size() != static_cast<std::size_t>(states.rows()))
    throw DimensionMismatch("mixture: " + std::to_string(weights.size()) + " weights for " +
                            std::to_string(states.rows()) + " states");
  const auto st = unstack(space, states, tol);
  std::vector<Component> comps;
  for (std::size_t k = 0; k < st.size(); ++k) comps.push_back({weights[k], st[k]});
  return Mixture(space, comps, tol);
}

py::tuple mixture_tuple(const Mixture& m) {
  std::vector<double> w;
  std::vector<State> s;
  for (const auto& c : m.components()) {
    w.push_back(c.weight);
    s.push_back(c.state);
  }
  return py::make_tuple(w, stack(s, m.space()->outcome_count()));
}

py::dict ns_report(const NonsignallingReport& r) {
  py::list v;
  for (const auto& s : r.violations)
    v.append(py::dict(py::arg("source") = s.source, py::arg("affected") = s.affected, py::arg("magnitude") = s.magnitude));
  return py::dict(py::arg("passed") = r.pass, py::arg("worst") = r.worst, py::arg("violations") = v);
}

JointState make_joint(const std::vector<Space>& factors, const std::vector<double>& tensor, double tol) {
  std::vector<SpaceHandle> h(factors.begin(), factors.end());
  return JointState(ProductSpace(h), tensor, tol);
}

}  // namespace

PYBIND11_MODULE(_finetti, m) {
  m.doc() = "Finite test spaces, frames, nonsignalling checks and de Finetti recovery";

  auto base = py::register_exception<Error>(m, "FinettiError", PyExc_RuntimeError);
  py::register_exception<InvalidArgument>(m, "InvalidArgument", base.ptr());
  py::register_exception<DimensionMismatch>(m, "DimensionMismatch", base.ptr());
  py::register_exception<EmptyStateSpace>(m, "EmptyStateSpace", base.ptr());
  py::register_exception<SizeLimitExceeded>(m, "SizeLimitExceeded", base.ptr());
  py::register_exception<NumericalFailure>(m, "NumericalFailure", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SignallingState>(m, "SignallingState", base.ptr());
  py::register_exception<ZeroProbabilityOutcome>(m, "ZeroProbabilityOutcome", base.ptr());
  py::register_exception<ZeroProbabilityObservation>(m, "ZeroProbabilityObservation", base.ptr());
  py::register_exception<ExchangeabilityViolation>(m, "ExchangeabilityViolation", base.ptr());

  py::class_<TestSpace, Space>(m, "TestSpace")
      .def(py::init<std::vector<std::string>, std::vector<Test>>(), py::arg("outcomes"), py::arg("tests"))
      .def_property_readonly("outcomes", &TestSpace::outcomes)
      .def_property_readonly("tests", &TestSpace::tests)
      .def("find", [](const TestSpace& s, const std::string& label) -> py::object {
        const auto i = s.find(label);
        return i == TestSpace::npos ? py::none() : py::cast(i);
      })
      .def("to_json", [](const TestSpace& s) { return io::write_space(s); })
      .def_static("from_json", [](const std::string& text) { return std::make_shared<TestSpace>(io::read_space(text)); })
      .def("__eq__", [](const TestSpace& a, const TestSpace& b) { return a == b; })
      .def("__len__", &TestSpace::outcome_count)
      .def("__repr__", [](const TestSpace& s) {
        return "<TestSpace " + std::to_string(s.outcome_count()) + " outcomes, " + std::to_string(s.test_count()) + " tests>";
      });

  m.def("classical", [](std::size_t d) { return std::make_shared<TestSpace>(make_classical(d)); }, py::arg("d"));
  m.def("process", [](std::size_t d, std::size_t k) { return std::make_shared<TestSpace>(make_process(d, k)); },
        py::arg("d"), py::arg("k"));
  m.def("fig1", [] { return std::make_shared<TestSpace>(make_fig1()); });
  m.def("validate", [](const TestSpace& s) {
    std::vector<std::string> out;
    for (const auto& v : validate(s)) out.push_back(v.message);
    return out;
  });
  m.def("greechie", &export_greechie);
  m.def("dimension", [](const TestSpace& s) { return dimension(s); });
  m.def("vertices", [](const Space& s) { return stack(vertices(s), s->outcome_count()); },
        "Vertices of the state polytope, one per row.");
  m.def("is_state", [](const TestSpace& s, const Eigen::VectorXd& v, double tol) { return is_state(s, v, tol).ok; },
        py::arg("space"), py::arg("probs"), py::arg("tol") = kTol);

  py::class_<Frame>(m, "Frame")
      .def_property_readonly("d", &Frame::d)
      .def_property_readonly("shift", &Frame::shift)
      .def_property_readonly("covectors", &Frame::covectors)
      .def("coordinates",
           [](const Frame& f, const Eigen::VectorXd& v) { return frame_coordinates(f, SpanVector(f.space(), v)); })
      .def("inverse", [](const Frame& f, const Eigen::VectorXd& a) { return inverse_coordinates(f, a).coeffs(); });
  m.def("build_frame", [](const Space& s, double tol) { return build_frame(s, tol); }, py::arg("space"),
        py::arg("tol") = kTol);

  py::class_<JointState>(m, "JointState")
      .def(py::init(&make_joint), py::arg("factors"), py::arg("tensor"), py::arg("tol") = kTol)
      .def_property_readonly("n", &JointState::n)
      .def_property_readonly("shape", [](const JointState& js) { return js.product().shape(); })
      .def_property_readonly("factors", [](const JointState& js) {
        std::vector<Space> out;
        for (const auto& h : js.product().factors()) out.push_back(to_py(h));
        return out;
      })
      .def_property_readonly("tensor", [](const JointState& js) {
        py::array_t<double> a(js.product().shape());
        std::copy(js.tensor().begin(), js.tensor().end(), a.mutable_data());
        return a;
      });
  m.def("direct_product", [](const std::vector<Space>& spaces, const std::vector<Eigen::VectorXd>& probs) {
    if (spaces.size() != probs.size()) throw DimensionMismatch("direct_product: one state per factor");
    std::vector<State> st;
    for (std::size_t i = 0; i < spaces.size(); ++i) st.emplace_back(spaces[i], probs[i]);
    return direct_product(st);
  });
  m.def("check_nonsignalling", [](const JointState& js, double tol) { return ns_report(check_nonsignalling(js, tol)); },
        py::arg("state"), py::arg("tol") = kTol);
  m.def("marginal", &marginal, py::arg("state"), py::arg("keep"), py::arg("tol") = kTol);
  m.def("is_symmetric", [](const JointState& js, double tol) {
    const auto r = is_symmetric(js, tol);
    return py::make_tuple(r.symmetric, r.deviation);
  }, py::arg("state"), py::arg("tol") = kTol);
  m.def("permute", &permute);
  m.def("symmetrize", &symmetrize);

  m.def("generate_exchangeable",
        [](const Space& s, const std::vector<double>& w, const Eigen::MatrixXd& states, std::size_t n) {
          return generate_exchangeable(make_mixture(s, w, states, kTol), n);
        },
        py::arg("space"), py::arg("weights"), py::arg("states"), py::arg("n"));
  m.def("check_exchangeable", [](const std::vector<JointState>& prefix, double tol) {
    const auto r = check_exchangeable(SequencePrefix(prefix), tol);
    std::vector<std::string> failures;
    for (const auto& f : r.failures) failures.push_back(f.message);
    return py::dict(py::arg("prefix_consistent") = r.prefix_consistent, py::arg("worst_deviation") = r.worst_deviation,
                    py::arg("failures") = failures);
  }, py::arg("prefix"), py::arg("tol") = kTol);
  m.def("recover_mixture",
        [](const JointState& js, std::optional<Eigen::MatrixXd> support, bool include_vertices, std::size_t samples,
           std::uint64_t seed, double tol) {
          RecoveryOptions opt;
          if (support) opt.extra_support = unstack(js.product().factors().front(), *support, tol);
          opt.include_vertices = include_vertices;
          opt.interior_samples = samples;
          opt.seed = seed;
          opt.tol = tol;
          const auto r = recover_mixture(js, opt);
          const auto mix = mixture_tuple(r.mixture);
          return py::dict(py::arg("weights") = mix[0], py::arg("states") = mix[1], py::arg("residual") = r.residual,
                          py::arg("unique") = r.unique, py::arg("iterations") = r.iterations);
        },
        py::arg("state"), py::arg("support") = py::none(), py::arg("include_vertices") = true,
        py::arg("interior_samples") = 0, py::arg("seed") = 42, py::arg("tol") = kTol);
  m.def("induced_classical", [](const Frame& f, const JointState& js) {
    const auto p = induced_classical(f, js);
    py::array_t<double> a(std::vector<std::size_t>(p.n, p.d));
    std::copy(p.table.begin(), p.table.end(), a.mutable_data());
    return a;
  });
  m.def("certify_support",
        [](const Space& s, const std::vector<double>& w, const Eigen::MatrixXd& vectors, std::size_t e, std::size_t test,
           std::size_t n) {
          std::vector<WeightedSpanVector> mix;
          for (Eigen::Index i = 0; i < vectors.rows(); ++i)
            mix.push_back({w.at(static_cast<std::size_t>(i)), SpanVector(s, vectors.row(i).transpose())});
          return certify_support(mix, {e}, test, n).never_obtained;
        },
        py::arg("space"), py::arg("weights"), py::arg("vectors"), py::arg("outcome"), py::arg("test"), py::arg("n"));
  m.def("posterior_update",
        [](const Space& s, const std::vector<double>& w, const Eigen::MatrixXd& states,
           const std::vector<std::pair<std::size_t, std::size_t>>& obs) {
          std::vector<Observation> o;
          for (const auto& [t, e] : obs) o.push_back({t, {e}});
          return mixture_tuple(posterior_update(make_mixture(s, w, states, kTol), o));
        },
        py::arg("space"), py::arg("weights"), py::arg("states"), py::arg("observations"));

  m.def("rebit_counterexample", [](std::size_t n, std::size_t grid) {
    const auto r = quantum::rebit_counterexample(n, grid);
    return py::dict(py::arg("n") = r.n, py::arg("grid") = r.grid, py::arg("real_symmetric") = r.real_symmetric,
                    py::arg("permutation_symmetric") = r.permutation_symmetric,
                    py::arg("trace_consistency") = r.trace_consistency,
                    py::arg("restricted_embedding_gap") = r.restricted_embedding_gap,
                    py::arg("recovery_residual") = r.recovery_residual,
                    py::arg("recovered_delta_on_mixed") = r.recovered_delta_on_mixed, py::arg("correlator") = r.correlator,
                    py::arg("best_real_product_correlator") = r.best_real_product_correlator, py::arg("gap") = r.gap);
  }, py::arg("n") = 2, py::arg("grid") = 16);
}
