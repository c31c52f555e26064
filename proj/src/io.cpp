#include "finetti/io.hpp"

#include <fstream>
#include <sstream>

#include "finetti/errors.hpp"

namespace finetti::io {

namespace fs = std::filesystem;

json parse_json(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("byte " + std::to_string(e.byte), e.what());
  }
}

json load_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return json::parse(buf.str());
  } catch (const json::parse_error& e) {
    throw ParseError(path.string() + " byte " + std::to_string(e.byte), e.what());
  }
}

namespace {

const json& field(const json& doc, const char* key, const std::string& where) {
  if (!doc.is_object()) throw ParseError(where.empty() ? "/" : where, "expected an object");
  auto it = doc.find(key);
  if (it == doc.end()) throw ParseError(where.empty() ? "/" : where, std::string("missing key \"") + key + "\"");
  return *it;
}

std::vector<double> numbers(const json& arr, const std::string& where) {
  if (!arr.is_array()) throw ParseError(where, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (!arr[i].is_number()) throw ParseError(where + "/" + std::to_string(i), "expected a number");
    out.push_back(arr[i].get<double>());
  }
  return out;
}

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json from_vector(const Eigen::VectorXd& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

// A space document may be inline or a path relative to `base`.
std::pair<TestSpace, fs::path> resolve_space(const json& doc, const fs::path& base, const std::string& where) {
  if (doc.is_string()) {
    fs::path p = doc.get<std::string>();
    if (p.is_relative()) p = base / p;
    return {space_from_json(load_json_file(p), p.parent_path(), ""), p.parent_path()};
  }
  return {space_from_json(doc, base, where), base};
}

}  // namespace

TestSpace space_from_json(const json& doc, const fs::path& base, const std::string& where) {
  if (doc.is_string()) return resolve_space(doc, base, where).first;
  const auto& outs = field(doc, "outcomes", where);
  if (!outs.is_array()) throw ParseError(where + "/outcomes", "expected an array of strings");
  std::vector<std::string> labels;
  for (std::size_t i = 0; i < outs.size(); ++i) {
    if (!outs[i].is_string()) throw ParseError(where + "/outcomes/" + std::to_string(i), "expected a string");
    auto label = outs[i].get<std::string>();
    for (std::size_t j = 0; j < labels.size(); ++j)
      if (labels[j] == label)
        throw ParseError(where + "/outcomes/" + std::to_string(i), "duplicate outcome label \"" + label + "\"");
    labels.push_back(std::move(label));
  }
  const auto& tests = field(doc, "tests", where);
  if (!tests.is_array()) throw ParseError(where + "/tests", "expected an array of tests");
  TestSpace lookup(labels, {});
  std::vector<Test> family;
  for (std::size_t t = 0; t < tests.size(); ++t) {
    const std::string tw = where + "/tests/" + std::to_string(t);
    if (!tests[t].is_array()) throw ParseError(tw, "expected an array of outcome labels");
    Test test;
    for (std::size_t k = 0; k < tests[t].size(); ++k) {
      const auto& m = tests[t][k];
      if (!m.is_string()) throw ParseError(tw + "/" + std::to_string(k), "expected a string");
      const auto label = m.get<std::string>();
      const auto idx = lookup.find(label);
      if (idx == TestSpace::npos) throw ParseError(tw + "/" + std::to_string(k), "unknown outcome \"" + label + "\"");
      test.push_back(idx);
    }
    family.push_back(std::move(test));
  }
  return TestSpace(std::move(labels), std::move(family));
}

json space_to_json(const TestSpace& space) {
  json tests = json::array();
  for (const auto& t : space.tests()) {
    json members = json::array();
    for (auto e : t) members.push_back(space.outcomes().at(e));
    tests.push_back(std::move(members));
  }
  return json{{"outcomes", space.outcomes()}, {"tests", std::move(tests)}};
}

TestSpace read_space(const std::string& text) { return space_from_json(parse_json(text)); }

std::string write_space(const TestSpace& space) { return space_to_json(space).dump(2) + "\n"; }

State state_from_json(const json& doc, const fs::path& base, double tol) {
  auto space = share(space_from_json(field(doc, "space", ""), base, "/space"));
  try {
    return State(std::move(space), to_vector(numbers(field(doc, "probs", ""), "/probs")), tol);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError("/probs", e.what());
  }
}

json state_to_json(const State& state) {
  return json{{"space", space_to_json(*state.space())}, {"probs", from_vector(state.probs())}};
}

JointState joint_from_json(const json& doc, const fs::path& base, double tol) {
  const auto& factors = field(doc, "factors", "");
  if (!factors.is_array() || factors.empty()) throw ParseError("/factors", "expected a nonempty array of spaces");
  std::vector<SpaceHandle> spaces;
  for (std::size_t i = 0; i < factors.size(); ++i) {
    auto s = share(space_from_json(factors[i], base, "/factors/" + std::to_string(i)));
    // Identical factors share one handle.
    for (const auto& prev : spaces)
      if (*prev == *s) s = prev;
    spaces.push_back(std::move(s));
  }
  auto tensor = numbers(field(doc, "tensor", ""), "/tensor");
  try {
    return JointState(ProductSpace(std::move(spaces)), std::move(tensor), tol);
  } catch (const Error& e) {
    throw ParseError("/tensor", e.what());
  }
}

json joint_to_json(const JointState& js) {
  json factors = json::array();
  for (const auto& f : js.product().factors()) factors.push_back(space_to_json(*f));
  return json{{"factors", std::move(factors)}, {"tensor", js.tensor()}};
}

Mixture mixture_from_json(const json& doc, const fs::path& base, double tol) {
  auto space = share(space_from_json(field(doc, "space", ""), base, "/space"));
  const auto& comps = field(doc, "components", "");
  if (!comps.is_array()) throw ParseError("/components", "expected an array");
  std::vector<Component> list;
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string w = "/components/" + std::to_string(i);
    const auto& weight = field(comps[i], "weight", w);
    if (!weight.is_number()) throw ParseError(w + "/weight", "expected a number");
    try {
      list.push_back({weight.get<double>(), State(space, to_vector(numbers(field(comps[i], "probs", w), w + "/probs")), tol)});
    } catch (const ParseError&) {
      throw;
    } catch (const Error& e) {
      throw ParseError(w, e.what());
    }
  }
  try {
    return Mixture(space, std::move(list), tol);
  } catch (const Error& e) {
    throw ParseError("/components", e.what());
  }
}

json mixture_to_json(const Mixture& mixture) {
  json comps = json::array();
  for (const auto& c : mixture.components())
    comps.push_back(json{{"weight", c.weight}, {"probs", from_vector(c.state.probs())}});
  return json{{"space", space_to_json(*mixture.space())}, {"components", std::move(comps)}};
}

json frame_to_json(const Frame& frame) {
  json members = json::array();
  for (std::size_t i = 0; i < frame.d(); ++i) members.push_back(from_vector(frame.member(i).covector));
  return json{{"d", frame.d()}, {"c", frame.shift()}, {"members", std::move(members)}};
}

Frame frame_from_json(const json& doc, const SpaceHandle& space) {
  const auto& members = field(doc, "members", "");
  if (!members.is_array() || members.empty()) throw ParseError("/members", "expected a nonempty array");
  const auto d = field(doc, "d", "");
  if (!d.is_number_unsigned() || d.get<std::size_t>() != members.size())
    throw ParseError("/d", "must equal the number of members");
  const auto& c = field(doc, "c", "");
  if (!c.is_number()) throw ParseError("/c", "expected a number");
  Eigen::MatrixXd cov(static_cast<Eigen::Index>(members.size()), static_cast<Eigen::Index>(space->outcome_count()));
  for (std::size_t i = 0; i < members.size(); ++i) {
    const auto row = numbers(members[i], "/members/" + std::to_string(i));
    if (row.size() != space->outcome_count())
      throw ParseError("/members/" + std::to_string(i), "length does not match outcome count");
    cov.row(static_cast<Eigen::Index>(i)) = to_vector(row).transpose();
  }
  return Frame::from_covectors(space, std::move(cov), c.get<double>());
}

json recovery_to_json(const RecoveryResult& result) {
  json comps = json::array();
  for (const auto& c : result.mixture.components())
    comps.push_back(json{{"weight", c.weight}, {"probs", from_vector(c.state.probs())}});
  return json{{"residual", result.residual},
              {"unique", result.unique},
              {"iterations", result.iterations},
              {"components", std::move(comps)}};
}

quantum::DensityOperator density_from_json(const json& doc, double tol) {
  const auto& dim = field(doc, "dim", "");
  if (!dim.is_number_unsigned() || dim.get<std::size_t>() == 0) throw ParseError("/dim", "expected a positive integer");
  const auto n = static_cast<Eigen::Index>(dim.get<std::size_t>());
  quantum::Matrix m = quantum::Matrix::Zero(n, n);
  for (const char* part : {"re", "im"}) {
    const auto& rows = field(doc, part, "");
    const std::string w = std::string("/") + part;
    if (!rows.is_array() || static_cast<Eigen::Index>(rows.size()) != n) throw ParseError(w, "expected dim rows");
    for (Eigen::Index i = 0; i < n; ++i) {
      const auto row = numbers(rows[static_cast<std::size_t>(i)], w + "/" + std::to_string(i));
      if (static_cast<Eigen::Index>(row.size()) != n) throw ParseError(w + "/" + std::to_string(i), "expected dim entries");
      for (Eigen::Index j = 0; j < n; ++j) {
        if (part[0] == 'r')
          m(i, j) += row[static_cast<std::size_t>(j)];
        else
          m(i, j) += quantum::cplx(0.0, row[static_cast<std::size_t>(j)]);
      }
    }
  }
  try {
    return quantum::DensityOperator(std::move(m), tol);
  } catch (const Error& e) {
    throw ParseError("/", e.what());
  }
}

json density_to_json(const quantum::DensityOperator& rho) {
  const auto n = static_cast<Eigen::Index>(rho.dim());
  json re = json::array(), im = json::array();
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> r, c;
    for (Eigen::Index j = 0; j < n; ++j) {
      r.push_back(rho.matrix()(i, j).real());
      c.push_back(rho.matrix()(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return json{{"dim", rho.dim()}, {"re", std::move(re)}, {"im", std::move(im)}};
}

std::vector<Observation> observations_from_json(const json& doc, const TestSpace& space) {
  const auto& list = field(doc, "observations", "");
  if (!list.is_array()) throw ParseError("/observations", "expected an array");
  std::vector<Observation> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string w = "/observations/" + std::to_string(i);
    const auto& t = field(list[i], "test", w);
    if (!t.is_number_unsigned() || t.get<std::size_t>() >= space.test_count())
      throw ParseError(w + "/test", "expected a test index below " + std::to_string(space.test_count()));
    const auto& o = field(list[i], "outcome", w);
    std::size_t idx = TestSpace::npos;
    if (o.is_string())
      idx = space.find(o.get<std::string>());
    else if (o.is_number_unsigned())
      idx = o.get<std::size_t>();
    if (idx >= space.outcome_count()) throw ParseError(w + "/outcome", "unknown outcome " + o.dump());
    if (!space.test_contains(t.get<std::size_t>(), idx))
      throw ParseError(w + "/outcome", "outcome " + o.dump() + " is not in test " + std::to_string(t.get<std::size_t>()));
    out.push_back({t.get<std::size_t>(), {idx}});
  }
  return out;
}

}  // namespace finetti::io
