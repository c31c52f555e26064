#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <functional>

#include "finetti/errors.hpp"
#include "finetti/io.hpp"
#include "finetti/random.hpp"
#include "oracles.hpp"

using namespace finetti;
using io::json;

namespace {
std::string pointer_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ParseError& e) {
    return e.location();
  }
  return "<no error>";
}
}  // namespace

TEST_CASE("state and joint documents") {
  const auto doc = json::parse(R"({"space":{"outcomes":["a","b"],"tests":[["a","b"]]},"probs":[0.25,0.75]})");
  const auto s = io::state_from_json(doc);
  CHECK(s[1] == 0.75);
  CHECK(io::state_to_json(s) == doc);

  CHECK(pointer_of([] { (void)io::state_from_json(json::parse(R"({"space":{"outcomes":["a","b"],"tests":[["a","b"]]},"probs":[0.25]})")); }) ==
        "/probs");
  CHECK(pointer_of([] { (void)io::state_from_json(json::parse(R"({"space":{"outcomes":["a","b"],"tests":[["a","b"]]},"probs":[0.5,"x"]})")); }) ==
        "/probs/1");
  CHECK_THROWS_AS(io::state_from_json(json::parse(R"({"space":{"outcomes":["a","b"],"tests":[["a","b"]]},"probs":[0.5,0.6]})")),
                  ParseError);

  const auto pr = oracle::pr_box();
  const auto back = io::joint_from_json(io::joint_to_json(pr));
  CHECK(back.tensor() == pr.tensor());
  CHECK(back.product() == pr.product());
  CHECK(back.product().factors()[0] == back.product().factors()[1]);
}

TEST_CASE("space paths resolve relative to the document") {
  const auto dir = std::filesystem::temp_directory_path() / "finetti_io_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bit.space.json") << io::write_space(make_classical(2));
  const auto doc = json::parse(R"({"factors":["bit.space.json","bit.space.json"],"tensor":[0.5,0,0,0.5]})");
  const auto js = io::joint_from_json(doc, dir);
  CHECK(js.n() == 2);
  CHECK(js.product().factor(0) == make_classical(2));
  CHECK_THROWS_AS(io::joint_from_json(json::parse(R"({"factors":["missing.json"],"tensor":[1]})"), dir), ParseError);
  std::filesystem::remove_all(dir);
}

TEST_CASE("mixture, frame and recovery documents") {
  const auto f = share(make_fig1());
  Rng rng(42);
  const auto m = random_vertex_mixture(vertices(f), 3, rng);
  const auto back = io::mixture_from_json(io::mixture_to_json(m));
  REQUIRE(back.size() == m.size());
  for (std::size_t k = 0; k < m.size(); ++k) {
    CHECK(back.components()[k].weight == m.components()[k].weight);
    CHECK(back.components()[k].state.probs() == m.components()[k].state.probs());
  }

  const auto fr = build_frame(f);
  const auto fj = io::frame_to_json(fr);
  CHECK(fj["d"] == 5);
  const auto fb = io::frame_from_json(fj, f);
  CHECK(fb.covectors() == fr.covectors());
  CHECK(fb.shift() == fr.shift());

  const auto r = recover_mixture(generate_exchangeable(m, 2));
  const auto rj = io::recovery_to_json(r);
  CHECK(rj.contains("residual"));
  CHECK(rj["unique"].is_boolean());
  CHECK(rj["components"].size() == r.mixture.size());
}

TEST_CASE("density and observation documents") {
  const quantum::DensityOperator rho((quantum::identity(2) + quantum::pauli_y()) / 2.0);
  const auto j = io::density_to_json(rho);
  CHECK(j["dim"] == 2);
  CHECK(j["im"][0][1] == -0.5);
  CHECK(io::density_from_json(j).matrix() == rho.matrix());
  CHECK(pointer_of([] { (void)io::density_from_json(json::parse(R"({"dim":2,"re":[[1,0],[0,1]],"im":[[0,0],[0,0]]})")); }) != "<no error>");

  const auto space = make_fig1();
  const auto obs = io::observations_from_json(
      json::parse(R"({"observations":[{"test":0,"outcome":"c"},{"test":2,"outcome":4}]})"), space);
  REQUIRE(obs.size() == 2);
  CHECK(obs[0].outcome.index == 2);
  CHECK(obs[1].test == 2);
  CHECK(obs[1].outcome.index == 4);
  CHECK(pointer_of([&] { (void)io::observations_from_json(json::parse(R"({"observations":[{"test":0,"outcome":"q"}]})"), space); }) ==
        "/observations/0/outcome");
  CHECK(pointer_of([&] { (void)io::observations_from_json(json::parse(R"({"observations":[{"test":9,"outcome":"a"}]})"), space); }) ==
        "/observations/0/test");
}

TEST_CASE("malformed text") {
  CHECK_THROWS_AS(io::parse_json("{"), ParseError);
  CHECK_THROWS_AS(io::load_json_file("/nonexistent/file.json"), ParseError);
}
