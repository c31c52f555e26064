#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cli.hpp"

namespace {
struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = finetti::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string data(const std::string& name) { return std::string(FINETTI_DATA_DIR) + "/" + name; }

bool has(const std::string& text, const std::string& needle) { return text.find(needle) != std::string::npos; }
}  // namespace

TEST_CASE("validate") {
  const auto r = run({"validate", data("fig1.space.json")});
  CHECK(r.code == 0);
  CHECK(has(r.out, "valid: 7 outcomes, 3 tests"));

  const auto dir = std::filesystem::temp_directory_path() / "finetti_cli_test";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "bad.json") << R"({"outcomes":["a","b"],"tests":[["a"]]})";
  const auto bad = run({"validate", (dir / "bad.json").string()});
  CHECK(bad.code == 1);
  CHECK(has(bad.out + bad.err, "not covered"));
  std::ofstream(dir / "broken.json") << R"({"outcomes":["a","b"],"tests":[["a","q"]]})";
  const auto broken = run({"validate", (dir / "broken.json").string()});
  CHECK(broken.code == 2);
  CHECK(has(broken.err, "/tests/0/1"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("usage errors") {
  CHECK(run({}).code == 2);
  CHECK(run({"frobnicate"}).code == 2);
  CHECK(run({"validate"}).code == 2);
  CHECK(run({"demo", "nothing"}).code == 2);
  CHECK(run({"validate", "/no/such/file.json"}).code == 2);
}

TEST_CASE("dim, frame, greechie") {
  const auto d = run({"dim", data("fig1.space.json")});
  CHECK(d.code == 0);
  CHECK(has(d.out, "dimension: 5"));
  const auto f = run({"--json", "frame", data("fig1.space.json")});
  REQUIRE(f.code == 0);
  const auto fj = nlohmann::json::parse(f.out);
  CHECK(fj["d"] == 5);
  CHECK(fj["members"].size() == 5);
  const auto g = run({"greechie", data("fig1.space.json")});
  CHECK(g.code == 0);
  CHECK(has(g.out, "graph greechie {"));
}

TEST_CASE("check-ns") {
  const auto r = run({"check-ns", data("signalling.joint.json")});
  CHECK(r.code == 1);
  CHECK(has(r.out, "systems {2} affected by test choice at {1}"));
  const auto j = run({"check-ns", data("signalling.joint.json"), "--json"});
  CHECK(j.code == 1);
  const auto doc = nlohmann::json::parse(j.out);
  CHECK(doc["pass"] == false);
  CHECK(doc["violations"][0]["source"] == nlohmann::json::array({1}));
  CHECK(doc["violations"][0]["affected"] == nlohmann::json::array({2}));
  CHECK(run({"check-ns", data("exchangeable_n3.joint.json")}).code == 0);
}

TEST_CASE("check-exchangeable") {
  CHECK(run({"check-exchangeable", data("exchangeable_n3.joint.json")}).code == 0);
  const auto bad = run({"check-exchangeable", data("signalling.joint.json")});
  CHECK(bad.code == 1);
  CHECK(has(bad.out, "exchangeability clause 2"));
}

TEST_CASE("recover") {
  const auto r = run({"--json", "recover", data("exchangeable_n3.joint.json"), "--n", "3"});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  CHECK(doc["residual"].get<double>() <= 1e-7);
  CHECK(doc["components"].size() == 2);
  double w = 0.0;
  for (const auto& c : doc["components"]) w = std::max(w, c["weight"].get<double>());
  CHECK(w == doctest::Approx(0.75).epsilon(1e-6));

  const auto two = run({"--json", "recover", data("exchangeable_n3.joint.json"), "--n", "2"});
  CHECK(two.code == 0);
  CHECK(run({"recover", data("signalling.joint.json")}).code == 1);
  CHECK(run({"recover", data("exchangeable_n3.joint.json"), "--n", "5"}).code == 2);
}

TEST_CASE("posterior") {
  const auto r = run({"--json", "posterior", data("fig1.mixture.json"), data("fig1.observations.json")});
  REQUIRE(r.code == 0);
  const auto doc = nlohmann::json::parse(r.out);
  // Likelihoods 1/16 and 1 under a uniform prior.
  CHECK(doc["components"][0]["weight"].get<double>() == doctest::Approx(1.0 / 17.0).epsilon(1e-12));
  CHECK(doc["components"][1]["weight"].get<double>() == doctest::Approx(16.0 / 17.0).epsilon(1e-12));
}

TEST_CASE("demos") {
  const auto pr = run({"demo", "pr-box"});
  CHECK(pr.code == 0);
  CHECK(has(pr.out, "nonsignalling: pass"));
  CHECK(has(pr.out, "signalling state"));
  const auto rebit = run({"--json", "demo", "rebit"});
  REQUIRE(rebit.code == 0);
  const auto doc = nlohmann::json::parse(rebit.out);
  CHECK(doc["gap"].get<double>() == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(run({"demo", "rebit", "--n", "3"}).code == 2);
  CHECK(run({"demo", "fig1"}).code == 0);
}

TEST_CASE("recover with a support file") {
  const auto dir = std::filesystem::temp_directory_path() / "finetti_cli_support";
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "ok.json") << R"({"states":[[0.5,0.5,0.5,0.5]]})";
  std::ofstream(dir / "bad.json") << R"({"states":[[0.5,0.5,0.5]]})";
  CHECK(run({"recover", data("exchangeable_n3.joint.json"), "--support", (dir / "ok.json").string(), "--samples", "3"})
            .code == 0);
  CHECK(run({"recover", data("exchangeable_n3.joint.json"), "--support", (dir / "bad.json").string()}).code == 2);
  std::filesystem::remove_all(dir);
}
