#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "finetti/composite.hpp"
#include "finetti/definetti.hpp"
#include "finetti/quantum.hpp"
#include "finetti/state_space.hpp"
#include "finetti/test_space.hpp"

// JSON documents:
//   space    {"outcomes": [str...], "tests": [[str...]...]}
//   state    {"space": <space doc | path>, "probs": [num...]}
//   joint    {"factors": [<space doc | path>...], "tensor": [num...]}   row-major, system 1 slowest
//   mixture  {"space": <space doc | path>, "components": [{"weight": num, "probs": [num...]}...]}
//   frame    {"d": int, "c": num, "members": [[num...]...]}
//   recovery {"residual": num, "unique": bool, "components": [{"weight", "probs"}...]}
//   density  {"dim": int, "re": [[num...]...], "im": [[num...]...]}
//   observations {"observations": [{"test": int, "outcome": str | int}...]}
//
// Paths inside documents are resolved relative to `base`.
// Every reader throws ParseError carrying a JSON pointer or byte offset.

namespace finetti::io {

using nlohmann::json;

json parse_json(const std::string& text);
json load_json_file(const std::filesystem::path& path);

TestSpace space_from_json(const json& doc, const std::filesystem::path& base = {}, const std::string& where = "");
json space_to_json(const TestSpace& space);
TestSpace read_space(const std::string& text);
std::string write_space(const TestSpace& space);

State state_from_json(const json& doc, const std::filesystem::path& base = {}, double tol = kTol);
json state_to_json(const State& state);

JointState joint_from_json(const json& doc, const std::filesystem::path& base = {}, double tol = kTol);
json joint_to_json(const JointState& js);

Mixture mixture_from_json(const json& doc, const std::filesystem::path& base = {}, double tol = kTol);
json mixture_to_json(const Mixture& mixture);

json frame_to_json(const Frame& frame);
Frame frame_from_json(const json& doc, const SpaceHandle& space);

json recovery_to_json(const RecoveryResult& result);

quantum::DensityOperator density_from_json(const json& doc, double tol = 1e-9);
json density_to_json(const quantum::DensityOperator& rho);

std::vector<Observation> observations_from_json(const json& doc, const TestSpace& space);

}  // namespace finetti::io
