#pragma once

#include "sa_lab/markov.hpp"
#include "sa_lab/rl.hpp"
#include "sa_lab/sa.hpp"
#include "sa_lab/stability.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace salab::io {

using nlohmann::json;

std::string read_text(const std::filesystem::path& path);
json read_json(const std::filesystem::path& path);
void write_text(const std::filesystem::path& path, const std::string& text);
void write_json(const std::filesystem::path& path, const json& doc);

// {"n": int, "transition": [[...], ...], "labels": [...]}
FiniteMarkovChain chain_from_json(const json& doc);

// {"n_states", "n_actions", "gamma", "transition": [a][s][s'], "reward": [s][a], "r_max"?}
Mdp mdp_from_json(const json& doc);

// {"d": int, "phi": [[...], ...]}
LinearFeatures features_from_json(const json& doc, std::size_t n_states, std::size_t n_actions);

// Comma-separated rows of numbers, one row per (s, a).
LinearFeatures features_from_csv(const std::string& text, std::size_t n_states, std::size_t n_actions);

// Dispatches on the extension: .csv is a plain matrix, anything else JSON.
LinearFeatures load_features(const std::filesystem::path& path, std::size_t n_states, std::size_t n_actions);

// {"probs": [[...], ...]} or the string "uniform".
Policy policy_from_json(const json& doc, std::size_t n_states, std::size_t n_actions);

// `spec` is either the literal "uniform" or a path to a policy document.
Policy load_policy(const std::string& spec, std::size_t n_states, std::size_t n_actions);

// Linear SA problem F(x,θ) = A_x(θ − θ*) + b_x:
// {"chain": {...}, "A": [x][i][j], "b": [x][i], "theta_star": [...]}
SaProblem linear_problem_from_json(const json& doc);

Vector vector_from_json(const json& doc, const std::string& field);
json to_json(const Vector& v);
json to_json(const StabilityReport& report);

// Header `k,value,stderr`, one row per point.
std::string curve_csv(const MseCurve& curve);

// Rows of doubles under a header; numbers printed with round-trip precision.
std::string csv(const std::vector<std::string>& header, const std::vector<std::vector<double>>& rows);

// Shortest text that reads back to the same double.
std::string format_double(double v);

}  // namespace salab::io
