#include "sa_lab/error.hpp"
#include "sa_lab/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <limits>
#include <random>

namespace {

using salab::io::json;
using salab::Vector;

namespace fs = std::filesystem;

// The thrown message must name the offending field.
template <class Fn>
void expect_field_error(Fn fn, const std::string& field) {
  try {
    fn();
    FAIL() << "expected InvalidInput naming " << field;
  } catch (const salab::InvalidInput& e) {
    EXPECT_NE(std::string(e.what()).find(field), std::string::npos) << e.what();
  }
}

TEST(ChainJson, LoadsAndValidates) {
  const auto c = salab::io::chain_from_json(json::parse(R"({"n": 2, "transition": [[0.9, 0.1], [0.2, 0.8]], "labels": ["a", "b"]})"));
  EXPECT_EQ(c.size(), 2u);
  EXPECT_DOUBLE_EQ(c.transition()(1, 0), 0.2);
  expect_field_error([] { salab::io::chain_from_json(json::parse(R"({"transition": [[1]]})")); }, "'n'");
  expect_field_error([] { salab::io::chain_from_json(json::parse(R"({"n": 2, "transition": [[1]]})")); }, "transition");
  expect_field_error([] { salab::io::chain_from_json(json::parse(R"({"n": 2, "transition": [[0.5, 0.6], [0.5, 0.5]]})")); },
                     "transition");
  expect_field_error([] { salab::io::chain_from_json(json::parse(R"({"n": -1, "transition": [[1]]})")); }, "'n'");
  expect_field_error([] { salab::io::chain_from_json(json::parse(R"({"n": 1, "transition": [[1]], "labels": []})")); },
                     "labels");
}

TEST(MdpJson, LoadsAndValidates) {
  const char* good = R"({"n_states": 1, "n_actions": 2, "gamma": 0.5, "transition": [[[1]], [[1]]], "reward": [[0.1, 0.4]]})";
  const auto m = salab::io::mdp_from_json(json::parse(good));
  EXPECT_EQ(m.n_actions(), 2u);
  EXPECT_DOUBLE_EQ(m.r_max(), 0.4);
  expect_field_error([] { salab::io::mdp_from_json(json::parse(R"({"n_states": 1, "n_actions": 1, "transition": [[[1]]], "reward": [[0]]})")); },
                     "gamma");
  expect_field_error(
      [] { salab::io::mdp_from_json(json::parse(R"({"n_states": 1, "n_actions": 2, "gamma": 0.5, "transition": [[[1]]], "reward": [[0, 0]]})")); },
      "transition");
  expect_field_error(
      [] { salab::io::mdp_from_json(json::parse(R"({"n_states": 1, "n_actions": 1, "gamma": 0.5, "transition": [[[1]]], "reward": [[0, 1]]})")); },
      "reward");
  EXPECT_THROW(salab::io::mdp_from_json(json::parse(R"({"n_states": 1, "n_actions": 1, "gamma": 1.5, "transition": [[[1]]], "reward": [[0]]})")),
               salab::InvalidModel);
}

TEST(FeaturesIo, JsonAndCsv) {
  const auto f = salab::io::features_from_json(json::parse(R"({"d": 1, "phi": [[1], [0.5]]})"), 1, 2);
  EXPECT_EQ(f.dim(), 1u);
  expect_field_error([] { salab::io::features_from_json(json::parse(R"({"d": 2, "phi": [[1], [0.5]]})"), 1, 2); }, "phi");
  const auto g = salab::io::features_from_csv("1,0\n0,1\n\n1,1\n0.5,2\n", 2, 2);
  EXPECT_EQ(g.dim(), 2u);
  EXPECT_DOUBLE_EQ(g.phi(1, 1)(1), 2.0);
  EXPECT_THROW(salab::io::features_from_csv("1,0\n0,x\n", 1, 2), salab::InvalidInput);
  EXPECT_THROW(salab::io::features_from_csv("1,0\n0\n", 1, 2), salab::InvalidInput);
  EXPECT_THROW(salab::io::features_from_csv("", 1, 2), salab::InvalidInput);
}

TEST(PolicyIo, UniformAndTable) {
  EXPECT_DOUBLE_EQ(salab::io::policy_from_json(json("uniform"), 2, 4)(1, 3), 0.25);
  const auto p = salab::io::policy_from_json(json::parse(R"({"probs": [[1, 0], [0.3, 0.7]]})"), 2, 2);
  EXPECT_DOUBLE_EQ(p(1, 1), 0.7);
  EXPECT_THROW(salab::io::policy_from_json(json("greedy"), 2, 2), salab::InvalidInput);
  expect_field_error([] { salab::io::policy_from_json(json::parse(R"({"probs": [[1, 0]]})"), 2, 2); }, "probs");
}

TEST(LinearProblemJson, LoadsAndValidates) {
  const char* doc = R"({"chain": {"n": 2, "transition": [[0.5, 0.5], [0.5, 0.5]]},
    "A": [[[-1]], [[-2]]], "b": [[0.1], [-0.1]], "theta_star": [0.5]})";
  const auto p = salab::io::linear_problem_from_json(json::parse(doc));
  EXPECT_EQ(p.dim(), 1u);
  ASSERT_TRUE(p.theta_star().has_value());
  EXPECT_DOUBLE_EQ((*p.theta_star())(0), 0.5);
  expect_field_error([] { salab::io::linear_problem_from_json(json::parse(R"({"chain": {"n": 1, "transition": [[1]]}, "A": [[[-1]]], "b": [[0]]})")); },
                     "theta_star");
  expect_field_error(
      [] {
        salab::io::linear_problem_from_json(
            json::parse(R"({"chain": {"n": 1, "transition": [[1]]}, "A": [[[-1]]], "b": [[0, 1]], "theta_star": [0]})"));
      },
      "b[0]");
  expect_field_error(
      [] {
        salab::io::linear_problem_from_json(
            json::parse(R"({"chain": {"n": 1, "transition": [[1]]}, "A": [[[-1]]], "b": [["x"]], "theta_star": [0]})"));
      },
      "b[0]");
}

TEST(Files, ReadErrors) {
  const fs::path missing = fs::temp_directory_path() / "sa_lab_io_missing.json";
  fs::remove(missing);
  EXPECT_THROW(salab::io::read_json(missing), salab::InvalidInput);
  const fs::path bad = fs::temp_directory_path() / "sa_lab_io_bad.json";
  salab::io::write_text(bad, "{not json");
  EXPECT_THROW(salab::io::read_json(bad), salab::InvalidInput);
  salab::io::write_json(bad, json{{"x", 1}});
  EXPECT_EQ(salab::io::read_json(bad).at("x").get<int>(), 1);
  fs::remove(bad);
}

TEST(FormatDouble, RoundTrips) {
  EXPECT_EQ(salab::io::format_double(0.7), "0.7");
  EXPECT_EQ(salab::io::format_double(2.0), "2");
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) * std::pow(10.0, (i % 40) - 20);
    EXPECT_EQ(std::strtod(salab::io::format_double(v).c_str(), nullptr), v);
  }
  EXPECT_EQ(std::strtod(salab::io::format_double(std::numeric_limits<double>::denorm_min()).c_str(), nullptr),
            std::numeric_limits<double>::denorm_min());
}

TEST(Csv, HeaderAndRows) {
  EXPECT_EQ(salab::io::csv({"a", "b"}, {{1.0, 0.5}, {2.0, -3.0}}), "a,b\n1,0.5\n2,-3\n");
  salab::MseCurve c;
  c.points.push_back({0, 4.0, 0.0, 3});
  c.points.push_back({10, 0.25, 0.125, 3});
  EXPECT_EQ(salab::io::curve_csv(c), "k,value,stderr\n0,4,0\n10,0.25,0.125\n");
}

TEST(ToJson, VectorAndReport) {
  Vector v(3);
  v << 1.0, -0.5, 0.25;
  EXPECT_EQ(salab::io::to_json(v).dump(), "[1.0,-0.5,0.25]");
  salab::StabilityReport r;
  r.gamma = 0.7;
  r.delta_pi = 0.5;
  r.gamma_threshold = std::sqrt(0.5);
  r.h_plus = -0.25;
  const json j = salab::io::to_json(r);
  EXPECT_TRUE(j.at("certified").get<bool>());
  EXPECT_DOUBLE_EQ(j.at("h_plus").get<double>(), -0.25);
  EXPECT_TRUE(j.at("h_minus").is_null());
  EXPECT_TRUE(j.at("gas_verdict").is_null());
}

}  // namespace
