#include "sa_lab/error.hpp"
#include "sa_lab/experiments.hpp"
#include "sa_lab/io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

namespace {

using salab::Matrix;
using salab::Vector;

namespace fs = std::filesystem;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("sa_lab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

TEST(Baird, StructureAndFeatureRank) {
  const auto m = salab::build_baird({});
  EXPECT_EQ(m.mdp.n_states(), 7u);
  EXPECT_EQ(m.mdp.n_actions(), 2u);
  EXPECT_EQ(m.features.dim(), 14u);
  EXPECT_EQ(Eigen::FullPivLU<Matrix>(m.features.phi()).rank(), 14);
  for (std::size_t s = 0; s < 7; ++s) {
    EXPECT_DOUBLE_EQ(m.mdp.p(salab::kSolid, s, 6), 1.0);
    EXPECT_DOUBLE_EQ(m.mdp.p(salab::kDashed, s, 6), 0.0);
    for (std::size_t s2 = 0; s2 < 6; ++s2) EXPECT_DOUBLE_EQ(m.mdp.p(salab::kDashed, s, s2), 1.0 / 6.0);
    EXPECT_DOUBLE_EQ(m.behavior(s, 0), 0.5);
  }
  EXPECT_EQ(m.mdp.rewards().cwiseAbs().maxCoeff(), 0.0);
}

TEST(Baird, FeatureLayout) {
  const auto m = salab::build_baird({});
  Vector th(14);
  for (Eigen::Index i = 0; i < 14; ++i) th(i) = static_cast<double>(i + 1) * 0.1;
  auto q = [&](std::size_t s, std::size_t a) { return m.features.phi(s, a).dot(th); };
  for (std::size_t i = 1; i <= 6; ++i) {
    EXPECT_NEAR(q(i - 1, salab::kSolid), th(0) + 2.0 * th(static_cast<Eigen::Index>(i)), 1e-15);
    EXPECT_NEAR(q(i - 1, salab::kDashed), th(7) + 2.0 * th(static_cast<Eigen::Index>(7 + i)), 1e-15);
  }
  EXPECT_NEAR(q(6, salab::kSolid), 2.0 * th(0) + 2.0 * th(7), 1e-15);
  EXPECT_NEAR(q(6, salab::kDashed), 2.0 * th(7), 1e-15);
}

TEST(Baird, RandomRewardsAndNormalization) {
  const auto a = salab::build_baird({salab::RewardMode::UniformRandom, 7, 0.7, false});
  const auto b = salab::build_baird({salab::RewardMode::UniformRandom, 7, 0.7, false});
  const auto c = salab::build_baird({salab::RewardMode::UniformRandom, 8, 0.7, true});
  EXPECT_EQ(a.mdp.rewards(), b.mdp.rewards());
  EXPECT_NE(a.mdp.rewards(), c.mdp.rewards());
  EXPECT_GE(a.mdp.rewards().minCoeff(), 0.0);
  EXPECT_LE(a.mdp.rewards().maxCoeff(), 1.0);
  EXPECT_FALSE(a.features.normalized());
  EXPECT_TRUE(c.features.normalized());
  EXPECT_NEAR(c.features.max_row_norm(), 1.0, 1e-15);
}

TEST(LinearFit, ExactLineAndErrors) {
  const auto f = salab::linear_fit({0, 1, 2, 3}, {1, 3, 5, 7});
  EXPECT_NEAR(f.slope, 2.0, 1e-14);
  EXPECT_NEAR(f.intercept, 1.0, 1e-14);
  EXPECT_NEAR(f.r2, 1.0, 1e-14);
  EXPECT_EQ(f.n, 4u);
  EXPECT_THROW(salab::linear_fit({1}, {1}), salab::InvalidInput);
  EXPECT_THROW(salab::linear_fit({1, 2}, {1}), salab::InvalidInput);
  EXPECT_THROW(salab::linear_fit({2, 2, 2}, {1, 2, 3}), salab::DegenerateFit);
}

TEST(LoglogSlope, PowerLaws) {
  std::vector<std::pair<double, double>> inv;
  std::vector<std::pair<double, double>> flat;
  for (int k = 1; k <= 1000; ++k) {
    inv.emplace_back(k, 1.0 / k);
    flat.emplace_back(k, 4.2);
  }
  EXPECT_NEAR(salab::loglog_slope(inv, 0.5), -1.0, 1e-12);
  EXPECT_NEAR(salab::loglog_slope(flat, 0.5), 0.0, 1e-12);
}

TEST(LoglogSlope, NoisyPowerLaw) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> noise(-0.05, 0.05);
  std::vector<std::pair<double, double>> s;
  for (int k = 1; k <= 2000; ++k) s.emplace_back(k, 3.0 * std::pow(k, -0.6) * std::exp(noise(gen)));
  EXPECT_NEAR(salab::loglog_slope(s, 0.5), -0.6, 0.05);
}

TEST(LoglogSlope, RejectsBadInput) {
  std::vector<std::pair<double, double>> s{{1, 1.0}, {2, 0.5}, {3, 0.0}};
  EXPECT_THROW(salab::loglog_slope(s, 1.0), salab::InvalidInput);
  EXPECT_THROW(salab::loglog_slope({{1, 1.0}}, 1.0), salab::InvalidInput);
  EXPECT_THROW(salab::loglog_slope({{1, 1.0}, {2, 0.5}}, 0.0), salab::InvalidInput);
  EXPECT_THROW(salab::loglog_slope({{0, 1.0}, {2, 0.5}}, 1.0), salab::InvalidInput);
}

salab::Fig1Config small_fig1() {
  salab::Fig1Config c;
  c.n_steps = 2000;
  c.reps = 4;
  return c;
}

TEST(Fig1, DeterministicForFixedSeed) {
  const auto a = salab::fig1_experiment(small_fig1());
  const auto b = salab::fig1_experiment(small_fig1());
  ASSERT_EQ(a.series.size(), 3u);
  for (std::size_t i = 0; i < 3; ++i) {
    ASSERT_EQ(a.series[i].curve.size(), b.series[i].curve.size());
    for (std::size_t j = 0; j < a.series[i].curve.size(); ++j)
      EXPECT_EQ(a.series[i].curve[j].mean, b.series[i].curve[j].mean);
  }
  EXPECT_NEAR(a.theta0_norm, std::sqrt(14.0), 1e-15);
  EXPECT_NEAR(a.series[0].curve.front().mean, std::sqrt(14.0), 1e-12);
  EXPECT_EQ(a.series[0].curve.front().k, 0u);
}

TEST(Fig1, RejectsZeroReps) {
  auto c = small_fig1();
  c.reps = 0;
  EXPECT_THROW(salab::fig1_experiment(c), salab::InvalidInput);
}

TEST(Fig1, StableGammaShrinksTheIterate) {
  auto c = small_fig1();
  c.gammas = {0.7};
  c.n_steps = 10'000;
  const auto r = salab::fig1_experiment(c);
  EXPECT_EQ(r.series[0].diverged, 0u);
  EXPECT_LT(r.series[0].curve.back().mean, r.series[0].curve.front().mean);
}

TEST(Fig1, WritesArtifacts) {
  const fs::path dir = scratch_dir("fig1");
  const auto r = salab::fig1_experiment(small_fig1());
  const auto files = salab::write_fig1(r, dir);
  for (const auto& f : files) EXPECT_TRUE(fs::exists(f)) << f;
  EXPECT_TRUE(fs::exists(dir / "fig1.gp"));
  const auto manifest = salab::io::read_json(dir / "fig1_manifest.json");
  EXPECT_EQ(manifest.at("seeds").at("base_seed").get<int>(), 1);
  EXPECT_EQ(manifest.at("seeds").at("reps").get<int>(), 4);
  fs::remove_all(dir);
}

TEST(Fig2, SingleReplicationFit) {
  salab::Fig2Config c;
  c.n_steps = 5000;
  c.reps = 1;
  const auto r = salab::fig2_experiment(c);
  EXPECT_EQ(r.curve.reps, 1u);
  EXPECT_NEAR(r.curve.points.front().mean, 14.0, 1e-12);
  EXPECT_EQ(r.fit_points, r.curve.points.size());
  EXPECT_LT(r.fit.slope, 0.0);
  const fs::path dir = scratch_dir("fig2");
  salab::write_fig2(r, dir);
  EXPECT_TRUE(fs::exists(dir / "fig2_gamma0.7.csv"));
  EXPECT_TRUE(salab::io::read_json(dir / "fig2_manifest.json").contains("fit"));
  fs::remove_all(dir);
}

salab::Fig34Config small_fig34() {
  salab::Fig34Config c;
  c.xis = {0.6, 1.0};
  c.n_steps = 2000;
  c.reps = 3;
  c.checkpoint_every = 500;
  c.kappa_restarts = 8;
  return c;
}

TEST(Fig34, StartsAtInitialDistance) {
  const auto r = salab::fig34_experiment(small_fig34());
  EXPECT_GT(r.kappa, 0.0);
  EXPECT_NEAR(r.delta_pi, 0.5, 1e-9);
  EXPECT_LE(r.theta_star_residual, 1e-10);
  EXPECT_GE(r.kappa * r.eps_for_xi1, 2.0);
  EXPECT_NEAR(r.h, r.eps_for_xi1 / 0.2, 1e-9 * r.h);
  const double d0 = (Vector::Ones(14) - r.theta_star).squaredNorm();
  for (const auto& s : r.series) {
    EXPECT_NEAR(s.curve.points.front().mean, d0, 1e-12 * d0);
    EXPECT_NEAR(s.schedule.eps(0), 0.2, 1e-12);
  }
}

TEST(Fig34, ExplicitCoefficientMustMeetPremise) {
  auto c = small_fig34();
  c.eps_for_xi1 = 1.0;
  EXPECT_THROW(salab::fig34_experiment(c), salab::PremiseViolation);
  c.eps_for_xi1.reset();
  c.first_step = 1.5;
  EXPECT_THROW(salab::fig34_experiment(c), salab::InvalidInput);
}

TEST(Fig34, UncertifiedGammaIsRejected) {
  auto c = small_fig34();
  c.gamma = 0.9;
  EXPECT_THROW(salab::fig34_experiment(c), salab::PreconditionError);
}

TEST(Fig34, WritesBothFigures) {
  const fs::path dir = scratch_dir("fig34");
  const auto r = salab::fig34_experiment(small_fig34());
  salab::write_fig3(r, dir);
  salab::write_fig4(r, dir);
  for (const char* name : {"fig3.gp", "fig3_manifest.json", "fig4.gp", "fig4_slopes.csv", "fig4_manifest.json"})
    EXPECT_TRUE(fs::exists(dir / name)) << name;
  const std::string slopes = salab::io::read_text(dir / "fig4_slopes.csv");
  EXPECT_EQ(slopes.rfind("xi,slope\n", 0), 0u);
  fs::remove_all(dir);
}

}  // namespace
