#include "rial/inner_rgd.hpp"
#include "rial/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace rial;

namespace {

Matrix vec2(double a, double b) {
  Matrix m(2, 1);
  m << a, b;
  return m;
}

// f(X) = ‖X − X*‖²/2 on Stiefel(5,2), X* off the manifold, h = 0.
CompositeProblem stiefel_quadratic() {
  Rng rng(7);
  const Matrix target = 2.0 * gaussian_matrix(5, 2, rng);
  return CompositeProblem(
      Manifold::stiefel(5, 2),
      {[target](const Matrix& x) { return 0.5 * (x - target).squaredNorm(); },
       [target](const Matrix& x) { return Matrix(x - target); }},
      Mapping::zero(5, 2, 1, 1), NonsmoothTerm::zero(1, 1), "quadratic");
}

// The unit circle with f(x) = ⟨c, x⟩ and h = μ‖·‖₁ on A = id. With the
// QR retraction ‖R_x(v) − x‖ ≤ ‖v‖ and ‖R_x(v) − x − v‖ ≤ ‖v‖²/2.
CompositeProblem circle(double mu) {
  const Matrix c = vec2(0.8, -0.3);
  CompositeProblem p(Manifold::stiefel(2, 1),
                     {[c](const Matrix& x) { return inner(c, x); },
                      [c](const Matrix&) { return c; }},
                     Mapping::identity(2, 1), NonsmoothTerm::l1(mu, 2, 1), "circle");
  SmoothnessConstants k;
  k.lf = 0.0;
  k.lh = mu * std::sqrt(2.0);
  k.la0 = 1.0;
  k.la1 = 0.0;
  k.rho_a = 1.0;
  k.alpha1 = 1.0;
  k.alpha2 = 0.5;
  p.set_constants(k);
  return p;
}

}  // namespace

TEST(BbStepsize, Examples) {
  // ⟨s,s⟩/⟨s,y⟩ = 4/2 and ⟨s,y⟩/⟨y,y⟩ = 2/1
  const Matrix s = vec2(2, 0), y = vec2(1, 0);
  EXPECT_DOUBLE_EQ(bb_stepsize(s, y, 0), 2.0);
  EXPECT_DOUBLE_EQ(bb_stepsize(s, y, 1), 2.0);
  // 4/2 and 2/2 tell the two formulas apart
  EXPECT_DOUBLE_EQ(bb_stepsize(s, vec2(1, 1), 0), 2.0);
  EXPECT_DOUBLE_EQ(bb_stepsize(s, vec2(1, 1), 1), 1.0);
  EXPECT_DOUBLE_EQ(bb_stepsize(vec2(1, 1), vec2(1, 0), 2), 2.0);
  EXPECT_DOUBLE_EQ(bb_stepsize(vec2(1, 3), vec2(1, 3), 0), 1.0);
  EXPECT_DOUBLE_EQ(bb_stepsize(vec2(1, 3), vec2(1, 3), 1), 1.0);
}

TEST(BbStepsize, FallbackAndClamp) {
  EXPECT_EQ(bb_stepsize(vec2(0, 0), vec2(0, 0), 0), 1.0);
  EXPECT_EQ(bb_stepsize(vec2(1, 0), vec2(-1, 0), 1), 1.0);
  EXPECT_EQ(bb_stepsize(vec2(1, 0), vec2(1e-20, 0), 0), 1e10);
  EXPECT_EQ(bb_stepsize(vec2(1e-20, 0), vec2(1, 0), 1), 1e-10);
  EXPECT_THROW(bb_stepsize(vec2(1, 0), Matrix::Ones(1, 2), 0), DimensionError);
}

TEST(TheoreticalStepsize, Examples) {
  SmoothnessConstants c;
  c.lf = 1.0;
  c.alpha1 = 1.0;
  EXPECT_DOUBLE_EQ(theoretical_stepsize(c, 1.0, 0.0), 1.0);
  SmoothnessConstants d;
  d.rho_a = 1.0;
  d.la0 = 2.0;
  d.alpha1 = 1.0;
  EXPECT_DOUBLE_EQ(theoretical_stepsize(d, 1.0, 0.0), 0.5);
  EXPECT_LT(theoretical_stepsize(d, 2.0, 0.0), theoretical_stepsize(d, 1.0, 0.0));
  EXPECT_THROW(theoretical_stepsize(SmoothnessConstants{}, 1.0, 0.0), UnsupportedError);
  EXPECT_THROW(theoretical_stepsize(d, 0.0, 0.0), ParameterError);
}

TEST(RgdSolve, QuadraticOnStiefelConverges) {
  const CompositeProblem p = stiefel_quadratic();
  AlOracle o(p);
  const Matrix z = Matrix::Zero(1, 1);
  const InnerResult r = rgd_solve(o, 1.0, z, p.manifold().random_point(3), 1e-6, InnerConfig{});
  EXPECT_TRUE(r.converged());
  EXPECT_LE(r.grad_norm, 1e-6);
  EXPECT_LE(r.iterations, 5000);
  EXPECT_LE(p.manifold().check_feasibility(r.x), 1e-10);
  EXPECT_EQ(r.values.size(), static_cast<std::size_t>(r.iterations) + 1);
  // X* = polar factor of the target is the global minimizer
  Rng rng(7);
  const Matrix target = 2.0 * gaussian_matrix(5, 2, rng);
  Eigen::JacobiSVD<Matrix> svd(target, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Matrix polar = svd.matrixU() * svd.matrixV().transpose();
  EXPECT_LE((r.x - polar).norm(), 1e-5);
}

TEST(RgdSolve, StationaryStartTakesNoSteps) {
  const CompositeProblem p = stiefel_quadratic();
  AlOracle o(p);
  const Matrix z = Matrix::Zero(1, 1);
  const InnerResult first = rgd_solve(o, 1.0, z, p.manifold().random_point(3), 1e-8, InnerConfig{});
  ASSERT_TRUE(first.converged());
  const InnerResult again = rgd_solve(o, 1.0, z, first.x, 1e-6, InnerConfig{});
  EXPECT_EQ(again.iterations, 0);
  EXPECT_TRUE(again.converged());
  EXPECT_TRUE(same_matrix(again.x, first.x));
}

TEST(RgdSolve, IterationCapIsAFlagNotAnError) {
  const CompositeProblem p = stiefel_quadratic();
  AlOracle o(p);
  InnerConfig cfg;
  cfg.max_inner_iters = 2;
  const InnerResult r = rgd_solve(o, 1.0, Matrix::Zero(1, 1), p.manifold().random_point(3), 1e-12, cfg);
  EXPECT_EQ(r.status, InnerStatus::iteration_cap);
  EXPECT_EQ(r.iterations, 2);
}

TEST(RgdSolve, TheoreticalModeDescends) {
  const CompositeProblem p = circle(0.3);
  InnerConfig cfg;
  cfg.stepsize_mode = StepsizeMode::theoretical;
  cfg.max_inner_iters = 20000;
  for (double sigma : {1.0, 10.0, 100.0}) {
    AlOracle o(p);
    const Matrix z = vec2(0.1, -0.2);
    const InnerResult r = rgd_solve(o, sigma, z, vec2(0.0, 1.0), 1e-6, cfg);
    EXPECT_TRUE(r.converged()) << "sigma " << sigma;
    EXPECT_EQ(r.descent_violations, 0);
    for (std::size_t i = 1; i < r.values.size(); ++i) EXPECT_LE(r.values[i], r.values[i - 1]);
  }
}

TEST(RgdSolve, TheoreticalModeNeedsConstants) {
  const CompositeProblem p = stiefel_quadratic();
  AlOracle o(p);
  InnerConfig cfg;
  cfg.stepsize_mode = StepsizeMode::theoretical;
  EXPECT_THROW(rgd_solve(o, 1.0, Matrix::Zero(1, 1), p.manifold().random_point(3), 1e-6, cfg),
               UnsupportedError);
}

TEST(RgdSolve, RejectsBadInputs) {
  const CompositeProblem p = stiefel_quadratic();
  AlOracle o(p);
  const Matrix z = Matrix::Zero(1, 1);
  const Matrix x = p.manifold().random_point(3);
  EXPECT_THROW(rgd_solve(o, 1.0, z, 2.0 * x, 1e-6, InnerConfig{}), FeasibilityError);
  EXPECT_THROW(rgd_solve(o, 1.0, z, x, 0.0, InnerConfig{}), ParameterError);
  InnerConfig bad;
  bad.shrink = 1.0;
  EXPECT_THROW(rgd_solve(o, 1.0, z, x, 1e-6, bad), ParameterError);
}

TEST(RgdSolve, MonotoneLineSearchNeverIncreases) {
  const CompositeProblem p = circle(0.5);
  AlOracle o(p);
  const InnerResult r = rgd_solve(o, 50.0, vec2(0.0, 0.0), vec2(-1.0, 0.0), 1e-8, InnerConfig{});
  EXPECT_TRUE(r.converged());
  for (std::size_t i = 1; i < r.values.size(); ++i) {
    EXPECT_LE(r.values[i], r.values[i - 1] + 1e-13 * std::max(1.0, std::abs(r.values[i - 1])));
  }
}
