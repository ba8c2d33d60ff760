#include <cmath>
#include <random>

#include <gtest/gtest.h>
#include <lapacke.h>

#include "rehf/density.hpp"
#include "rehf/errors.hpp"
#include "rehf/jellium.hpp"

using namespace rehf;
using namespace rehf::density;

namespace {

constexpr double kKappa0 = 0.03;

PhysParams params() { return {1.0, jellium::solve_mu(kKappa0, 1.0), kKappa0}; }

RealField smooth_field(const Grid& g, unsigned seed, double amp) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> n;
  RealField f(g);
  for (auto& v : f.values) v = n(gen);
  std::vector<double> d(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) d[i] = 1.0 / ((1.0 + g.g2(i)) * (1.0 + g.g2(i)));
  f = apply_symbol(f, d);
  f *= amp / max_abs(f);
  return f;
}

RealField axis_mode(const Grid& g, int m) {
  RealField f(g);
  const int n = g.n_side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) f[g.index(i, j, k)] = std::cos(2.0 * kPi * m * k / n);
  return f;
}

class DensityTest : public ::testing::Test {
 protected:
  Grid g{1.0, 3, 2};
  PhysParams p = params();
  DensityEvaluator ev{p, g};
  screening::Lsymbol sym = screening::build_L_symbol(g, p);
};

}  // namespace

TEST(Hamiltonian, FreeAndConstant) {
  const Grid g(1.0, 1, 4);
  const auto h0 = build_hamiltonian(RealField(g));
  const auto hc = build_hamiltonian(RealField(g, 0.7));
  const std::size_t n = g.size();
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double d = r == c ? g.g2(r) : 0.0;
      EXPECT_NEAR(std::abs(h0[r * n + c] - d), 0.0, 1e-13);
      EXPECT_NEAR(std::abs(hc[r * n + c] - (r == c ? d - 0.7 : 0.0)), 0.0, 1e-13);
    }
  }
}

TEST(Hamiltonian, HermitianAndSameSpectrumAsGridBasis) {
  const Grid g(1.0, 2, 2);
  const auto phi = smooth_field(g, 1, 0.5);
  auto h = build_hamiltonian(phi);
  const auto n = static_cast<lapack_int>(g.size());
  for (lapack_int r = 0; r < n; ++r)
    for (lapack_int c = 0; c < n; ++c)
      EXPECT_LT(std::abs(h[r * n + c] - std::conj(h[c * n + r])), 1e-13);
  std::vector<double> w(g.size());
  ASSERT_EQ(LAPACKE_zheev(LAPACK_ROW_MAJOR, 'N', 'U', n, reinterpret_cast<lapack_complex_double*>(h.data()),
                          n, w.data()),
            0);
  const DensityEvaluator ev(params(), g);
  const auto s = ev.spectrum(phi, 1e4);
  ASSERT_EQ(s.count(), w.size());
  for (std::size_t i = 0; i < w.size(); ++i) EXPECT_NEAR(s.eigenvalues[i], w[i], 1e-10);
  EXPECT_LT(spectrum_residual(phi, s), 1e-9);
}

TEST(Hamiltonian, OverBudgetIsResourceError) {
  const Grid g(1.0, 3, 6);
  try {
    build_hamiltonian(RealField(g));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Resource);
  }
  EXPECT_THROW(DensityEvaluator(params(), g), Error);
}

TEST_F(DensityTest, JelliumDensityIsKappa0) {
  const auto r = ev.rho(RealField(g));
  for (double v : r.values) EXPECT_NEAR(v, kKappa0, 1e-10 * kKappa0);
  EXPECT_EQ(max_abs(ev.nonlinearity(RealField(g), sym)), 0.0);
}

TEST_F(DensityTest, ConstantPotentialIsGaugeShift) {
  for (double c : {0.1, -0.05}) {
    const auto r = ev.rho(RealField(g, c));
    const double target = jellium::density_A_discrete(ev.mu_h() + c, p, g);
    for (double v : r.values) EXPECT_NEAR(v, target, 1e-10 * target);
  }
}

TEST_F(DensityTest, GaugeCovariance) {
  const auto phi = smooth_field(g, 2, 0.2);
  for (double t : {0.1, -0.1, 0.01, -0.01}) {
    RealField s = phi;
    for (auto& v : s.values) v += t;
    EXPECT_LT(max_abs(ev.rho(s) - ev.rho(phi, ev.mu_h() + t)), 1e-10);
  }
}

TEST_F(DensityTest, TranslationCovarianceAndPositivity) {
  const auto phi = smooth_field(g, 3, 0.5);
  const auto r = ev.rho(phi);
  for (double v : r.values) EXPECT_GT(v, 0.0);
  EXPECT_LT(max_abs(ev.rho(shift_lattice(phi, {1, 0, 2})) - shift_lattice(r, {1, 0, 2})), 1e-11);
}

TEST_F(DensityTest, DiscreteResponseMatchesFiniteDifference) {
  const double eps = 1e-4;
  for (int m : {1, 2, 3}) {
    const auto mode = axis_mode(g, m);
    RealField jac = ev.rho(eps * mode) - ev.rho((-eps) * mode);
    jac *= 1.0 / (2.0 * eps);
    const double exact = ev.response()[g.index(0, 0, m)];
    EXPECT_LT(max_abs(jac - exact * mode), 1e-6 * exact) << m;
  }
  EXPECT_NEAR(ev.response()[0],
              (jellium::density_A_discrete(ev.mu_h() + 1e-5, p, g) -
               jellium::density_A_discrete(ev.mu_h() - 1e-5, p, g)) / 2e-5,
              1e-8);
}

TEST_F(DensityTest, ConstantNonlinearityIsQuadratic) {
  const auto& mh = ev.response();
  double prev = 0.0;
  for (double t : {1e-2, 1e-3}) {
    const auto n = ev.nonlinearity(RealField(g, t), mh);
    const double scalar = -(jellium::density_A_discrete(ev.mu_h() + t, p, g) - kKappa0 - mh[0] * t);
    EXPECT_NEAR(n[0], scalar, 1e-12);
    const double r = max_abs(n) / (t * t);
    if (prev > 0.0) EXPECT_NEAR(r, prev, 0.05 * prev);
    prev = r;
  }
}

TEST_F(DensityTest, SecondOrderExtraction) {
  const double h = 1e-3;
  const double a2 = (jellium::density_A_discrete(ev.mu_h() + h, p, g) - 2.0 * kKappa0 +
                     jellium::density_A_discrete(ev.mu_h() - h, p, g)) / (h * h);
  const auto c = ev.extract_n2(RealField(g, 1.0), ev.response());
  EXPECT_NEAR(mean(c.n2), -0.5 * a2, 0.01 * std::abs(a2));

  const auto phi = smooth_field(g, 5, 0.3);
  const auto one = ev.extract_n2(phi, ev.response());
  const auto two = ev.extract_n2(2.0 * phi, ev.response());
  EXPECT_LT(one.rel_disagreement, 0.1);
  EXPECT_LT(norm_L2_cell(two.n2 - 4.0 * one.n2), 0.01 * norm_L2_cell(4.0 * one.n2));

  double prev = 0.0;
  for (double e : {0.2, 0.1, 0.05}) {
    const double rem = norm_L2_cell(ev.nonlinearity(e * phi, ev.response()) - (e * e) * one.n2);
    if (prev > 0.0) EXPECT_NEAR(std::log2(prev / rem), 3.0, 0.3);
    prev = rem;
  }
}

TEST_F(DensityTest, LargeFieldLeavesQuadraticRegime) {
  try {
    ev.extract_n2(smooth_field(g, 6, 40.0), ev.response(), 0.5);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Regime);
  }
}
