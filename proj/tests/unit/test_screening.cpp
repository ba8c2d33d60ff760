#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "rehf/errors.hpp"
#include "rehf/jellium.hpp"
#include "rehf/screening.hpp"

using namespace rehf;
using namespace rehf::screening;

namespace {

PhysParams at(double beta, double mu) { return {beta, mu, jellium::density_A(mu, beta)}; }

// Direct midpoint rule on ln|(2 sqrt t + p)/(2 sqrt t - p)| f with graded panels near t = p^2/4.
double brute_m(double p, const PhysParams& pp) {
  const double t0 = 0.25 * p * p;
  const double T = std::max(pp.mu, 0.0) + 40.0 / pp.beta;
  // |2 sqrt t - p| = 2 |t - t0| / (sqrt t + sqrt t0), written in terms of the offset d.
  auto g = [&](double t, double d) {
    const double s = 2.0 * std::sqrt(t);
    const double gap = 2.0 * d / (std::sqrt(t) + 0.5 * p);
    return std::log((s + p) / gap) * fermi_dirac(pp.beta * (t - pp.mu));
  };
  // u^4 grading towards t0 from both sides.
  const int n = 200000;
  double sum = 0.0;
  for (int side = 0; side < 2; ++side) {
    const double len = side == 0 ? t0 : T - t0;
    for (int i = 0; i < n; ++i) {
      const double u0 = static_cast<double>(i) / n, u1 = static_cast<double>(i + 1) / n;
      const double um = 0.5 * (u0 + u1);
      const double d = len * std::pow(um, 4);
      const double w = len * (std::pow(u1, 4) - std::pow(u0, 4));
      sum += g(side == 0 ? t0 - d : t0 + d, d) * w;
    }
  }
  return sum / (8.0 * kPi * kPi * p);
}

}  // namespace

TEST(Multiplier, CompressibilityAtZero) {
  for (double b : {0.5, 1.0, 2.0}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      const double h = 1e-5;
      const double dA = (jellium::density_A(mu + h, b) - jellium::density_A(mu - h, b)) / (2.0 * h);
      EXPECT_NEAR(m_of_p(0.0, at(b, mu)), dA, 1e-6 * dA) << b << " " << mu;
    }
  }
}

TEST(Multiplier, LargeMomentumLimit) {
  const auto pp = at(1.0, 1.0);
  EXPECT_NEAR(100.0 * 100.0 * m_of_p(100.0, pp) / (2.0 * pp.kappa0), 1.0, 1e-3);
}

TEST(Multiplier, AgreesWithGradedQuadrature) {
  const auto pp = at(1.0, 1.0);
  for (double p : {0.5, 2.0}) EXPECT_NEAR(m_of_p(p, pp), brute_m(p, pp), 1e-6 * m_of_p(p, pp));
}

TEST(Multiplier, NegativeMomentumRejected) { EXPECT_THROW(m_of_p(-1.0, at(1.0, 1.0)), Error); }

TEST(Contour, MatchesClosedForm) {
  const auto pp = at(1.0, 1.0);
  for (double p : {0.5, 1.0, 2.0, 4.0}) {
    const double m = m_of_p(p, pp);
    EXPECT_NEAR(m_contour_oracle(p, pp), m, 1e-6 * m) << p;
  }
}

TEST(Contour, IndependentOfHeight) {
  for (auto [b, mu] : {std::pair{1.0, 1.0}, std::pair{2.0, 0.5}, std::pair{0.5, 2.0}}) {
    const auto pp = at(b, mu);
    for (double p : {0.1, 1.3, 7.0, 50.0}) {
      const double a = m_contour_oracle(p, pp, 0.5 / b);
      EXPECT_NEAR(m_contour_oracle(p, pp, 0.25 / b), a, 1e-7 * a);
    }
  }
}

TEST(Contour, AsymptoticAtFifty) {
  const auto pp = at(1.0, 1.0);
  const auto c = m_contour(50.0, pp);
  EXPECT_NEAR(2500.0 * c.value / (2.0 * pp.kappa0), 1.0, 3e-3);
  EXPECT_LT(c.imag_residue, 1e-8 * c.value);
  EXPECT_LT(c.tail_bound, 1e-14);
}

TEST(Contour, HeightBeyondPoleRejected) {
  EXPECT_THROW(m_contour_oracle(1.0, at(1.0, 1.0), 4.0), Error);
}

TEST(Bounds, MinorantBelowMultiplier) {
  for (double mu : {0.5, 1.0, 2.0}) {
    const auto pp = at(1.0, mu);
    for (double frac : {0.0, 0.2, 0.6, 0.95}) {
      const double p = 2.0 * std::sqrt(mu) * frac;
      const double m = m_of_p(p, pp);
      EXPECT_GT(m, m_minorant(p, mu));
      EXPECT_GT(m_minorant(p, mu), m_elementary_bound(p, mu) * (1.0 - 1e-12));
    }
  }
}

TEST(Bounds, MStar) {
  EXPECT_DOUBLE_EQ(m_star(0.25), 0.25);
  EXPECT_DOUBLE_EQ(m_star(4.0), 2.0);
}

TEST(Table, InterpolatesMonotonically) {
  const auto pp = at(1.0, 1.0);
  std::vector<double> ps;
  for (int i = 0; i < 30; ++i) ps.push_back(0.05 * std::pow(400.0, i / 29.0));
  const auto t = make_table(pp, ps);
  for (std::size_t i = 0; i < ps.size(); ++i) EXPECT_EQ(t(ps[i]), t.m_values()[i]);
  for (std::size_t i = 1; i < ps.size(); ++i) {
    const double mid = 0.5 * (ps[i - 1] + ps[i]);
    EXPECT_LE(t(mid), t.m_values()[i - 1]);
    EXPECT_GE(t(mid), t.m_values()[i]);
    EXPECT_NEAR(t(mid), m_of_p(mid, pp), 2e-2 * m_of_p(mid, pp));
  }
  EXPECT_THROW(t(1e3), Error);
}

TEST(Symbol, InverseRoundTripAndZeroMode) {
  const Grid g(1.0, 2, 3);
  const auto pp = at(1.0, 1.0);
  const auto sym = build_L_symbol(g, pp);
  std::mt19937 gen(4);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RealField f(g);
  for (auto& v : f.values) v = u(gen);
  EXPECT_LT(max_abs(apply_L_inverse(apply_L(f, sym), sym) - f), 1e-12);
  const auto c = apply_L_inverse(RealField(g, 2.0), sym);
  for (double v : c.values) EXPECT_NEAR(v, 2.0 / m_of_p(0.0, pp), 1e-10);
}

TEST(Symbol, SingleModeDiagonal) {
  const Grid g(1.0, 2, 3);
  const auto pp = at(1.0, 1.0);
  const auto sym = build_L_symbol(g, pp);
  RealField f(g);
  const int n = g.n_side();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) f[g.index(i, j, k)] = std::cos(2.0 * kPi * j / n);
  const double G = g.dk();
  const double l = G * G / (4.0 * kPi) + m_of_p(G, pp);
  EXPECT_LT(max_abs(apply_L_inverse(f, sym) - (1.0 / l) * f), 1e-13);
  EXPECT_LT(max_abs(apply_M(f, sym) - m_of_p(G, pp) * f), 1e-14);
}

TEST(Symbol, MissingShellIsInternalError) {
  const Grid g(1.0, 1, 2);
  const auto sym = build_L_symbol(g, at(1.0, 1.0));
  try {
    sym.m_at_shell(1000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.category(), ErrorCategory::Internal);
  }
  const Grid other(1.0, 1, 3);
  EXPECT_THROW(apply_L_inverse(RealField(other), sym), Error);
}

TEST(Coercivity, PositiveAndStableAcrossMatrix) {
  std::vector<double> ps{0.0};
  for (int i = 0; i < 80; ++i) ps.push_back(1e-3 * std::pow(1e5, i / 79.0));
  const double ref = coercivity(make_table(at(1.0, 1.0), ps)).ratio_min;
  EXPECT_GT(ref, 0.0);
  for (double b : {0.5, 1.0, 2.0}) {
    for (double mu : {0.5, 1.0, 2.0}) {
      const auto c = coercivity(make_table(at(b, mu), ps));
      EXPECT_GE(c.ratio_min, 0.5 * ref);
      EXPECT_GT(c.c0_empirical, 0.0);
    }
  }
}

TEST(Contour, SingularPointAtFermiLevel) {
  const PhysParams pp{1.0, 1.0, 0.0};
  const double p = 0.5 * std::pow(8.0, 2.0 / 3.0);
  for (double q : {std::nextafter(2.0, 0.0), 2.0, std::nextafter(2.0, 3.0), p}) {
    const double m = m_of_p(q, pp);
    EXPECT_NEAR(m_contour_oracle(q, pp), m, 1e-12 * m);
  }
}
