#include "rehf/jellium.hpp"

#include <cmath>
#include <map>
#include <sstream>

#include "numerics.hpp"
#include "rehf/errors.hpp"

namespace rehf::jellium {

namespace {

constexpr double kTruncation = 40.0;  // beta*(q^2 - mu) at which integrals are cut

// (1/2pi^2) int_Q^inf q^2 e^{-beta(q^2-mu)} dq, which bounds the Fermi-Dirac tail.
double gaussian_tail(double q, double mu, double beta) {
  const double w = std::exp(-beta * (q * q - mu));
  return w * (q / (2.0 * beta) + 1.0 / (4.0 * beta * beta * std::max(q, 1e-300))) /
         (2.0 * kPi * kPi);
}

std::map<long, long> shell_counts(const Grid& g) {
  std::map<long, long> counts;
  for (std::size_t i = 0; i < g.size(); ++i) ++counts[g.shell(i)];
  return counts;
}

}  // namespace

Estimate density_A_estimate(double mu, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCategory::SpecValidation, "beta must be positive");
  const double q_max = std::sqrt(std::max(mu, 0.0) + kTruncation / beta);
  auto integrand = [=](double q) { return q * q * fermi_dirac(beta * (q * q - mu)); };
  detail::Quad total;
  if (mu > 0.0) {
    const double q_f = std::sqrt(mu);
    total += detail::integrate(integrand, 0.0, q_f);
    total += detail::integrate(integrand, q_f, q_max);
  } else {
    total += detail::integrate(integrand, 0.0, q_max);
  }
  const double scale = 1.0 / (2.0 * kPi * kPi);
  const double err = total.error * scale + gaussian_tail(q_max, mu, beta);
  if (!(err <= 1e-12) || !std::isfinite(total.value)) {
    std::ostringstream msg;
    msg << "density quadrature did not converge (mu=" << mu << ", beta=" << beta
        << ", error estimate " << err << ")";
    throw Error(ErrorCategory::NumericFailure, msg.str());
  }
  return {total.value * scale, err};
}

double density_A(double mu, double beta) { return density_A_estimate(mu, beta).value; }

double upper_bound_B(double mu, double beta) {
  return kC1 * std::exp(beta * mu) * std::pow(beta, -1.5);
}

double lower_bound_C(double mu) { return mu > 0.0 ? kC2 * std::pow(mu, 1.5) : 0.0; }

MuBracket mu_bracket(double kappa0, double beta) {
  if (!(beta > 0.0)) throw Error(ErrorCategory::SpecValidation, "beta must be positive");
  const double threshold = kC1 * std::pow(beta, -1.5);
  if (!(kappa0 > threshold)) {
    std::ostringstream msg;
    msg << "homogeneous solution requires kappa0 > c1*beta^(-3/2) = " << threshold
        << " (got kappa0=" << kappa0 << ", beta=" << beta << ")";
    throw Error(ErrorCategory::Hypothesis, msg.str());
  }
  return {std::log(kappa0 * std::pow(beta, 1.5) / kC1) / beta, std::pow(kappa0 / kC2, 2.0 / 3.0)};
}

double solve_mu(double kappa0, double beta) {
  const auto br = mu_bracket(kappa0, beta);
  auto g = [&](double mu) { return density_A(mu, beta) - kappa0; };
  const double mu = detail::increasing_root(g, br.lower, br.upper, 1e-13 * kappa0);
  const double resid = std::abs(g(mu));
  if (resid > 1e-10 * kappa0 || !(mu > br.lower && mu < br.upper)) {
    std::ostringstream msg;
    msg << "chemical potential solve ended with |A(mu)-kappa0| = " << resid;
    throw Error(ErrorCategory::NumericFailure, msg.str());
  }
  return mu;
}

double cutoff_tail(double mu, double beta, const Grid& grid) {
  const double gc = grid.g_axis_max();
  if (beta * (gc * gc - mu) <= 0.0) return std::numeric_limits<double>::infinity();
  return gaussian_tail(gc, mu, beta);
}

double density_A_discrete(double mu, const PhysParams& params, const Grid& grid) {
  if (!grid.cutoff_ok(params.beta, mu)) {
    const double tail = cutoff_tail(mu, params.beta, grid);
    if (!(tail <= 1e-10 * params.kappa0)) {
      std::ostringstream msg;
      msg << "grid cutoff too low: beta*(Gmax^2-mu) = "
          << params.beta * (grid.g_axis_max() * grid.g_axis_max() - mu)
          << ", tail estimate " << tail;
      throw Error(ErrorCategory::NumericFailure, msg.str());
    }
  }
  double acc = 0.0;
  const double dk2 = grid.dk() * grid.dk();
  for (const auto& [shell, count] : shell_counts(grid)) {
    acc += static_cast<double>(count) *
           fermi_dirac(params.beta * (dk2 * static_cast<double>(shell) - mu));
  }
  return acc / grid.volume();
}

double calibrate_mu_discrete(double kappa0, double beta, const Grid& grid) {
  PhysParams p{beta, 0.0, kappa0};
  auto br = mu_bracket(kappa0, beta);
  auto g = [&](double mu) { return density_A_discrete(mu, p, grid) - kappa0; };
  const double width = std::max(1.0, br.upper - br.lower);
  double lo = br.lower;
  double hi = br.upper;
  for (int i = 0; i < 60 && g(lo) >= 0.0; ++i) lo -= width;
  for (int i = 0; i < 60 && g(hi) <= 0.0; ++i) hi += width;
  const double mu = detail::increasing_root(g, lo, hi, 1e-13 * kappa0);
  if (std::abs(g(mu)) > 1e-10 * kappa0) {
    throw Error(ErrorCategory::NumericFailure, "discrete chemical potential calibration failed");
  }
  return mu;
}

}  // namespace rehf::jellium
