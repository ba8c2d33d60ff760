#pragma once

#include "rehf/core.hpp"

namespace rehf::jellium {

/// Constants of the homogeneous-density bounds B(mu) >= A(mu) >= C(mu).
inline const double kC1 = 1.0 / (8.0 * std::pow(kPi, 1.5));
inline const double kC2 = 1.0 / (12.0 * kPi * kPi);

/// A(mu) = (1/2pi^2) int_0^inf q^2 / (1 + e^{-beta mu} e^{beta q^2}) dq,
/// the free-electron density at chemical potential mu.
double density_A(double mu, double beta);

/// Value together with the quadrature error estimate (including the truncated tail).
struct Estimate {
  double value;
  double error;
};
Estimate density_A_estimate(double mu, double beta);

/// B(mu) = e^{beta mu} beta^{-3/2} / (8 pi^{3/2}).
double upper_bound_B(double mu, double beta);
/// C(mu) = mu^{3/2} / (12 pi^2) for mu >= 0.
double lower_bound_C(double mu);

struct MuBracket {
  double lower;
  double upper;
};

/// (1/beta) log(kappa0 beta^{3/2}/c1) < mu < (kappa0/c2)^{2/3}.
/// Throws Hypothesis unless kappa0 > c1 beta^{-3/2}.
MuBracket mu_bracket(double kappa0, double beta);

/// The chemical potential of the homogeneous solution: A(mu) = kappa0.
double solve_mu(double kappa0, double beta);

/// Supercell analogue A_h(mu) = (1/L^3) sum_G f_FD(beta(|G|^2 - mu)).
/// Throws NumericFailure when the grid cutoff check fails and the continuum
/// tail beyond the cutoff exceeds 1e-10 * params.kappa0.
double density_A_discrete(double mu, const PhysParams& params, const Grid& grid);

/// Continuum density carried by momenta beyond the grid's cutoff (upper bound).
double cutoff_tail(double mu, double beta, const Grid& grid);

/// mu_h with A_h(mu_h) = kappa0 to 1e-10 relative (charge neutrality on the grid).
double calibrate_mu_discrete(double kappa0, double beta, const Grid& grid);

}  // namespace rehf::jellium
