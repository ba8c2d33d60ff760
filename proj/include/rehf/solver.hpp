#pragma once

#include <string>
#include <vector>

#include "json.hpp"
#include "rehf/core.hpp"
#include "rehf/density.hpp"
#include "rehf/disorder.hpp"
#include "rehf/screening.hpp"

namespace rehf::solver {

struct SolveConfig {
  double tol_delta = 1e-9;
  double tol_residual = 1e-8;
  int max_iter = 200;
  double mixing = 1.0;
  /// Evaluate the gauge diagnostic at the solution (two extra density evaluations).
  bool gauge_check = true;

  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  std::vector<double> step_norms;
  std::vector<double> ratios;
  double residual = 0.0;
  double phi_l2 = 0.0;
  double phi_h2 = 0.0;
  double phi_l2_max_cell = 0.0;
  double kappa_prime_l2 = 0.0;
  double kappa_prime_l2_max_cell = 0.0;
  double mu = 0.0;
  double mu_h = 0.0;
  double neutrality = 0.0;
  double gauge_residual_change = 0.0;
  double c2_estimate = 0.0;
  bool converged = false;
  bool outside_theory = false;
  std::vector<std::string> warnings;

  /// Largest ratio among the last five steps (0 when fewer than two steps).
  double tail_ratio_max() const;
  nlohmann::ordered_json to_json() const;
};

struct SolveResult {
  RealField phi;
  SolveReport report;
};

/// ||(-Delta/4pi) phi - (kappa - rho)||_L2 with rho evaluated at the given chemical potential.
double physical_residual(const RealField& phi, const RealField& kappa,
                         const density::DensityEvaluator& ev, double chem_pot);

/// Pointwise form of the same residual.
RealField residual_field(const RealField& phi, const RealField& kappa,
                         const density::DensityEvaluator& ev, double chem_pot);

/// L^{-1} kappa', the first-order solution.
RealField linear_response(const disorder::DisorderRealization& r, const screening::Lsymbol& sym);

/// phi <- (1-mixing) phi + mixing L^{-1}(kappa' + N(phi)) from phi0 until both the H2 step
/// and the physical residual are below tolerance. Throws Convergence on divergence
/// (a step ten times the smallest so far) or when max_iter is reached.
SolveResult solve(const disorder::DisorderRealization& r, const density::DensityEvaluator& ev,
                  const screening::Lsymbol& sym, const SolveConfig& cfg, const RealField& phi0);

struct UniquenessVerdict {
  double max_pairwise_h2 = 0.0;
  std::vector<SolveReport> reports;
  std::vector<RealField> solutions;
};

/// Solves from every init (each must satisfy ||phi0||_H2 <= ball) and records the
/// largest pairwise H2 distance between the solutions.
UniquenessVerdict solve_multi_init(const disorder::DisorderRealization& r,
                                   const density::DensityEvaluator& ev,
                                   const screening::Lsymbol& sym, const SolveConfig& cfg,
                                   const std::vector<RealField>& inits, double ball = 1.0);

}  // namespace rehf::solver
