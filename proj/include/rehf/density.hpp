#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include "rehf/core.hpp"
#include "rehf/screening.hpp"

namespace rehf::density {

inline constexpr std::size_t kDenseBudget = 4096;

/// Dense matrix of -Delta - phi in the plane-wave basis, row-major N x N:
/// H[G,G'] = |G|^2 delta_{GG'} - phi^(G - G'), differences folded on the grid torus.
std::vector<std::complex<double>> build_hamiltonian(const RealField& phi,
                                                    std::size_t budget = kDenseBudget);

/// Occupied part of the spectrum of -Delta - phi in the grid basis.
/// vectors is column-major N x count, orthonormal in R^N.
struct HamiltonianSpectrum {
  std::vector<double> eigenvalues;
  std::vector<double> vectors;
  std::size_t dim = 0;

  std::size_t count() const noexcept { return eigenvalues.size(); }
};

/// Largest ||H v - e v|| / max(1, |e|) over the stored pairs.
double spectrum_residual(const RealField& phi, const HamiltonianSpectrum& s);

/// Exact linear response of the grid model at phi = 0, per grid mode:
///   m_h(G) = (1/L^3) sum_k (f(e_k) - f(e_{k+G})) / (e_{k+G} - e_k),  e_k = |k|^2,
/// with f(e) = f_FD(beta(e - chem_pot)) and k + G wrapped on the grid torus.
/// Tends to m(|G|) as the supercell grows.
std::vector<double> discrete_response(const Grid& grid, double beta, double chem_pot);

/// rho[phi] = den f_FD(beta(-Delta - phi - mu_h)) on a fixed grid, with mu_h the
/// chemical potential that makes the discrete jellium neutral.
class DensityEvaluator {
 public:
  /// params.kappa0 and params.beta are used; params.mu is the continuum value used
  /// only by callers. Throws Resource above the dense budget.
  DensityEvaluator(const PhysParams& params, const Grid& grid, std::size_t budget = kDenseBudget);

  const PhysParams& params() const noexcept { return params_; }
  const Grid& grid() const noexcept { return grid_; }
  double mu_h() const noexcept { return mu_h_; }

  /// Eigenpairs with eigenvalue below chem_pot + 40/beta.
  HamiltonianSpectrum spectrum(const RealField& phi, double chem_pot) const;

  RealField rho(const RealField& phi) const { return rho(phi, mu_h_); }
  RealField rho(const RealField& phi, double chem_pot) const;

  /// m_h at mu_h for every grid mode.
  const std::vector<double>& response() const noexcept { return response_; }

  /// N(phi) = -(rho[phi] - kappa0 - M phi), M acting by the per-mode multiplier m_grid.
  RealField nonlinearity(const RealField& phi, std::span<const double> m_grid) const;
  /// Same with the symbol's (continuum) multiplier, as used by the solver.
  RealField nonlinearity(const RealField& phi, const screening::Lsymbol& sym) const {
    return nonlinearity(phi, sym.m_grid());
  }

  struct SecondOrder {
    RealField n2;
    double rel_disagreement;  // between the eps and eps/2 estimates
  };
  /// Quadratic coefficient of N along phi by symmetric second differences at
  /// eps and eps/2, Richardson-combined. Throws Regime above 10% disagreement.
  SecondOrder extract_n2(const RealField& phi, std::span<const double> m_grid,
                         double eps = 1e-2) const;
  SecondOrder extract_n2(const RealField& phi, const screening::Lsymbol& sym,
                         double eps = 1e-2) const {
    return extract_n2(phi, sym.m_grid(), eps);
  }

 private:
  PhysParams params_;
  Grid grid_;
  double mu_h_;
  std::vector<double> kinetic_;
  std::vector<double> response_;  // column-major N x N real-space -Delta
};

}  // namespace rehf::density
