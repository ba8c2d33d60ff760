#include "rehf/density.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <lapacke.h>

#include "rehf/errors.hpp"
#include "rehf/jellium.hpp"

namespace rehf::density {

namespace {

constexpr double kWindow = 40.0;

void check_budget(const Grid& grid, std::size_t budget) {
  if (grid.size() > budget) {
    std::ostringstream msg;
    msg << "dense Hamiltonian of dimension " << grid.size() << " exceeds the budget " << budget
        << "; reduce n_cells or n_pts";
    throw Error(ErrorCategory::Resource, msg.str());
  }
}

void require_grid(const RealField& f, const Grid& g) {
  if (!(f.grid == g)) throw Error(ErrorCategory::Internal, "field lives on a different grid");
}

std::size_t mode_difference(const Grid& g, std::size_t a, std::size_t b) {
  const int n = g.n_side();
  const auto ca = g.coords(a);
  const auto cb = g.coords(b);
  auto wrap = [n](int v) { return ((v % n) + n) % n; };
  return g.index(wrap(ca[0] - cb[0]), wrap(ca[1] - cb[1]), wrap(ca[2] - cb[2]));
}

}  // namespace

std::vector<std::complex<double>> build_hamiltonian(const RealField& phi, std::size_t budget) {
  const Grid& g = phi.grid;
  check_budget(g, budget);
  const auto phat = to_spectral(phi);
  const std::size_t n = g.size();
  std::vector<std::complex<double>> h(n * n);
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      h[r * n + c] = -phat.coefficients[mode_difference(g, r, c)];
    }
    h[r * n + r] += g.g2(r);
  }
  return h;
}

std::vector<double> discrete_response(const Grid& grid, double beta, double chem_pot) {
  const std::size_t n = grid.size();
  const int side = grid.n_side();
  std::vector<double> e(n);
  std::vector<double> occ(n);
  for (std::size_t i = 0; i < n; ++i) {
    e[i] = grid.g2(i);
    occ[i] = fermi_dirac(beta * (e[i] - chem_pot));
  }
  std::vector<double> out(n, 0.0);
  for (std::size_t gi = 0; gi < n; ++gi) {
    const auto gc = grid.coords(gi);
    double sum = 0.0;
    for (std::size_t ki = 0; ki < n; ++ki) {
      const auto kc = grid.coords(ki);
      const std::size_t qi = grid.index((kc[0] + gc[0]) % side, (kc[1] + gc[1]) % side,
                                        (kc[2] + gc[2]) % side);
      const double gap = e[qi] - e[ki];
      if (std::abs(gap) * beta < 1e-7) {
        const double fm = fermi_dirac(beta * (0.5 * (e[qi] + e[ki]) - chem_pot));
        sum += beta * fm * (1.0 - fm);
      } else {
        sum += (occ[ki] - occ[qi]) / gap;
      }
    }
    out[gi] = sum / grid.volume();
  }
  return out;
}

DensityEvaluator::DensityEvaluator(const PhysParams& params, const Grid& grid, std::size_t budget)
    : params_(params), grid_(grid) {
  params_.validate();
  check_budget(grid_, budget);
  mu_h_ = jellium::calibrate_mu_discrete(params_.kappa0, params_.beta, grid_);

  // -Delta in the grid basis: K(x - y) = sum_G |G|^2 e^{iG(x-y)} / N, real and symmetric.
  const std::size_t n = grid_.size();
  SpectralField s(grid_);
  for (std::size_t i = 0; i < n; ++i) s.coefficients[i] = grid_.g2(i) / static_cast<double>(n);
  const auto row = to_real(s);
  kinetic_.resize(n * n);
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = 0; y < n; ++y) {
      kinetic_[y * n + x] = row[mode_difference(grid_, x, y)];
    }
  }
  response_ = discrete_response(grid_, params_.beta, mu_h_);
}

HamiltonianSpectrum DensityEvaluator::spectrum(const RealField& phi, double chem_pot) const {
  require_grid(phi, grid_);
  const std::size_t n = grid_.size();
  std::vector<double> a = kinetic_;
  for (std::size_t x = 0; x < n; ++x) a[x * n + x] -= phi[x];

  const auto ni = static_cast<lapack_int>(n);
  const double vl = -max_abs(phi) - 1.0;
  const double vu = chem_pot + kWindow / params_.beta;
  lapack_int found = 0;
  HamiltonianSpectrum out;
  out.dim = n;
  out.eigenvalues.resize(n);
  out.vectors.resize(n * n);
  std::vector<lapack_int> support(2 * n);
  const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, 'V', 'V', 'U', ni, a.data(), ni, vl, vu, 0,
                                         0, 0.0, &found, out.eigenvalues.data(),
                                         out.vectors.data(), ni, support.data());
  if (info != 0) {
    throw Error(ErrorCategory::NumericFailure,
                "dense eigensolver failed (dsyevr info " + std::to_string(info) + ")");
  }
  out.eigenvalues.resize(static_cast<std::size_t>(found));
  out.vectors.resize(static_cast<std::size_t>(found) * n);
  return out;
}

double spectrum_residual(const RealField& phi, const HamiltonianSpectrum& s) {
  const Grid& g = phi.grid;
  const std::size_t n = s.dim;
  std::vector<double> sym(n);
  for (std::size_t i = 0; i < n; ++i) sym[i] = g.g2(i);
  double worst = 0.0;
  for (std::size_t k = 0; k < s.count(); ++k) {
    RealField v(g, std::vector<double>(s.vectors.begin() + static_cast<std::ptrdiff_t>(k * n),
                                       s.vectors.begin() + static_cast<std::ptrdiff_t>((k + 1) * n)));
    const auto hv = apply_symbol(v, sym);
    double r2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double d = hv[i] - phi[i] * v[i] - s.eigenvalues[k] * v[i];
      r2 += d * d;
    }
    worst = std::max(worst, std::sqrt(r2) / std::max(1.0, std::abs(s.eigenvalues[k])));
  }
  return worst;
}

RealField DensityEvaluator::rho(const RealField& phi, double chem_pot) const {
  const auto s = spectrum(phi, chem_pot);
  const std::size_t n = s.dim;
  RealField out(grid_);
  const double inv_h3 = 1.0 / grid_.point_volume();
  for (std::size_t k = 0; k < s.count(); ++k) {
    const double occ = fermi_dirac(params_.beta * (s.eigenvalues[k] - chem_pot)) * inv_h3;
    const double* v = s.vectors.data() + k * n;
    for (std::size_t x = 0; x < n; ++x) out[x] += occ * v[x] * v[x];
  }
  for (std::size_t x = 0; x < n; ++x) {
    if (!(out[x] > 0.0)) {
      std::ostringstream msg;
      msg << "density is not positive at grid point " << x << " (value " << out[x] << ")";
      throw Error(ErrorCategory::NumericFailure, msg.str());
    }
  }
  return out;
}

RealField DensityEvaluator::nonlinearity(const RealField& phi, std::span<const double> m_grid) const {
  require_grid(phi, grid_);
  if (m_grid.size() != grid_.size()) throw Error(ErrorCategory::Internal, "multiplier size mismatch");
  if (std::all_of(phi.values.begin(), phi.values.end(), [](double v) { return v == 0.0; })) {
    return RealField(grid_);
  }
  RealField out = rho(phi);
  const auto mphi = apply_symbol(phi, m_grid);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = -(out[i] - params_.kappa0 - mphi[i]);
  return out;
}

DensityEvaluator::SecondOrder DensityEvaluator::extract_n2(const RealField& phi,
                                                           std::span<const double> m_grid,
                                                           double eps) const {
  auto second = [&](double e) {
    RealField plus = nonlinearity(e * phi, m_grid);
    plus += nonlinearity((-e) * phi, m_grid);
    plus *= 1.0 / (2.0 * e * e);
    return plus;
  };
  const RealField coarse = second(eps);
  const RealField fine = second(0.5 * eps);
  RealField n2 = (4.0 / 3.0) * fine - (1.0 / 3.0) * coarse;
  const double scale = norm_L2_cell(fine);
  const double gap = norm_L2_cell(fine - coarse);
  const double rel = scale > 0.0 ? gap / scale : (gap > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  if (rel > 0.1) {
    std::ostringstream msg;
    msg << "second-order estimates at eps=" << eps << " and eps/2 disagree by " << rel
        << "; the field is outside the quadratic regime";
    throw Error(ErrorCategory::Regime, msg.str());
  }
  return {std::move(n2), rel};
}

}  // namespace rehf::density
