#pragma once

#include <functional>
#include <map>
#include <vector>

#include "rehf/core.hpp"

namespace rehf::screening {

/// Static density response of the free Fermi gas at momentum p:
///   m(p) = 1/(8 pi^2 p) int_0^inf ln|(sqrt(4t)+p)/(sqrt(4t)-p)| f_FD(beta(t-mu)) dt,
/// with m(0) = 1/(8 pi^2) int_0^inf t^{-1/2} f_FD(beta(t-mu)) dt.
/// The integral is split at the logarithmic singularity t = p^2/4.
double m_of_p(double p, const PhysParams& params);

struct ContourValue {
  double value;          // real part, the multiplier
  double imag_residue;   // |Im| of the contour sum before it is discarded
  double tail_bound;     // bound on the part of the contour beyond Re z = mu + 40/beta
};

/// Independent evaluation of m(p) as a Cauchy integral of
///   -(1/(8 pi^2 p i)) f_FD(beta(z-mu)) arctan(p/sqrt(-4z))
/// along the three-segment contour at height alpha around the positive axis.
/// alpha <= 0 selects 1/(2 beta). Throws Branch if the imaginary residue
/// exceeds 1e-8 of the real part.
ContourValue m_contour(double p, const PhysParams& params, double alpha = 0.0);
double m_contour_oracle(double p, const PhysParams& params, double alpha = 0.0);

/// m evaluated with f_FD replaced by its minorant (1/2) 1_[0,mu]; a lower bound for m(p).
double m_minorant(double p, double mu);
/// Closed-form consequence of the minorant for p^2/4 < mu: (sqrt(mu) - p/3)/(8 pi^2).
double m_elementary_bound(double p, double mu);

/// min(mu, sqrt(mu)).
double m_star(double mu);

/// Multiplier tabulated at sorted momenta with monotone cubic interpolation in between.
class ScreeningTable {
 public:
  ScreeningTable(PhysParams params, std::vector<double> p_values, std::vector<double> m_values);

  const PhysParams& params() const noexcept { return params_; }
  const std::vector<double>& p_values() const noexcept { return p_; }
  const std::vector<double>& m_values() const noexcept { return m_; }

  /// Interpolated value; exact at the tabulated momenta.
  double operator()(double p) const;

 private:
  PhysParams params_;
  std::vector<double> p_;
  std::vector<double> m_;
  std::function<double(double)> interp_;
};

/// Exact quadrature at each requested momentum.
ScreeningTable make_table(const PhysParams& params, std::vector<double> p_values);

/// Preconditioner symbol L^(p) = p^2/(4 pi) + m(p) tabulated on every grid momentum.
class Lsymbol {
 public:
  Lsymbol(const Grid& grid, ScreeningTable table, std::map<long, double> m_by_shell);

  const Grid& grid() const noexcept { return grid_; }
  const ScreeningTable& table() const noexcept { return table_; }

  /// m(|G|) at every grid point (storage order).
  const std::vector<double>& m_grid() const noexcept { return m_grid_; }
  /// L^(|G|) at every grid point.
  const std::vector<double>& symbol() const noexcept { return symbol_; }
  double m_at_shell(long shell) const;
  double m0() const { return m_at_shell(0); }

 private:
  Grid grid_;
  ScreeningTable table_;
  std::map<long, double> m_by_shell_;
  std::vector<double> m_grid_;
  std::vector<double> symbol_;
};

/// m_scale multiplies the tabulated multiplier (fault injection only; 1 in normal use).
Lsymbol build_L_symbol(const Grid& grid, const PhysParams& params, double m_scale = 1.0);

RealField apply_L_inverse(const RealField& r, const Lsymbol& sym);
RealField apply_L(const RealField& f, const Lsymbol& sym);
RealField apply_M(const RealField& f, const Lsymbol& sym);

struct Coercivity {
  double ratio_min;        // min_p L^(p) / (p^2/(4 pi) + m_*)
  double p_at_min;
  double c0_empirical;     // min_p L^(p) / (p^2 + m_*)
};
Coercivity coercivity(const ScreeningTable& table);

}  // namespace rehf::screening
