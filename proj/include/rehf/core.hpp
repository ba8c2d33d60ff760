#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <numbers>
#include <span>
#include <vector>

namespace rehf {

inline constexpr double kPi = std::numbers::pi;

/// Physical parameters in units hbar = 2m = 1 with Poisson prefactor 4*pi.
struct PhysParams {
  double beta = 1.0;    // inverse temperature
  double mu = 0.0;      // continuum chemical potential
  double kappa0 = 0.0;  // mean background density

  /// Throws SpecValidation unless beta > 0 and everything is finite.
  void validate() const;
};

/// Periodic cubic supercell: n_cells^3 copies of the unit cell [0,a)^3,
/// each sampled with n_pts points per edge.
class Grid {
 public:
  Grid(double a, int n_cells, int n_pts);

  double a() const noexcept { return a_; }
  int n_cells() const noexcept { return n_cells_; }
  int n_pts() const noexcept { return n_pts_; }

  int n_side() const noexcept { return n_cells_ * n_pts_; }
  std::size_t size() const noexcept {
    auto n = static_cast<std::size_t>(n_side());
    return n * n * n;
  }
  double edge() const noexcept { return a_ * n_cells_; }
  double spacing() const noexcept { return a_ / n_pts_; }
  double volume() const noexcept { return edge() * edge() * edge(); }
  double cell_volume() const noexcept { return a_ * a_ * a_; }
  double point_volume() const noexcept { return volume() / static_cast<double>(size()); }

  std::size_t index(int i, int j, int k) const noexcept {
    auto n = static_cast<std::size_t>(n_side());
    return (static_cast<std::size_t>(i) * n + static_cast<std::size_t>(j)) * n +
           static_cast<std::size_t>(k);
  }
  std::array<int, 3> coords(std::size_t idx) const noexcept;

  /// Signed reciprocal integer for storage index j on the symmetric torus.
  /// For even n_side the Nyquist index maps to -n/2.
  int folded(int j) const noexcept {
    const int n = n_side();
    return j < (n + 1) / 2 ? j : j - n;
  }
  double dk() const noexcept { return 2.0 * kPi / edge(); }

  /// Integer m1^2+m2^2+m3^2 of the folded reciprocal vector at storage index.
  long shell(std::size_t idx) const noexcept;
  /// |G|^2 at storage index.
  double g2(std::size_t idx) const noexcept { return dk() * dk() * static_cast<double>(shell(idx)); }
  /// Largest per-axis reciprocal component (the cutoff momentum).
  double g_axis_max() const noexcept;

  /// beta*(g_axis_max^2 - mu) > 30.
  bool cutoff_ok(double beta, double mu) const noexcept;

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  double a_;
  int n_cells_;
  int n_pts_;
};

struct RealField {
  Grid grid;
  std::vector<double> values;

  explicit RealField(const Grid& g, double fill = 0.0) : grid(g), values(g.size(), fill) {}
  RealField(const Grid& g, std::vector<double> v);

  double& operator[](std::size_t i) { return values[i]; }
  double operator[](std::size_t i) const { return values[i]; }
  std::size_t size() const noexcept { return values.size(); }

  RealField& operator+=(const RealField& o);
  RealField& operator-=(const RealField& o);
  RealField& operator*=(double s);
};

RealField operator+(RealField lhs, const RealField& rhs);
RealField operator-(RealField lhs, const RealField& rhs);
RealField operator*(double s, RealField f);

/// Coefficients f^(G) = (1/N) sum_x f(x) e^{-iG.x}, stored in grid order.
struct SpectralField {
  Grid grid;
  std::vector<std::complex<double>> coefficients;

  explicit SpectralField(const Grid& g) : grid(g), coefficients(g.size()) {}

  /// max |c(-G) - conj(c(G))|.
  double hermitian_defect() const;
};

SpectralField to_spectral(const RealField& f);
/// Real part of the inverse transform; the imaginary part is dropped.
RealField to_real(const SpectralField& s);
/// Multiply the coefficient at each grid mode by symbol[idx] and transform back.
RealField apply_symbol(const RealField& f, std::span<const double> symbol);

/// Grid-point linear index of -G for the mode stored at idx.
std::size_t negate_mode(const Grid& g, std::size_t idx) noexcept;

double mean(const RealField& f);
double max_abs(const RealField& f);

/// sqrt(point_volume * sum f^2) over the whole supercell.
double norm_L2_cell(const RealField& f);
/// sqrt(volume * sum_G (1+|G|^2)^2 |f^(G)|^2); equals norm_L2_cell for unit weights.
double norm_H2_cell(const RealField& f);
/// L2 norm over each unit cell, in lattice order (lx, ly, lz).
std::vector<double> per_unit_cell_L2(const RealField& f);

struct NormPair {
  double supercell = 0.0;
  double max_per_unit_cell = 0.0;
};
NormPair norm_L2_report(const RealField& f);

/// f(x - a*l): circular shift by whole unit cells.
RealField shift_lattice(const RealField& f, std::array<int, 3> l);
/// Same for a Cartesian displacement, which must be a whole number of lattice constants.
RealField shift_displacement(const RealField& f, std::array<double, 3> displacement);

/// Text dump: header lines starting with '#', then "i j k value" rows at 17 significant digits.
void write_field_table(std::ostream& os, const RealField& f);
RealField read_field_table(std::istream& is);

/// Fermi-Dirac occupation 1/(1+e^x), overflow-safe.
double fermi_dirac(double x) noexcept;
std::complex<double> fermi_dirac(std::complex<double> x) noexcept;

}  // namespace rehf
