#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "rehf/core.hpp"

namespace rehf::disorder {

/// Anderson background kappa(x) = sum_l q_l chi(x - a l), q_l uniform on [qbar - w, qbar + w].
struct DisorderSpec {
  double a = 1.0;
  double qbar = 0.03;
  double width = 0.01;
  std::uint64_t seed = 7;
  double bump_radius = 0.5;  // in units of a; at most 1/2

  double kappa0() const { return qbar / (a * a * a); }
  /// Throws SpecValidation for a bump leaving the unit cell or invalid law parameters.
  void validate() const;
};

struct DisorderRealization {
  DisorderSpec spec;
  Grid grid;
  std::vector<double> q;  // lattice order (lx, ly, lz)
  RealField kappa;
  RealField kappa_prime;
};

/// Bump values at the grid points of one unit cell, centred in the cell and
/// normalized so that point_volume * sum = 1.
std::vector<double> bump_profile(const DisorderSpec& spec, const Grid& grid);

/// Uniform [0,1) variate for lattice site l, a pure function of (seed, l).
double site_uniform(std::uint64_t seed, std::array<int, 3> l);

/// Background for given coefficients (lattice order).
DisorderRealization assemble(const DisorderSpec& spec, const Grid& grid, std::vector<double> q);

/// Deterministic given (spec, grid).
DisorderRealization sample(const DisorderSpec& spec, const Grid& grid);

/// Homogeneous background kappa = kappa0, kappa' = 0 (no bump, no disorder).
DisorderRealization jellium_background(const DisorderSpec& spec, const Grid& grid);

/// The realization translated by whole unit cells.
DisorderRealization shifted(const DisorderRealization& r, std::array<int, 3> l);

/// Supercell L2 norm of kappa' and the maximum over unit cells.
NormPair norm_kappa_prime(const DisorderRealization& r);

}  // namespace rehf::disorder
