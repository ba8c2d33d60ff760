#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "rehf/core.hpp"
#include "rehf/density.hpp"
#include "rehf/disorder.hpp"
#include "rehf/screening.hpp"
#include "rehf/solver.hpp"

namespace rehf::run {

/// Flat key=value run configuration. '#' starts a comment; blank lines are ignored.
/// Keys: beta, kappa0_qbar, disorder_width, lattice_a, n_cells, n_pts,
/// tol_residual, tol_delta, max_iter, mixing.
struct RunConfig {
  double beta = 1.0;
  double kappa0_qbar = 0.03;
  double disorder_width = 0.01;
  double lattice_a = 1.0;
  int n_cells = 4;
  int n_pts = 3;
  solver::SolveConfig solve;

  Grid grid() const { return Grid(lattice_a, n_cells, n_pts); }
  disorder::DisorderSpec spec(std::uint64_t seed) const;
};

/// Throws Config on unknown keys, malformed lines or values, and duplicates.
RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
std::string format_config(const RunConfig& cfg);

/// Everything shared by solves at one configuration: mu, mu_h, dense kinetic matrix, symbol.
class Model {
 public:
  explicit Model(const RunConfig& cfg);

  const RunConfig& config() const noexcept { return cfg_; }
  const Grid& grid() const noexcept { return grid_; }
  const PhysParams& params() const noexcept { return params_; }
  const density::DensityEvaluator& evaluator() const noexcept { return ev_; }
  const screening::Lsymbol& symbol() const noexcept { return sym_; }

  struct Outcome {
    disorder::DisorderRealization realization;
    solver::SolveResult result;
  };
  /// One realization from phi = 0. Safe to call concurrently.
  Outcome solve_seed(std::uint64_t seed) const;

 private:
  RunConfig cfg_;
  Grid grid_;
  PhysParams params_;
  density::DensityEvaluator ev_;
  screening::Lsymbol sym_;
};

}  // namespace rehf::run
