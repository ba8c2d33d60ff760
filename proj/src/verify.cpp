#include "rehf/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <memory>
#include <optional>
#include <random>
#include <sstream>

#include <lapacke.h>

#include "rehf/density.hpp"
#include "rehf/disorder.hpp"
#include "rehf/errors.hpp"
#include "rehf/jellium.hpp"
#include "rehf/screening.hpp"
#include "rehf/solver.hpp"

namespace rehf::verify {

namespace {

struct Outcome {
  bool passed;
  double observed;
  double threshold;
  std::string relation;
  std::string detail;
};

Outcome at_most(double observed, double threshold, std::string detail = {}) {
  return {observed <= threshold, observed, threshold, "<=", std::move(detail)};
}

Outcome within(double observed, double target, double tol, std::string detail = {}) {
  return {std::abs(observed - target) <= tol, observed, tol, "|x-" + std::to_string(target) + "|<=",
          std::move(detail)};
}

double rel(double a, double b) { return std::abs(a - b) / std::abs(b); }

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(y.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(4) << v;
  return os.str();
}

RealField smooth_random(const Grid& g, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> normal;
  RealField f(g);
  for (auto& v : f.values) v = normal(gen);
  std::vector<double> damp(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) damp[i] = 1.0 / ((1.0 + g.g2(i)) * (1.0 + g.g2(i)));
  f = apply_symbol(f, damp);
  f *= 1.0 / norm_H2_cell(f);
  return f;
}

// Grid index of the momentum frac * 2 pi m / a along each axis.
int mode_index(const Grid& g, double frac) {
  const double idx = frac * g.n_cells();
  if (std::abs(idx - std::round(idx)) > 1e-12) {
    throw Error(ErrorCategory::Internal, "probe momentum is not a supercell mode");
  }
  return static_cast<int>(std::round(idx));
}

// cos(frac * 2 pi (m . x) / a).
RealField lattice_mode(const Grid& g, std::array<int, 3> m, double frac) {
  RealField f(g);
  const int n = g.n_side();
  const int scale = mode_index(g, frac);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double phase = 2.0 * kPi * scale * (m[0] * i + m[1] * j + m[2] * k) / n;
        f[g.index(i, j, k)] = std::cos(phase);
      }
    }
  }
  return f;
}

double project(const RealField& f, const RealField& mode) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    num += f[i] * mode[i];
    den += mode[i] * mode[i];
  }
  return num / den;
}

constexpr std::array<std::array<int, 3>, 3> kModes{{{1, 0, 0}, {1, 1, 0}, {1, 1, 1}}};

struct Setup {
  double beta = 1.0;
  double qbar = 0.03;
  double width = 0.01;
  std::uint64_t seed = 7;
  int n_cells = 4;
  int n_pts = 3;
  // Probe momenta are mode_frac * 2 pi (1,0,0)/a etc.; supercell sizes of the finite-size study.
  double mode_frac = 1.0;
  std::vector<int> sizes{2, 3, 4};
  std::vector<double> matrix_beta;
  std::vector<double> matrix_val;
};

Setup make_setup(Level level) {
  Setup s;
  if (level == Level::Fast) {
    s.n_pts = 2;
    s.mode_frac = 0.5;
    s.sizes = {2, 4};
    s.matrix_beta = {1.0};
    s.matrix_val = {1.0};
  } else {
    s.matrix_beta = {0.5, 1.0, 2.0};
    s.matrix_val = {0.5, 1.0, 2.0};
  }
  return s;
}

class Suite {
 public:
  explicit Suite(const SuiteOptions& opt) : opt_(opt), setup_(make_setup(opt.level)) {
    verdict_.level = opt.level;
    verdict_.m_scale = opt.m_scale;
  }

  Verdict run();

 private:
  void run_check(const std::string& group, const std::string& name,
                 const std::function<Outcome()>& fn);
  void constant(const std::string& name, double v) { verdict_.constants.emplace_back(name, v); }

  // Shared model at the suite's reference point, built on first use.
  struct Model {
    disorder::DisorderSpec spec;
    Grid grid;
    PhysParams params;
    density::DensityEvaluator ev;
    screening::Lsymbol sym;
    disorder::DisorderRealization real;
  };
  const Model& model();
  const solver::SolveResult& base_solve();
  solver::SolveConfig quiet() const {
    solver::SolveConfig c;
    c.gauge_check = false;
    return c;
  }

  void core_checks();
  void jellium_checks();
  void screening_checks();
  void disorder_checks();
  void density_checks();
  void solver_checks();
  void finite_size_probe();

  SuiteOptions opt_;
  Setup setup_;
  Verdict verdict_;
  std::unique_ptr<Model> model_;
  std::optional<solver::SolveResult> base_;
  std::string base_error_;
};

void Suite::run_check(const std::string& group, const std::string& name,
                      const std::function<Outcome()>& fn) {
  Check c;
  c.group = group;
  c.name = name;
  const auto t0 = std::chrono::steady_clock::now();
  try {
    const Outcome o = fn();
    c.passed = o.passed && std::isfinite(o.observed);
    c.observed = o.observed;
    c.threshold = o.threshold;
    c.relation = o.relation;
    c.detail = o.detail;
  } catch (const Error& e) {
    c.passed = false;
    c.detail = std::string(to_string(e.category())) + ": " + e.what();
  } catch (const std::exception& e) {
    c.passed = false;
    c.detail = e.what();
  }
  c.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  verdict_.checks.push_back(std::move(c));
}

const Suite::Model& Suite::model() {
  if (!model_) {
    disorder::DisorderSpec spec;
    spec.qbar = setup_.qbar;
    spec.width = setup_.width;
    spec.seed = setup_.seed;
    Grid grid(spec.a, setup_.n_cells, setup_.n_pts);
    PhysParams params{setup_.beta, jellium::solve_mu(spec.kappa0(), setup_.beta), spec.kappa0()};
    density::DensityEvaluator ev(params, grid);
    auto sym = screening::build_L_symbol(grid, params, opt_.m_scale);
    auto real = disorder::sample(spec, grid);
    model_ = std::make_unique<Model>(Model{spec, grid, params, std::move(ev), std::move(sym), std::move(real)});
  }
  return *model_;
}

const solver::SolveResult& Suite::base_solve() {
  if (!base_ && base_error_.empty()) {
    try {
      const auto& m = model();
      base_ = solver::solve(m.real, m.ev, m.sym, solver::SolveConfig{}, RealField(m.grid));
    } catch (const Error& e) {
      base_error_ = std::string(to_string(e.category())) + ": " + e.what();
    }
  }
  if (!base_) throw Error(ErrorCategory::Convergence, "reference solve failed: " + base_error_);
  return *base_;
}

Verdict Suite::run() {
  core_checks();
  jellium_checks();
  screening_checks();
  disorder_checks();
  density_checks();
  solver_checks();
  finite_size_probe();
  return std::move(verdict_);
}

void Suite::core_checks() {
  const Grid g(1.0, 2, 4);
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> uni(-1.0, 1.0);
  RealField f(g);
  for (auto& v : f.values) v = uni(gen);

  run_check("core", "spectral_round_trip", [&] {
    return at_most(max_abs(to_real(to_spectral(f)) - f) / max_abs(f), 1e-12);
  });
  run_check("core", "parseval", [&] {
    const auto s = to_spectral(f);
    double spec = 0.0;
    for (const auto& c : s.coefficients) spec += std::norm(c);
    spec *= g.volume();
    const double real = norm_L2_cell(f) * norm_L2_cell(f);
    return at_most(rel(spec, real), 1e-12);
  });
  run_check("core", "shift_preserves_norms", [&] {
    const auto sf = shift_lattice(f, {1, 0, 1});
    const double d = std::max(rel(norm_L2_cell(sf), norm_L2_cell(f)), rel(norm_H2_cell(sf), norm_H2_cell(f)));
    return at_most(d, 1e-12);
  });
}

void Suite::jellium_checks() {
  std::vector<double> mus;
  for (int i = 0; i < 50; ++i) mus.push_back(-2.0 + 6.0 * i / 49.0);

  run_check("jellium", "density_monotone", [&] {
    double worst = std::numeric_limits<double>::infinity();
    for (double b : setup_.matrix_beta) {
      for (std::size_t i = 1; i < mus.size(); ++i) {
        worst = std::min(worst, jellium::density_A(mus[i], b) - jellium::density_A(mus[i - 1], b));
      }
    }
    return Outcome{worst > 0.0, worst, 0.0, ">", "smallest forward difference on a 50-point mu grid"};
  });
  run_check("jellium", "bound_sandwich", [&] {
    double margin = std::numeric_limits<double>::infinity();
    for (double b : setup_.matrix_beta) {
      for (int i = 1; i <= 50; ++i) {
        const double mu = 4.0 * i / 50.0;
        const double a = jellium::density_A(mu, b);
        margin = std::min({margin, a / jellium::lower_bound_C(mu) - 1.0, jellium::upper_bound_B(mu, b) / a - 1.0});
      }
    }
    return Outcome{margin > 0.0, margin, 0.0, ">", "min relative gap of C < A < B"};
  });
  run_check("jellium", "bracket_and_solve", [&] {
    double worst_res = 0.0;
    double worst_margin = std::numeric_limits<double>::infinity();
    bool ok = true;
    const auto t0 = std::chrono::steady_clock::now();
    for (double b : setup_.matrix_beta) {
      for (double k : setup_.matrix_val) {
        const auto br = jellium::mu_bracket(k, b);
        ok = ok && jellium::density_A(br.lower, b) < k && k < jellium::density_A(br.upper, b);
        const double mu = jellium::solve_mu(k, b);
        worst_res = std::max(worst_res, std::abs(jellium::density_A(mu, b) - k) / k);
        worst_margin = std::min({worst_margin, mu - br.lower, br.upper - mu});
      }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    ok = ok && worst_margin > 0.0 && secs < 1.0;
    return Outcome{ok && worst_res <= 1e-10, worst_res, 1e-10, "<=",
                   "bracket margin " + fmt(worst_margin) + ", " + fmt(secs) + " s"};
  });
  run_check("jellium", "discrete_convergence", [&] {
    const double beta = 1.0, mu = 1.0;
    const double a = jellium::density_A(mu, beta);
    const PhysParams p{beta, mu, a};
    std::vector<double> err, mu_err;
    for (int nc : {8, 12, 16}) {
      const Grid g(1.0, nc, 2);
      err.push_back(std::abs(jellium::density_A_discrete(mu, p, g) - a));
      mu_err.push_back(std::abs(jellium::calibrate_mu_discrete(a, beta, g) - mu));
    }
    const bool mono = err[1] < err[0] && err[2] < err[1];
    const bool mu_mono = mu_err[1] < mu_err[0] && mu_err[2] < mu_err[1];
    constant("jellium.discrete_error_L16", err[2]);
    return Outcome{mono && mu_mono, err[2] / err[0], 1.0, "<",
                   "|A_h-A| " + fmt(err[0]) + " " + fmt(err[1]) + " " + fmt(err[2]) + "; |mu_h-mu| " +
                       fmt(mu_err[0]) + " " + fmt(mu_err[1]) + " " + fmt(mu_err[2])};
  });
}

void Suite::screening_checks() {
  std::vector<std::pair<double, double>> points;
  for (double b : setup_.matrix_beta) {
    for (double mu : setup_.matrix_val) points.emplace_back(b, mu);
  }
  std::vector<double> p_log;
  for (int i = 0; i < 20; ++i) p_log.push_back(0.1 * std::pow(500.0, i / 19.0));
  auto params_at = [](double b, double mu) { return PhysParams{b, mu, jellium::density_A(mu, b)}; };

  run_check("screening", "contour_equivalence", [&] {
    std::vector<std::pair<double, double>> pts = points;
    if (setup_.matrix_beta.size() > 1 || opt_.level == Level::Fast) pts.emplace_back(2.0, 0.5);
    double worst = 0.0;
    for (auto [b, mu] : pts) {
      const auto pp = params_at(b, mu);
      for (double p : p_log) {
        worst = std::max(worst, rel(screening::m_of_p(p, pp), screening::m_contour_oracle(p, pp)));
      }
    }
    return at_most(worst, 1e-6, "20 log-spaced p in [0.1, 50]");
  });
  run_check("screening", "contour_alpha_independence", [&] {
    double worst = 0.0;
    for (auto [b, mu] : points) {
      const auto pp = params_at(b, mu);
      for (double p : p_log) {
        worst = std::max(worst, rel(screening::m_contour_oracle(p, pp, 0.25 / b),
                                    screening::m_contour_oracle(p, pp, 0.5 / b)));
      }
    }
    return at_most(worst, 1e-7);
  });
  run_check("screening", "compressibility", [&] {
    double worst = 0.0;
    for (auto [b, mu] : points) {
      const double h = 1e-5;
      const double dA = (jellium::density_A(mu + h, b) - jellium::density_A(mu - h, b)) / (2.0 * h);
      worst = std::max(worst, rel(screening::m_of_p(0.0, params_at(b, mu)), dA));
    }
    return at_most(worst, 1e-6, "m(0) against a central difference of A");
  });
  run_check("screening", "large_p_asymptotics", [&] {
    double worst = 0.0;
    for (auto [b, mu] : points) {
      const auto pp = params_at(b, mu);
      const double p = 20.0 * std::sqrt(std::max(mu, 1.0));
      worst = std::max(worst, std::abs(p * p * screening::m_of_p(p, pp) / (2.0 * pp.kappa0) - 1.0));
    }
    return at_most(worst, 0.01, "|p^2 m / (2 kappa0) - 1| at p = 20 sqrt(max(mu,1))");
  });
  run_check("screening", "positivity_and_decay", [&] {
    bool ok = true;
    double smallest = std::numeric_limits<double>::infinity();
    for (auto [b, mu] : points) {
      std::vector<double> ps{0.0};
      for (int i = 0; i < 40; ++i) ps.push_back(0.01 * std::pow(1e4, i / 39.0));
      const auto table = screening::make_table(params_at(b, mu), ps);
      for (std::size_t i = 0; i < ps.size(); ++i) {
        smallest = std::min(smallest, table.m_values()[i]);
        if (i > 0) ok = ok && table.m_values()[i] < table.m_values()[i - 1];
      }
    }
    return Outcome{ok && smallest > 0.0, smallest, 0.0, ">", ok ? "strictly decreasing" : "not decreasing"};
  });
  run_check("screening", "minorant_bound", [&] {
    double margin = std::numeric_limits<double>::infinity();
    for (auto [b, mu] : points) {
      const auto pp = params_at(b, mu);
      for (int i = 0; i < 20; ++i) {
        const double p = 2.0 * std::sqrt(mu) * (i + 0.5) / 20.0;
        const double m = screening::m_of_p(p, pp);
        margin = std::min({margin, m / screening::m_minorant(p, mu) - 1.0,
                           m / screening::m_elementary_bound(p, mu) - 1.0});
      }
    }
    return Outcome{margin > 0.0, margin, 0.0, ">", "m(p) over the minorant for p^2/4 < mu"};
  });
  run_check("screening", "coercivity", [&] {
    std::vector<double> ps{0.0};
    for (int i = 0; i < 120; ++i) ps.push_back(1e-3 * std::pow(1e5, i / 119.0));
    auto ratio_at = [&](double b, double mu) {
      auto t = screening::make_table(params_at(b, mu), ps);
      std::vector<double> m = t.m_values();
      for (auto& v : m) v *= opt_.m_scale;
      return screening::coercivity(screening::ScreeningTable(t.params(), t.p_values(), m));
    };
    const auto ref = ratio_at(1.0, 1.0);
    double lo = std::numeric_limits<double>::infinity(), hi = 0.0, c0 = lo;
    for (auto [b, mu] : points) {
      const auto c = ratio_at(b, mu);
      lo = std::min(lo, c.ratio_min);
      hi = std::max(hi, c.ratio_min);
      c0 = std::min(c0, c.c0_empirical);
    }
    constant("screening.coercivity_ratio_ref", ref.ratio_min);
    constant("screening.c0_empirical", c0);
    const bool stable = hi / lo <= 2.0;
    return Outcome{lo >= 0.5 * ref.ratio_min && lo > 0.0 && stable, lo / ref.ratio_min, 0.5, ">=",
                   "min ratio " + fmt(lo) + ", spread " + fmt(hi / lo) + " (<= 2)"};
  });
}

void Suite::disorder_checks() {
  disorder::DisorderSpec spec;
  spec.qbar = 1.0;
  spec.width = 0.1;
  const Grid g(1.0, 2, 3);

  run_check("disorder", "bump_mass", [&] {
    const auto chi = disorder::bump_profile(spec, g);
    double s = 0.0, lo = 0.0;
    for (double v : chi) {
      s += v;
      lo = std::min(lo, v);
    }
    const int n = g.n_pts();
    double edge = 0.0;  // the cell's boundary planes are outside the open support
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) edge = std::max(edge, std::abs(chi[static_cast<std::size_t>(j * n + k)]));
    }
    const double err = std::abs(s * g.point_volume() - 1.0);
    return Outcome{err <= 1e-10 && lo >= 0.0 && edge == 0.0, err, 1e-10, "<=", "unit mass, non-negative, inside the cell"};
  });
  run_check("disorder", "seed_determinism", [&] {
    const auto a = disorder::sample(spec, g);
    const auto b = disorder::sample(spec, g);
    return Outcome{a.kappa.values == b.kappa.values && a.q == b.q, 0.0, 0.0, "==", "bit-identical"};
  });
  run_check("disorder", "per_cell_norms_shift_invariant", [&] {
    const auto r = disorder::sample(spec, g);
    auto a = per_unit_cell_L2(r.kappa_prime);
    auto b = per_unit_cell_L2(shift_lattice(r.kappa_prime, {1, 1, 0}));
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return at_most(d, 1e-14, "sorted per-cell L2 norms");
  });
  run_check("disorder", "width_linearity", [&] {
    auto at = [&](double w) {
      auto s = spec;
      s.width = w;
      return disorder::sample(s, g).kappa_prime;
    };
    const auto k0 = at(0.0);
    const auto k1 = at(0.1);
    const auto k3 = at(0.3);
    const double d = norm_L2_cell((k3 - k0) - 3.0 * (k1 - k0)) / norm_L2_cell(k3 - k0);
    return at_most(d, 1e-12);
  });
  run_check("disorder", "ensemble_mean", [&] {
    std::vector<double> means;
    for (std::uint64_t seed = 0; seed < 64; ++seed) {
      auto s = spec;
      s.seed = seed;
      means.push_back(mean(disorder::sample(s, g).kappa));
    }
    double m = 0.0, v = 0.0;
    for (double x : means) m += x / 64.0;
    for (double x : means) v += (x - m) * (x - m) / 63.0;
    const double bound = 3.0 * std::sqrt(v) / 8.0;
    return at_most(std::abs(m - 1.0), bound, "64 seeds, q in [0.9, 1.1]");
  });
}

void Suite::density_checks() {
  run_check("density", "hamiltonian_bases_agree", [&] {
    const Grid g(1.0, 2, 2);
    const double k0 = 0.03;
    const PhysParams p{1.0, jellium::solve_mu(k0, 1.0), k0};
    const density::DensityEvaluator ev(p, g);
    const RealField phi = 0.3 * smooth_random(g, 5);
    auto h = density::build_hamiltonian(phi);
    const auto n = static_cast<lapack_int>(g.size());
    double herm = 0.0;
    for (lapack_int r = 0; r < n; ++r) {
      for (lapack_int c = 0; c < n; ++c) {
        herm = std::max(herm, std::abs(h[static_cast<std::size_t>(r * n + c)] -
                                       std::conj(h[static_cast<std::size_t>(c * n + r)])));
      }
    }
    std::vector<double> w(static_cast<std::size_t>(n));
    auto* data = reinterpret_cast<lapack_complex_double*>(h.data());
    if (LAPACKE_zheev(LAPACK_ROW_MAJOR, 'N', 'U', n, data, n, w.data()) != 0) {
      throw Error(ErrorCategory::NumericFailure, "zheev failed");
    }
    const auto s = ev.spectrum(phi, 1e3);
    double d = 0.0;
    for (std::size_t i = 0; i < s.count(); ++i) d = std::max(d, std::abs(s.eigenvalues[i] - w[i]));
    const bool complete = s.count() == w.size();
    return Outcome{herm < 1e-13 && complete && d <= 1e-10, d, 1e-10, "<=",
                   "Hermitian defect " + fmt(herm) + ", plane-wave vs grid basis eigenvalues"};
  });

  const auto& m = [&]() -> const Model& { return model(); }();
  const Grid& g = m.grid;
  const RealField phi = 0.1 * smooth_random(g, 3);

  run_check("density", "eigen_residual", [&] {
    return at_most(density::spectrum_residual(phi, m.ev.spectrum(phi, m.ev.mu_h())), 1e-9);
  });
  run_check("density", "jellium_density", [&] {
    const auto r = m.ev.rho(RealField(g));
    return at_most(max_abs(r - RealField(g, m.params.kappa0)) / m.params.kappa0, 1e-10);
  });
  run_check("density", "constant_potential", [&] {
    const double c = 0.05;
    const auto r = m.ev.rho(RealField(g, c));
    const double target = jellium::density_A_discrete(m.ev.mu_h() + c, m.params, g);
    return at_most(max_abs(r - RealField(g, target)) / target, 1e-10);
  });
  run_check("density", "positivity", [&] {
    double lo = std::numeric_limits<double>::infinity();
    for (double amp : {0.1, 0.5, 1.0}) {
      const auto r = m.ev.rho(amp * smooth_random(g, 9));
      lo = std::min(lo, *std::min_element(r.values.begin(), r.values.end()));
    }
    return Outcome{lo > 0.0, lo, 0.0, ">", "minimum density"};
  });
  run_check("density", "gauge_covariance", [&] {
    double worst = 0.0;
    for (double t : {0.1, -0.1, 0.01, -0.01}) {
      RealField shifted = phi;
      for (auto& v : shifted.values) v += t;
      worst = std::max(worst, max_abs(m.ev.rho(shifted) - m.ev.rho(phi, m.ev.mu_h() + t)));
    }
    return at_most(worst, 1e-10, "rho[phi+t] at mu_h against rho[phi] at mu_h+t");
  });
  run_check("density", "translation_covariance", [&] {
    const std::array<int, 3> l{1, 2, 3};
    return at_most(max_abs(m.ev.rho(shift_lattice(phi, l)) - shift_lattice(m.ev.rho(phi), l)), 1e-11);
  });

  run_check("density", "linearization_diagonal", [&] {
    const double eps = 1e-3;
    double off = 0.0, exact = 0.0;
    for (const auto& md : kModes) {
      const auto mode = lattice_mode(g, md, setup_.mode_frac);
      auto central = [&](double e) {
        RealField d = m.ev.rho(e * mode) - m.ev.rho((-e) * mode);
        d *= 1.0 / (2.0 * e);
        return d;
      };
      // Richardson step removes the O(eps^2) cubic response (3G harmonics); the larger
      // step keeps eigensolver roundoff well below the diagonality tolerance.
      const RealField jac = (4.0 / 3.0) * central(0.5 * eps) - (1.0 / 3.0) * central(eps);
      const double diag = project(jac, mode);
      RealField rest = jac;
      for (std::size_t i = 0; i < rest.size(); ++i) rest[i] -= diag * mode[i];
      off = std::max(off, max_abs(rest) / std::abs(diag));
      const int sc = mode_index(g, setup_.mode_frac);
      const auto idx = g.index(md[0] * sc, md[1] * sc, md[2] * sc);
      exact = std::max(exact, rel(diag, m.ev.response()[idx]));
    }
    constant("density.jacobian_vs_discrete_response", exact);
    return Outcome{off <= 1e-8 && exact <= 1e-6, off, 1e-8, "<=",
                   "off-diagonal part; diagonal vs exact grid response " + fmt(exact)};
  });
  run_check("density", "linear_response_vs_multiplier", [&] {
    const double eps = 1e-4;
    double worst = 0.0;
    for (const auto& md : kModes) {
      const auto mode = lattice_mode(g, md, setup_.mode_frac);
      RealField d = m.ev.rho(eps * mode);
      for (auto& v : d.values) v -= m.params.kappa0;
      const double mh = project(d, mode) / eps;
      const long sc = mode_index(g, setup_.mode_frac);
      const long shell = static_cast<long>(md[0] * md[0] + md[1] * md[1] + md[2] * md[2]) * sc * sc;
      worst = std::max(worst, rel(mh, m.sym.m_at_shell(shell)));
    }
    constant("density.linear_response_rel_error", worst);
    return at_most(worst, 0.05, "modes " + fmt(setup_.mode_frac) + " x 2pi(1,0,0), (1,1,0), (1,1,1) over a");
  });
  run_check("density", "linear_response_finite_size", [&] {
    const double eps = 1e-4;
    std::vector<std::array<double, 3>> errs;
    for (int nc : setup_.sizes) {
      const Grid gg(1.0, nc, setup_.n_pts);
      const density::DensityEvaluator ev(m.params, gg);
      std::array<double, 3> e{};
      for (std::size_t k = 0; k < kModes.size(); ++k) {
        const auto mode = lattice_mode(gg, kModes[k], setup_.mode_frac);
        RealField d = ev.rho(eps * mode);
        for (auto& v : d.values) v -= m.params.kappa0;
        const auto& md = kModes[k];
        const double p = setup_.mode_frac * 2.0 * kPi / gg.a() *
                         std::sqrt(md[0] * md[0] + md[1] * md[1] + md[2] * md[2]);
        e[k] = rel(project(d, mode) / eps, screening::m_of_p(p, m.params));
      }
      errs.push_back(e);
    }
    bool mono = true;
    std::string detail;
    for (std::size_t k = 0; k < 3; ++k) {
      for (std::size_t s = 0; s < errs.size(); ++s) {
        if (s > 0) mono = mono && errs[s][k] < errs[s - 1][k];
        detail += (s ? ">" : "") + fmt(errs[s][k]);
      }
      detail += " ";
    }
    return Outcome{mono, errs.back()[0], errs.front()[0], "decreasing", detail};
  });

  const RealField dir = smooth_random(g, 21);
  run_check("density", "quadratic_scaling", [&] {
    std::vector<double> h{0.02, 0.04, 0.08, 0.16}, n, nc;
    for (double s : h) {
      n.push_back(norm_L2_cell(m.ev.nonlinearity(s * dir, m.ev.response())));
      nc.push_back(norm_L2_cell(m.ev.nonlinearity(s * dir, m.sym)));
    }
    const double k = slope(h, n);
    constant("density.quadratic_slope", k);
    constant("density.quadratic_slope_continuum_multiplier", slope(h, nc));
    constant("density.C_beta_mu_estimate", n.back() / (h.back() * h.back()));
    return within(k, 2.0, 0.1, "log-log slope of ||N|| against ||phi||_H2");
  });
  run_check("density", "constant_potential_nonlinearity", [&] {
    double ratio[2];
    int i = 0;
    for (double t : {1e-2, 1e-3}) {
      ratio[i++] = max_abs(m.ev.nonlinearity(RealField(g, t), m.ev.response())) / (t * t);
    }
    const double h = 1e-3;
    const double mu = m.ev.mu_h();
    const double a2 = (jellium::density_A_discrete(mu + h, m.params, g) - 2.0 * m.params.kappa0 +
                       jellium::density_A_discrete(mu - h, m.params, g)) / (h * h);
    const auto n2 = m.ev.extract_n2(RealField(g, 1.0), m.ev.response());
    const double err = rel(mean(n2.n2), -0.5 * a2);
    return Outcome{rel(ratio[0], ratio[1]) < 0.05 && err <= 0.01, err, 0.01, "<=",
                   "N2 vs -A_h''/2; ||N(t)||/t^2 = " + fmt(ratio[0]) + ", " + fmt(ratio[1])};
  });
  run_check("density", "second_order_extraction", [&] {
    const auto a = m.ev.extract_n2(dir, m.ev.response());
    const auto b = m.ev.extract_n2(2.0 * dir, m.ev.response());
    const double homog = norm_L2_cell(b.n2 - 4.0 * a.n2) / norm_L2_cell(4.0 * a.n2);
    std::vector<double> eps{0.08, 0.04, 0.02}, rem;
    for (double e : eps) rem.push_back(norm_L2_cell(m.ev.nonlinearity(e * dir, m.ev.response()) - (e * e) * a.n2));
    const double order = slope(eps, rem);
    constant("density.n2_richardson_disagreement", a.rel_disagreement);
    constant("density.remainder_order", order);
    return Outcome{a.rel_disagreement <= 0.1 && homog <= 0.01 && std::abs(order - 3.0) <= 0.3,
                   a.rel_disagreement, 0.1, "<=",
                   "homogeneity " + fmt(homog) + ", remainder order " + fmt(order)};
  });
}

void Suite::solver_checks() {
  run_check("solver", "jellium_fixed_point", [&] {
    const auto& m = model();
    const auto bg = disorder::jellium_background(m.spec, m.grid);
    const auto res = solver::solve(bg, m.ev, m.sym, quiet(), RealField(m.grid));
    return Outcome{res.report.iterations == 1 && max_abs(res.phi) == 0.0 && res.report.residual < 1e-12,
                   res.report.residual, 1e-12, "<", std::to_string(res.report.iterations) + " iteration(s)"};
  });
  run_check("solver", "jellium_basin", [&] {
    const auto& m = model();
    const auto bg = disorder::jellium_background(m.spec, m.grid);
    const auto res = solver::solve(bg, m.ev, m.sym, quiet(), 0.05 * smooth_random(m.grid, 4));
    return at_most(norm_H2_cell(res.phi), 1e-8, "returns to phi = 0 from ||phi0||_H2 = 0.05");
  });
  run_check("solver", "convergence", [&] {
    const auto& r = base_solve().report;
    double all = 0.0;
    for (double x : r.ratios) all = std::max(all, x);
    constant("solver.contraction_factor", r.tail_ratio_max());
    constant("solver.iterations", r.iterations);
    const bool ok = r.converged && r.tail_ratio_max() < 1.0 && all < 0.5 && r.residual <= 1e-8 &&
                    std::abs(r.neutrality) <= 1e-9;
    return Outcome{ok, r.residual, 1e-8, "<=",
                   "ratios < " + fmt(all) + ", neutrality " + fmt(r.neutrality)};
  });
  run_check("solver", "linear_regime", [&] {
    const auto& m = model();
    const auto& b = base_solve();
    const auto lin = solver::linear_response(m.real, m.sym);
    const double d = norm_H2_cell(lin - b.phi) / norm_H2_cell(b.phi);
    constant("solver.linear_response_deviation", d);
    return at_most(d, 0.1, "||phi - L^-1 kappa'||_H2 / ||phi||_H2");
  });
  run_check("solver", "fixed_point_is_pde", [&] {
    const auto& m = model();
    auto cfg = quiet();
    cfg.tol_delta = 1e-12;
    cfg.tol_residual = 1.0;
    const auto res = solver::solve(m.real, m.ev, m.sym, cfg, base_solve().phi);
    return at_most(res.report.residual, 1e-10, "step " + fmt(res.report.step_norms.back()));
  });
  run_check("solver", "uniqueness", [&] {
    const auto& m = model();
    const auto lin = solver::linear_response(m.real, m.sym);
    const auto v = solver::solve_multi_init(m.real, m.ev, m.sym, quiet(),
                                            {RealField(m.grid), lin, 0.5 * lin}, 2.0 * norm_H2_cell(lin));
    constant("solver.uniqueness_max_distance", v.max_pairwise_h2);
    return at_most(v.max_pairwise_h2, 1e-6, "inits 0, L^-1 kappa', L^-1 kappa'/2");
  });
  run_check("solver", "zero_mode_contraction", [&] {
    const auto& m = model();
    const auto v = solver::solve_multi_init(m.real, m.ev, m.sym, quiet(),
                                            {RealField(m.grid), RealField(m.grid, 0.01)}, 1.0);
    return at_most(v.max_pairwise_h2, 1e-6, "inits differing by the constant 0.01");
  });
  run_check("solver", "gauge_residual_invariance", [&] {
    return at_most(base_solve().report.gauge_residual_change, 1e-10, "t = +-0.01");
  });
  run_check("solver", "shift_equivariance", [&] {
    const auto& m = model();
    const std::array<int, 3> l{1, 2, 3};
    const auto res = solver::solve(disorder::shifted(m.real, l), m.ev, m.sym, quiet(), RealField(m.grid));
    return at_most(norm_H2_cell(res.phi - shift_lattice(base_solve().phi, l)), 1e-8);
  });
  run_check("solver", "linear_scaling_and_reproducibility", [&] {
    const auto& m = model();
    std::vector<double> kp, ph;
    bool same = true;
    for (double w : {0.01, 0.02, 0.04, 0.08}) {
      auto spec = m.spec;
      spec.width = w;
      const auto r = disorder::sample(spec, m.grid);
      const auto res = solver::solve(r, m.ev, m.sym, solver::SolveConfig{}, RealField(m.grid));
      kp.push_back(res.report.kappa_prime_l2);
      ph.push_back(res.report.phi_h2);
      if (w == m.spec.width) same = res.report.to_json().dump() == base_solve().report.to_json().dump();
    }
    const double k = slope(kp, ph);
    double c2 = 0.0;
    for (std::size_t i = 0; i < kp.size(); ++i) c2 = std::max(c2, ph[i] / kp[i]);
    constant("solver.scaling_slope", k);
    constant("solver.C2_estimate", c2);
    Outcome o = within(k, 1.0, 0.05, std::string("repeat solve ") + (same ? "byte-identical" : "differs"));
    o.passed = o.passed && same;
    return o;
  });
}

void Suite::finite_size_probe() {
  run_check("verify", "finite_size_contraction", [&] {
    const auto& m = model();
    std::vector<double> ratios;
    for (int nc : {2, 3, 4}) {
      if (nc == m.grid.n_cells()) {
        ratios.push_back(base_solve().report.tail_ratio_max());
        continue;
      }
      const Grid g(m.grid.a(), nc, m.grid.n_pts());
      const density::DensityEvaluator ev(m.params, g);
      const auto sym = screening::build_L_symbol(g, m.params, opt_.m_scale);
      const auto res = solver::solve(disorder::sample(m.spec, g), ev, sym, quiet(), RealField(g));
      ratios.push_back(res.report.tail_ratio_max());
    }
    for (std::size_t i = 0; i < ratios.size(); ++i) {
      constant("verify.contraction_ratio_n" + std::to_string(i + 2), ratios[i]);
    }
    const double smaller = std::min(ratios[0], ratios[1]);
    const bool below_one = *std::max_element(ratios.begin(), ratios.end()) < 1.0;
    Outcome o = at_most(ratios[2] / smaller, 1.1,
                        "ratios " + fmt(ratios[0]) + " " + fmt(ratios[1]) + " " + fmt(ratios[2]));
    o.passed = o.passed && below_one;
    return o;
  });
}

}  // namespace

bool Verdict::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed; });
}

const Check* Verdict::find(const std::string& name) const {
  for (const auto& c : checks) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

nlohmann::ordered_json Verdict::to_json() const {
  nlohmann::ordered_json j;
  j["level"] = level == Level::Fast ? "fast" : "full";
  j["m_scale"] = m_scale;
  j["passed"] = all_passed();
  auto& arr = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : checks) {
    arr.push_back({{"group", c.group}, {"name", c.name}, {"passed", c.passed},
                   {"observed", c.observed}, {"relation", c.relation}, {"threshold", c.threshold},
                   {"detail", c.detail}, {"seconds", c.seconds}});
  }
  auto& k = j["constants"] = nlohmann::ordered_json::object();
  for (const auto& [name, v] : constants) k[name] = v;
  return j;
}

std::string Verdict::to_text() const {
  std::ostringstream os;
  for (const auto& c : checks) {
    os << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(10) << c.group << std::setw(36)
       << c.name << std::right << std::setw(12) << std::setprecision(4) << c.observed << ' '
       << std::setw(10) << c.relation << ' ' << std::setw(10) << c.threshold << "  " << c.detail << '\n';
  }
  for (const auto& [name, v] : constants) os << "const " << name << " = " << std::setprecision(6) << v << '\n';
  return os.str();
}

Verdict run_suite(const SuiteOptions& options) { return Suite(options).run(); }

}  // namespace rehf::verify
