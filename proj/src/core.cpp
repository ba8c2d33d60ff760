#include "rehf/core.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <string>

#include <fftw3.h>

#include "rehf/errors.hpp"

namespace rehf {

std::string_view to_string(ErrorCategory c) noexcept {
  switch (c) {
    case ErrorCategory::Hypothesis: return "hypothesis-failure";
    case ErrorCategory::NumericFailure: return "numeric-failure";
    case ErrorCategory::Branch: return "branch-handling";
    case ErrorCategory::Regime: return "regime";
    case ErrorCategory::Convergence: return "convergence";
    case ErrorCategory::Resource: return "resource";
    case ErrorCategory::SpecValidation: return "spec-validation";
    case ErrorCategory::Config: return "configuration";
    case ErrorCategory::Internal: return "internal";
  }
  return "unknown";
}

void PhysParams::validate() const {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw Error(ErrorCategory::SpecValidation, "beta must be positive and finite");
  }
  if (!std::isfinite(mu) || !std::isfinite(kappa0)) {
    throw Error(ErrorCategory::SpecValidation, "mu and kappa0 must be finite");
  }
}

Grid::Grid(double a, int n_cells, int n_pts) : a_(a), n_cells_(n_cells), n_pts_(n_pts) {
  if (!(a > 0.0) || n_cells < 1 || n_pts < 1) {
    throw Error(ErrorCategory::SpecValidation, "grid needs a > 0, n_cells >= 1, n_pts >= 1");
  }
}

std::array<int, 3> Grid::coords(std::size_t idx) const noexcept {
  const auto n = static_cast<std::size_t>(n_side());
  return {static_cast<int>(idx / (n * n)), static_cast<int>((idx / n) % n), static_cast<int>(idx % n)};
}

long Grid::shell(std::size_t idx) const noexcept {
  const auto c = coords(idx);
  long s = 0;
  for (int j : c) {
    const long m = folded(j);
    s += m * m;
  }
  return s;
}

double Grid::g_axis_max() const noexcept {
  const int n = n_side();
  return dk() * static_cast<double>(n / 2);
}

bool Grid::cutoff_ok(double beta, double mu) const noexcept {
  const double g = g_axis_max();
  return beta * (g * g - mu) > 30.0;
}

RealField::RealField(const Grid& g, std::vector<double> v) : grid(g), values(std::move(v)) {
  if (values.size() != grid.size()) {
    throw Error(ErrorCategory::Internal, "field storage does not match grid size");
  }
}

namespace {

void require_same_grid(const Grid& a, const Grid& b) {
  if (!(a == b)) throw Error(ErrorCategory::Internal, "fields live on different grids");
}

// FFTW planning is not thread safe; plans are cached per edge length and
// executed through the new-array interface, which is.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

const PlanPair& plans_for(int n) {
  static std::mutex mutex;
  static std::map<int, PlanPair> cache;
  std::lock_guard lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;
  const auto total = static_cast<std::size_t>(n) * n * n;
  std::vector<std::complex<double>> scratch(total);
  auto* p = reinterpret_cast<fftw_complex*>(scratch.data());
  PlanPair pair;
  pair.forward = fftw_plan_dft_3d(n, n, n, p, p, FFTW_FORWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  pair.backward = fftw_plan_dft_3d(n, n, n, p, p, FFTW_BACKWARD, FFTW_ESTIMATE | FFTW_UNALIGNED);
  return cache.emplace(n, pair).first->second;
}

void execute(fftw_plan plan, std::vector<std::complex<double>>& data) {
  auto* p = reinterpret_cast<fftw_complex*>(data.data());
  fftw_execute_dft(plan, p, p);
}

}  // namespace

RealField& RealField::operator+=(const RealField& o) {
  require_same_grid(grid, o.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
  return *this;
}

RealField& RealField::operator-=(const RealField& o) {
  require_same_grid(grid, o.grid);
  for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
  return *this;
}

RealField& RealField::operator*=(double s) {
  for (double& v : values) v *= s;
  return *this;
}

RealField operator+(RealField lhs, const RealField& rhs) { return lhs += rhs; }
RealField operator-(RealField lhs, const RealField& rhs) { return lhs -= rhs; }
RealField operator*(double s, RealField f) { return f *= s; }

std::size_t negate_mode(const Grid& g, std::size_t idx) noexcept {
  const int n = g.n_side();
  const auto c = g.coords(idx);
  return g.index((n - c[0]) % n, (n - c[1]) % n, (n - c[2]) % n);
}

double SpectralField::hermitian_defect() const {
  double worst = 0.0;
  for (std::size_t i = 0; i < coefficients.size(); ++i) {
    worst = std::max(worst, std::abs(coefficients[negate_mode(grid, i)] - std::conj(coefficients[i])));
  }
  return worst;
}

SpectralField to_spectral(const RealField& f) {
  SpectralField s(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) s.coefficients[i] = f.values[i];
  execute(plans_for(f.grid.n_side()).forward, s.coefficients);
  const double inv = 1.0 / static_cast<double>(f.size());
  for (auto& c : s.coefficients) c *= inv;
  return s;
}

RealField to_real(const SpectralField& s) {
  auto data = s.coefficients;
  execute(plans_for(s.grid.n_side()).backward, data);
  RealField f(s.grid);
  for (std::size_t i = 0; i < data.size(); ++i) f.values[i] = data[i].real();
  return f;
}

RealField apply_symbol(const RealField& f, std::span<const double> symbol) {
  if (symbol.size() != f.size()) {
    throw Error(ErrorCategory::Internal, "symbol does not cover the grid");
  }
  auto s = to_spectral(f);
  for (std::size_t i = 0; i < symbol.size(); ++i) s.coefficients[i] *= symbol[i];
  return to_real(s);
}

double mean(const RealField& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v;
  return acc / static_cast<double>(f.size());
}

double max_abs(const RealField& f) {
  double m = 0.0;
  for (double v : f.values) m = std::max(m, std::abs(v));
  return m;
}

double norm_L2_cell(const RealField& f) {
  double acc = 0.0;
  for (double v : f.values) acc += v * v;
  return std::sqrt(f.grid.point_volume() * acc);
}

double norm_H2_cell(const RealField& f) {
  const auto s = to_spectral(f);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.coefficients.size(); ++i) {
    const double w = 1.0 + f.grid.g2(i);
    acc += w * w * std::norm(s.coefficients[i]);
  }
  return std::sqrt(f.grid.volume() * acc);
}

std::vector<double> per_unit_cell_L2(const RealField& f) {
  const Grid& g = f.grid;
  const int nc = g.n_cells();
  const int np = g.n_pts();
  std::vector<double> acc(static_cast<std::size_t>(nc) * nc * nc, 0.0);
  for (std::size_t idx = 0; idx < f.size(); ++idx) {
    const auto c = g.coords(idx);
    const std::size_t cell =
        (static_cast<std::size_t>(c[0] / np) * nc + static_cast<std::size_t>(c[1] / np)) * nc +
        static_cast<std::size_t>(c[2] / np);
    acc[cell] += f.values[idx] * f.values[idx];
  }
  for (double& v : acc) v = std::sqrt(g.point_volume() * v);
  return acc;
}

NormPair norm_L2_report(const RealField& f) {
  const auto cells = per_unit_cell_L2(f);
  return {norm_L2_cell(f), *std::max_element(cells.begin(), cells.end())};
}

RealField shift_lattice(const RealField& f, std::array<int, 3> l) {
  const Grid& g = f.grid;
  const int n = g.n_side();
  RealField out(g);
  std::array<int, 3> off{};
  for (int d = 0; d < 3; ++d) off[d] = ((l[d] * g.n_pts()) % n + n) % n;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        out.values[g.index((i + off[0]) % n, (j + off[1]) % n, (k + off[2]) % n)] =
            f.values[g.index(i, j, k)];
      }
    }
  }
  return out;
}

RealField shift_displacement(const RealField& f, std::array<double, 3> displacement) {
  std::array<int, 3> l{};
  for (int d = 0; d < 3; ++d) {
    const double cells = displacement[d] / f.grid.a();
    const double r = std::round(cells);
    if (std::abs(cells - r) > 1e-12 * std::max(1.0, std::abs(cells))) {
      throw Error(ErrorCategory::Config, "shift is not a whole number of lattice constants");
    }
    l[d] = static_cast<int>(r);
  }
  return shift_lattice(f, l);
}

void write_field_table(std::ostream& os, const RealField& f) {
  const Grid& g = f.grid;
  os << "# rehf-field v1\n";
  os << "# lattice_a " << std::setprecision(17) << g.a() << "\n";
  os << "# n_cells " << g.n_cells() << "\n";
  os << "# n_pts " << g.n_pts() << "\n";
  os << "# columns i j k value\n";
  const int n = g.n_side();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        os << i << ' ' << j << ' ' << k << ' ' << std::setprecision(17)
           << f.values[g.index(i, j, k)] << '\n';
      }
    }
  }
}

RealField read_field_table(std::istream& is) {
  double a = 0.0;
  int n_cells = 0;
  int n_pts = 0;
  std::string line;
  std::vector<std::string> body;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream hs(line.substr(1));
      std::string key;
      hs >> key;
      if (key == "lattice_a") hs >> a;
      if (key == "n_cells") hs >> n_cells;
      if (key == "n_pts") hs >> n_pts;
      continue;
    }
    body.push_back(line);
  }
  Grid g(a, n_cells, n_pts);
  RealField f(g);
  if (body.size() != g.size()) {
    throw Error(ErrorCategory::Config, "field table row count does not match its header");
  }
  for (const auto& row : body) {
    std::istringstream rs(row);
    int i = 0, j = 0, k = 0;
    double v = 0.0;
    if (!(rs >> i >> j >> k >> v) || i < 0 || j < 0 || k < 0 || i >= g.n_side() ||
        j >= g.n_side() || k >= g.n_side()) {
      throw Error(ErrorCategory::Config, "malformed field table row: " + row);
    }
    f.values[g.index(i, j, k)] = v;
  }
  return f;
}

double fermi_dirac(double x) noexcept {
  if (x > 0.0) {
    const double e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

std::complex<double> fermi_dirac(std::complex<double> x) noexcept {
  if (x.real() > 0.0) {
    const auto e = std::exp(-x);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(x));
}

}  // namespace rehf
