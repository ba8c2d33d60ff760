#include "rehf/screening.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <sstream>

// Boost 1.74 pchip calls isnan unqualified.
using std::isnan;
#include <boost/math/interpolators/pchip.hpp>

#include "numerics.hpp"
#include "rehf/errors.hpp"

namespace rehf::screening {

namespace {

using cd = std::complex<double>;
constexpr double kTruncation = 40.0;
const double kPrefactor = 1.0 / (8.0 * kPi * kPi);

// ln|(s+p)/(s-p)| with s = sqrt(4t), written so that both s << p and s >> p stay accurate.
double log_kernel(double t, double p) {
  const double s = 2.0 * std::sqrt(t);
  const double gap = std::abs(s - p);
  if (gap == 0.0) return 0.0;  // measure-zero singular point
  return std::log1p(2.0 * std::min(s, p) / gap);
}

void check(const detail::Quad& q, double tol, const char* what, double p) {
  if (!(q.error <= tol) || !std::isfinite(q.value)) {
    std::ostringstream msg;
    msg << "multiplier quadrature failed on " << what << " panel at p=" << p
        << " (error estimate " << q.error << ")";
    throw Error(ErrorCategory::NumericFailure, msg.str());
  }
}

// arctan(w) = (i/2)(log(1 - i w) - log(1 + i w)), principal logarithms.
cd arctan_principal(cd w) {
  const cd i(0.0, 1.0);
  return 0.5 * i * (std::log(1.0 - i * w) - std::log(1.0 + i * w));
}

}  // namespace

double m_star(double mu) { return std::min(mu, std::sqrt(mu)); }

double m_of_p(double p, const PhysParams& params) {
  params.validate();
  if (p < 0.0) throw Error(ErrorCategory::SpecValidation, "momentum must be non-negative");
  const double beta = params.beta;
  const double mu = params.mu;
  const double t_max = std::max(mu, 0.0) + kTruncation / beta;
  auto occ = [=](double t) { return fermi_dirac(beta * (t - mu)); };

  if (p == 0.0) {
    // t = s^2 removes the t^{-1/2} endpoint singularity.
    auto g = [&](double s) { return 2.0 * occ(s * s); };
    detail::Quad q;
    const double s_max = std::sqrt(t_max);
    if (mu > 0.0) {
      q += detail::integrate(g, 0.0, std::sqrt(mu));
      q += detail::integrate(g, std::sqrt(mu), s_max);
    } else {
      q += detail::integrate(g, 0.0, s_max);
    }
    check(q, 1e-10 / kPrefactor, "zero-momentum", p);
    return kPrefactor * q.value;
  }

  const double t0 = 0.25 * p * p;
  auto g = [&](double t) { return log_kernel(t, p) * occ(t); };
  detail::Quad total;
  if (t0 >= t_max) {
    // Singularity lies where the occupation is below e^{-40}.
    if (mu > 0.0 && mu < t_max) {
      total += detail::integrate(g, 0.0, mu);
      total += detail::integrate(g, mu, t_max);
    } else {
      total += detail::integrate(g, 0.0, t_max);
    }
    check(total, 1e-10 * p / kPrefactor, "regular", p);
  } else {
    // t = t0 (1 -+ u^2) on either side of the singular point turns
    // ln|t - t0| into a bounded integrand u ln u.
    auto below = [&](double u) { return g(t0 * (1.0 - u * u)) * 2.0 * t0 * u; };
    auto above = [&](double u) { return g(t0 * (1.0 + u * u)) * 2.0 * t0 * u; };
    const auto q1 = detail::integrate_endpoint(below, 0.0, 1.0);
    check(q1, 1e-10 * p / kPrefactor, "below-singularity", p);
    const auto q2 = detail::integrate_endpoint(above, 0.0, 1.0);
    check(q2, 1e-10 * p / kPrefactor, "above-singularity", p);
    total += q1;
    total += q2;
    if (2.0 * t0 < t_max) {
      // t = s0^2 e^{2v}: the kernel decays like p / sqrt(t), which spans many scales for small p.
      const double s0 = std::sqrt(2.0 * t0);
      auto gv = [&](double v) {
        const double t = 2.0 * t0 * std::exp(2.0 * v);
        return g(t) * 2.0 * t;
      };
      auto v_of = [&](double t) { return 0.5 * std::log(t) - std::log(s0); };
      detail::Quad q3;
      if (mu > 2.0 * t0) {
        q3 += detail::integrate(gv, 0.0, v_of(mu));
        q3 += detail::integrate(gv, v_of(mu), v_of(t_max));
      } else {
        q3 += detail::integrate(gv, 0.0, v_of(t_max));
      }
      check(q3, 1e-10 * p / kPrefactor, "outer", p);
      total += q3;
    }
  }
  return kPrefactor * total.value / p;
}

ContourValue m_contour(double p, const PhysParams& params, double alpha) {
  params.validate();
  if (!(p > 0.0)) throw Error(ErrorCategory::SpecValidation, "contour oracle needs p > 0");
  const double beta = params.beta;
  const double mu = params.mu;
  if (alpha <= 0.0) alpha = 0.5 / beta;
  if (alpha >= kPi / beta) {
    throw Error(ErrorCategory::SpecValidation, "contour height must stay below the first pole");
  }
  const double x_max = std::max(mu, 0.0) + kTruncation / beta;

  auto integrand = [&](cd z) {
    const cd w = p / std::sqrt(-4.0 * z);
    return fermi_dirac(beta * (z - mu)) * arctan_principal(w);
  };
  // Horizontal pair: bottom traversed rightwards, top leftwards.
  auto horizontal = [&](double t) {
    return integrand(cd(t, -alpha)) - integrand(cd(t, alpha));
  };
  // Vertical segment from -alpha + i alpha down to -alpha - i alpha: dz = -i dy.
  auto vertical = [&](double y) { return cd(0.0, -1.0) * integrand(cd(-alpha, y)); };

  std::vector<double> cuts{-alpha, x_max};
  for (double c : {0.25 * p * p, mu}) {
    if (c > -alpha && c < x_max) cuts.push_back(c);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end(),
                         [](double a, double b) { return b - a < 1e-9 * std::max(1.0, std::abs(b)); }),
             cuts.end());
  cuts.back() = x_max;

  cd sum(0.0, 0.0);
  double err = 0.0;
  auto add = [&](auto&& f, double a, double b) {
    const auto re = detail::integrate([&](double x) { return f(x).real(); }, a, b, 1e-12);
    const auto im = detail::integrate([&](double x) { return f(x).imag(); }, a, b, 1e-12);
    sum += cd(re.value, im.value);
    err += re.error + im.error;
  };
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) add(horizontal, cuts[k], cuts[k + 1]);
  add(vertical, -alpha, alpha);

  // M = -(1/(8 pi^2 p i)) * contour integral.
  const cd m = -kPrefactor / p * sum / cd(0.0, 1.0);
  const double tail = 2.0 * kPrefactor / p * std::exp(-beta * (x_max - mu)) / beta * (0.5 * kPi + 1.0);
  if (!(err * kPrefactor / p <= 1e-9 * std::abs(m.real()) + 1e-14)) {
    std::ostringstream msg;
    msg << "contour quadrature failed at p=" << p << " (error estimate " << err * kPrefactor / p << ")";
    throw Error(ErrorCategory::NumericFailure, msg.str());
  }
  if (std::abs(m.imag()) > 1e-8 * std::abs(m.real())) {
    std::ostringstream msg;
    msg << "contour integral kept an imaginary part " << m.imag() << " against real part "
        << m.real() << " at p=" << p << "; branch handling is inconsistent";
    throw Error(ErrorCategory::Branch, msg.str());
  }
  return {m.real(), std::abs(m.imag()), tail};
}

double m_contour_oracle(double p, const PhysParams& params, double alpha) {
  return m_contour(p, params, alpha).value;
}

double m_minorant(double p, double mu) {
  if (!(mu > 0.0)) return 0.0;
  if (p == 0.0) return kPrefactor * 0.5 * 2.0 * std::sqrt(mu);
  const double t0 = 0.25 * p * p;
  auto g = [&](double t) { return 0.5 * log_kernel(t, p); };
  detail::Quad q;
  if (t0 < mu) {
    q += detail::integrate_endpoint([&](double u) { return g(t0 * (1.0 - u * u)) * 2.0 * t0 * u; }, 0.0, 1.0);
    const double u_top = std::sqrt(mu / t0 - 1.0);
    q += detail::integrate_endpoint([&](double u) { return g(t0 * (1.0 + u * u)) * 2.0 * t0 * u; }, 0.0, u_top);
  } else {
    q += detail::integrate(g, 0.0, mu);
  }
  return kPrefactor * q.value / p;
}

double m_elementary_bound(double p, double mu) {
  return kPrefactor * (std::sqrt(mu) - p / 3.0);
}

ScreeningTable::ScreeningTable(PhysParams params, std::vector<double> p_values,
                               std::vector<double> m_values)
    : params_(params), p_(std::move(p_values)), m_(std::move(m_values)) {
  if (p_.size() != m_.size() || p_.empty()) {
    throw Error(ErrorCategory::Internal, "screening table needs matching, non-empty columns");
  }
  for (std::size_t i = 1; i < p_.size(); ++i) {
    if (!(p_[i] > p_[i - 1])) throw Error(ErrorCategory::Internal, "table momenta must increase");
  }
  if (p_.size() >= 4) {
    auto x = p_;
    auto y = m_;
    auto spline = boost::math::interpolators::pchip<std::vector<double>>(std::move(x), std::move(y));
    interp_ = [spline](double p) { return spline(p); };
  } else {
    interp_ = [this](double p) {
      auto it = std::upper_bound(p_.begin(), p_.end(), p);
      if (it == p_.begin()) return m_.front();
      if (it == p_.end()) return m_.back();
      const auto i = static_cast<std::size_t>(it - p_.begin());
      const double w = (p - p_[i - 1]) / (p_[i] - p_[i - 1]);
      return (1.0 - w) * m_[i - 1] + w * m_[i];
    };
  }
}

double ScreeningTable::operator()(double p) const {
  auto it = std::lower_bound(p_.begin(), p_.end(), p);
  if (it != p_.end() && *it == p) return m_[static_cast<std::size_t>(it - p_.begin())];
  if (p < p_.front() || p > p_.back()) {
    throw Error(ErrorCategory::Internal, "momentum outside the tabulated range");
  }
  return interp_(p);
}

ScreeningTable make_table(const PhysParams& params, std::vector<double> p_values) {
  std::sort(p_values.begin(), p_values.end());
  p_values.erase(std::unique(p_values.begin(), p_values.end()), p_values.end());
  std::vector<double> m;
  m.reserve(p_values.size());
  for (double p : p_values) m.push_back(m_of_p(p, params));
  return ScreeningTable(params, std::move(p_values), std::move(m));
}

Lsymbol::Lsymbol(const Grid& grid, ScreeningTable table, std::map<long, double> m_by_shell)
    : grid_(grid), table_(std::move(table)), m_by_shell_(std::move(m_by_shell)) {
  m_grid_.resize(grid_.size());
  symbol_.resize(grid_.size());
  for (std::size_t i = 0; i < grid_.size(); ++i) {
    const double m = m_at_shell(grid_.shell(i));
    m_grid_[i] = m;
    symbol_[i] = grid_.g2(i) / (4.0 * kPi) + m;
  }
}

double Lsymbol::m_at_shell(long shell) const {
  auto it = m_by_shell_.find(shell);
  if (it == m_by_shell_.end()) {
    throw Error(ErrorCategory::Internal,
                "multiplier table has no entry for |G|^2 shell " + std::to_string(shell));
  }
  return it->second;
}

Lsymbol build_L_symbol(const Grid& grid, const PhysParams& params, double m_scale) {
  std::map<long, double> by_shell;
  for (std::size_t i = 0; i < grid.size(); ++i) by_shell.emplace(grid.shell(i), 0.0);
  std::vector<double> ps;
  std::vector<double> ms;
  for (auto& [shell, m] : by_shell) {
    const double p = grid.dk() * std::sqrt(static_cast<double>(shell));
    m = m_scale * m_of_p(p, params);
    ps.push_back(p);
    ms.push_back(m);
  }
  return Lsymbol(grid, ScreeningTable(params, std::move(ps), std::move(ms)), std::move(by_shell));
}

namespace {
void require_grid(const RealField& f, const Lsymbol& sym) {
  if (!(f.grid == sym.grid())) {
    throw Error(ErrorCategory::Internal, "symbol was tabulated for a different grid");
  }
}
}  // namespace

RealField apply_L_inverse(const RealField& r, const Lsymbol& sym) {
  require_grid(r, sym);
  std::vector<double> inv(sym.symbol().size());
  for (std::size_t i = 0; i < inv.size(); ++i) inv[i] = 1.0 / sym.symbol()[i];
  return apply_symbol(r, inv);
}

RealField apply_L(const RealField& f, const Lsymbol& sym) {
  require_grid(f, sym);
  return apply_symbol(f, sym.symbol());
}

RealField apply_M(const RealField& f, const Lsymbol& sym) {
  require_grid(f, sym);
  return apply_symbol(f, sym.m_grid());
}

Coercivity coercivity(const ScreeningTable& table) {
  const double ms = m_star(table.params().mu);
  Coercivity c{std::numeric_limits<double>::infinity(), 0.0, std::numeric_limits<double>::infinity()};
  for (std::size_t i = 0; i < table.p_values().size(); ++i) {
    const double p = table.p_values()[i];
    const double l = p * p / (4.0 * kPi) + table.m_values()[i];
    const double r = l / (p * p / (4.0 * kPi) + ms);
    if (r < c.ratio_min) {
      c.ratio_min = r;
      c.p_at_min = p;
    }
    c.c0_empirical = std::min(c.c0_empirical, l / (p * p + ms));
  }
  return c;
}

}  // namespace rehf::screening
