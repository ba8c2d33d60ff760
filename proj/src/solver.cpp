#include "rehf/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rehf/errors.hpp"

namespace rehf::solver {

void SolveConfig::validate() const {
  std::ostringstream msg;
  if (!(tol_delta > 0.0)) msg << "tol_delta must be positive; ";
  if (!(tol_residual > 0.0)) msg << "tol_residual must be positive; ";
  if (max_iter < 1) msg << "max_iter must be at least 1; ";
  if (!(mixing > 0.0 && mixing <= 1.0)) msg << "mixing must lie in (0, 1]; ";
  const auto text = msg.str();
  if (!text.empty()) throw Error(ErrorCategory::Config, text.substr(0, text.size() - 2));
}

double SolveReport::tail_ratio_max() const {
  const std::size_t start = ratios.size() > 5 ? ratios.size() - 5 : 0;
  double m = 0.0;
  for (std::size_t i = start; i < ratios.size(); ++i) m = std::max(m, ratios[i]);
  return m;
}

nlohmann::ordered_json SolveReport::to_json() const {
  nlohmann::ordered_json j;
  j["iterations"] = iterations;
  j["step_norms"] = step_norms;
  j["ratios"] = ratios;
  j["residual"] = residual;
  j["phi_l2"] = phi_l2;
  j["phi_h2"] = phi_h2;
  j["kappa_prime_l2"] = kappa_prime_l2;
  j["mu"] = mu;
  j["mu_h"] = mu_h;
  j["neutrality"] = neutrality;
  j["converged"] = converged;
  j["phi_l2_max_cell"] = phi_l2_max_cell;
  j["kappa_prime_l2_max_cell"] = kappa_prime_l2_max_cell;
  j["gauge_residual_change"] = gauge_residual_change;
  j["c2_estimate"] = c2_estimate;
  j["tail_ratio_max"] = tail_ratio_max();
  j["outside_theory"] = outside_theory;
  j["warnings"] = warnings;
  return j;
}

namespace {

// (-Delta/4pi) phi - (kappa - rho)
RealField poisson_mismatch(const RealField& phi, const RealField& kappa, const RealField& rho) {
  const Grid& g = phi.grid;
  std::vector<double> poisson(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) poisson[i] = g.g2(i) / (4.0 * kPi);
  RealField out = apply_symbol(phi, poisson);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= kappa[i] - rho[i];
  return out;
}

}  // namespace

RealField residual_field(const RealField& phi, const RealField& kappa,
                         const density::DensityEvaluator& ev, double chem_pot) {
  return poisson_mismatch(phi, kappa, ev.rho(phi, chem_pot));
}

double physical_residual(const RealField& phi, const RealField& kappa,
                         const density::DensityEvaluator& ev, double chem_pot) {
  return norm_L2_cell(residual_field(phi, kappa, ev, chem_pot));
}

RealField linear_response(const disorder::DisorderRealization& r, const screening::Lsymbol& sym) {
  return screening::apply_L_inverse(r.kappa_prime, sym);
}

namespace {

std::string history(const std::vector<double>& v) {
  std::ostringstream os;
  os.precision(3);
  for (std::size_t i = 0; i < v.size(); ++i) os << (i ? " " : "") << v[i];
  return os.str();
}

}  // namespace

SolveResult solve(const disorder::DisorderRealization& r, const density::DensityEvaluator& ev,
                  const screening::Lsymbol& sym, const SolveConfig& cfg, const RealField& phi0) {
  cfg.validate();
  const Grid& g = ev.grid();
  if (!(r.grid == g) || !(phi0.grid == g) || !(sym.grid() == g)) {
    throw Error(ErrorCategory::Internal, "realization, symbol and initial field must share the grid");
  }
  if (std::abs(r.spec.kappa0() - ev.params().kappa0) > 1e-12 * ev.params().kappa0) {
    throw Error(ErrorCategory::SpecValidation, "disorder mean differs from the evaluator's kappa0");
  }

  SolveReport rep;
  rep.mu = ev.params().mu;
  rep.mu_h = ev.mu_h();
  const auto kp = disorder::norm_kappa_prime(r);
  rep.kappa_prime_l2 = kp.supercell;
  rep.kappa_prime_l2_max_cell = kp.max_per_unit_cell;
  if (cfg.mixing < 1.0) {
    rep.outside_theory = true;
    rep.warnings.emplace_back("mixing below 1: iteration is damped beyond the contraction regime");
  }
  if (!g.cutoff_ok(ev.params().beta, ev.mu_h())) {
    rep.warnings.emplace_back("grid cutoff beta(|G_max|^2 - mu_h) <= 30");
  }

  RealField phi = phi0;
  RealField rho = ev.rho(phi);
  double min_step = std::numeric_limits<double>::infinity();
  for (int k = 1; k <= cfg.max_iter; ++k) {
    RealField n_phi(g);
    const bool zero = std::all_of(phi.values.begin(), phi.values.end(), [](double v) { return v == 0.0; });
    if (!zero) {
      const auto mphi = screening::apply_M(phi, sym);
      for (std::size_t i = 0; i < n_phi.size(); ++i) n_phi[i] = -(rho[i] - ev.params().kappa0 - mphi[i]);
    }
    RealField next = screening::apply_L_inverse(r.kappa_prime + n_phi, sym);
    if (cfg.mixing < 1.0) next = (1.0 - cfg.mixing) * phi + cfg.mixing * next;
    const double step = norm_H2_cell(next - phi);
    if (!rep.step_norms.empty() && rep.step_norms.back() > 0.0) {
      rep.ratios.push_back(step / rep.step_norms.back());
    }
    rep.step_norms.push_back(step);
    rep.iterations = k;
    if (!std::isfinite(step) || step > 10.0 * min_step) {
      throw Error(ErrorCategory::Convergence,
                  "fixed-point iteration diverged at step " + std::to_string(k) +
                      "; step norms: " + history(rep.step_norms));
    }
    min_step = std::min(min_step, step);
    phi = std::move(next);
    rho = ev.rho(phi);
    rep.residual = norm_L2_cell(poisson_mismatch(phi, r.kappa, rho));
    if (step <= cfg.tol_delta && rep.residual <= cfg.tol_residual) {
      rep.converged = true;
      break;
    }
  }
  if (!rep.converged) {
    throw Error(ErrorCategory::Convergence,
                "no convergence in " + std::to_string(cfg.max_iter) +
                    " iterations; contraction ratios: " + history(rep.ratios));
  }
  if (rep.tail_ratio_max() >= 1.0) {
    rep.warnings.emplace_back("a contraction ratio in the last five steps is not below 1");
  }

  RealField charge = r.kappa - rho;
  rep.neutrality = mean(charge);
  const auto pn = norm_L2_report(phi);
  rep.phi_l2 = pn.supercell;
  rep.phi_l2_max_cell = pn.max_per_unit_cell;
  rep.phi_h2 = norm_H2_cell(phi);
  rep.c2_estimate = rep.kappa_prime_l2 > 0.0 ? rep.phi_h2 / rep.kappa_prime_l2 : 0.0;
  if (cfg.gauge_check) {
    const RealField base = residual_field(phi, r.kappa, ev, ev.mu_h());
    for (double t : {0.01, -0.01}) {
      RealField shifted = phi;
      for (auto& v : shifted.values) v += t;
      const RealField moved = residual_field(shifted, r.kappa, ev, ev.mu_h() - t);
      rep.gauge_residual_change = std::max(rep.gauge_residual_change, max_abs(moved - base));
    }
  }
  return {std::move(phi), std::move(rep)};
}

UniquenessVerdict solve_multi_init(const disorder::DisorderRealization& r,
                                   const density::DensityEvaluator& ev,
                                   const screening::Lsymbol& sym, const SolveConfig& cfg,
                                   const std::vector<RealField>& inits, double ball) {
  UniquenessVerdict v;
  for (std::size_t i = 0; i < inits.size(); ++i) {
    const double h2 = norm_H2_cell(inits[i]);
    if (h2 > ball) {
      std::ostringstream msg;
      msg << "initial field " << i << " has H2 norm " << h2 << " outside the ball of radius " << ball;
      throw Error(ErrorCategory::SpecValidation, msg.str());
    }
  }
  for (std::size_t i = 0; i < inits.size(); ++i) {
    try {
      auto res = solve(r, ev, sym, cfg, inits[i]);
      v.solutions.push_back(std::move(res.phi));
      v.reports.push_back(std::move(res.report));
    } catch (const Error& e) {
      throw Error(e.category(), "initialization " + std::to_string(i) + ": " + e.what());
    }
  }
  for (std::size_t i = 0; i < v.solutions.size(); ++i) {
    for (std::size_t j = i + 1; j < v.solutions.size(); ++j) {
      v.max_pairwise_h2 = std::max(v.max_pairwise_h2, norm_H2_cell(v.solutions[i] - v.solutions[j]));
    }
  }
  return v;
}

}  // namespace rehf::solver
