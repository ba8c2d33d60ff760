#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <optional>
#include <regex>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "rehf/errors.hpp"
#include "rehf/jellium.hpp"
#include "rehf/run.hpp"
#include "rehf/screening.hpp"
#include "rehf/verify.hpp"

namespace fs = std::filesystem;
using namespace rehf;

namespace {

int exit_code(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::Config:
    case ErrorCategory::SpecValidation:
    case ErrorCategory::Hypothesis:
      return 2;
    default:
      return 3;
  }
}

std::ofstream open_out(const std::string& path) {
  const fs::path p(path);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCategory::Config, "cannot write " + path);
  return out;
}

int mu_solve(double beta, double kappa0) {
  const auto br = jellium::mu_bracket(kappa0, beta);
  const double mu = jellium::solve_mu(kappa0, beta);
  std::cout << std::setprecision(17) << "mu = " << mu << "\nbracket = (" << br.lower << ", "
            << br.upper << ")\nA(mu) = " << jellium::density_A(mu, beta) << '\n';
  return 0;
}

int multiplier(double beta, double mu, double p_min, double p_max, int points, const std::string& out) {
  if (!(p_min > 0.0 && p_max > p_min) || points < 2) {
    throw Error(ErrorCategory::Config, "need 0 < p-min < p-max and at least 2 points");
  }
  const PhysParams pp{beta, mu, 0.0};
  auto os = open_out(out);
  os << std::setprecision(17) << "p,m_closed_form,m_contour,rel_diff,L_symbol\n";
  for (int i = 0; i < points; ++i) {
    const double p = p_min * std::pow(p_max / p_min, static_cast<double>(i) / (points - 1));
    const double m = screening::m_of_p(p, pp);
    const double c = screening::m_contour_oracle(p, pp);
    os << p << ',' << m << ',' << c << ',' << std::abs(m - c) / m << ','
       << p * p / (4.0 * kPi) + m << '\n';
  }
  return 0;
}

void write_field(const fs::path& path, const RealField& f) {
  auto os = open_out(path.string());
  write_field_table(os, f);
}

int solve(const std::string& config, std::uint64_t seed, const std::string& out,
          const std::string& fields) {
  const auto cfg = run::load_config(config);
  const run::Model model(cfg);
  const auto o = model.solve_seed(seed);
  auto j = o.result.report.to_json();
  j["seed"] = seed;
  auto os = open_out(out);
  os << j.dump(2) << '\n';
  if (!fields.empty()) {
    fs::create_directories(fields);
    write_field(fs::path(fields) / "phi.txt", o.result.phi);
    write_field(fs::path(fields) / "kappa.txt", o.realization.kappa);
  }
  std::cout << "converged in " << o.result.report.iterations << " iterations, residual "
            << o.result.report.residual << '\n';
  return 0;
}

std::pair<std::uint64_t, std::uint64_t> seed_range(const std::string& s) {
  static const std::regex re(R"((\d+)\.\.(\d+))");
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw Error(ErrorCategory::Config, "seeds must look like S0..S1");
  const auto a = std::stoull(m[1]);
  const auto b = std::stoull(m[2]);
  if (b < a) throw Error(ErrorCategory::Config, "empty seed range");
  return {a, b};
}

unsigned worker_count() {
  if (const char* env = std::getenv("REHF_WORKERS")) {
    const int n = std::atoi(env);
    if (n < 1) throw Error(ErrorCategory::Config, "REHF_WORKERS must be a positive integer");
    return static_cast<unsigned>(n);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

int ensemble(const std::string& config, const std::string& seeds, const std::string& out) {
  const auto cfg = run::load_config(config);
  const auto [s0, s1] = seed_range(seeds);
  const run::Model model(cfg);
  fs::create_directories(out);

  struct Row {
    std::optional<solver::SolveReport> report;
    std::string error;
  };
  const std::size_t count = s1 - s0 + 1;
  std::vector<Row> rows(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      const std::uint64_t seed = s0 + i;
      try {
        auto o = model.solve_seed(seed);
        auto j = o.result.report.to_json();
        j["seed"] = seed;
        auto os = open_out((fs::path(out) / ("report_" + std::to_string(seed) + ".json")).string());
        os << j.dump(2) << '\n';
        rows[i].report = std::move(o.result.report);
      } catch (const std::exception& e) {
        rows[i].error = e.what();
      }
    }
  };
  const unsigned n = std::min<std::size_t>(worker_count(), count);
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < n; ++t) pool.emplace_back(work);
  for (auto& t : pool) t.join();

  auto csv = open_out((fs::path(out) / "ensemble.csv").string());
  csv << std::setprecision(17) << "seed,kappa_prime_l2,phi_h2,iterations,ratio_max,residual\n";
  int failures = 0;
  for (std::size_t i = 0; i < count; ++i) {
    if (!rows[i].report) {
      ++failures;
      std::cerr << "seed " << s0 + i << ": " << rows[i].error << '\n';
      continue;
    }
    const auto& r = *rows[i].report;
    const double rmax = r.ratios.empty() ? 0.0 : *std::max_element(r.ratios.begin(), r.ratios.end());
    csv << s0 + i << ',' << r.kappa_prime_l2 << ',' << r.phi_h2 << ',' << r.iterations << ','
        << rmax << ',' << r.residual << '\n';
  }
  return failures ? 3 : 0;
}

int verify_cmd(const std::string& level, const std::string& out, double m_scale) {
  verify::SuiteOptions opt;
  if (level == "fast") opt.level = verify::Level::Fast;
  else if (level == "full") opt.level = verify::Level::Full;
  else throw Error(ErrorCategory::Config, "level must be fast or full");
  opt.m_scale = m_scale;
  const auto v = verify::run_suite(opt);
  std::cout << v.to_text();
  if (!out.empty()) {
    auto os = open_out(out);
    os << v.to_json().dump(2) << '\n';
  }
  return v.all_passed() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Screened REHF solver with Anderson disorder"};
  app.require_subcommand(1);

  double beta = 1.0, kappa0 = 1.0, mu = 1.0, p_min = 0.1, p_max = 50.0, m_scale = 1.0;
  int points = 20;
  std::uint64_t seed = 0;
  std::string config, out, seeds, level = "fast", fields;

  auto* mu_cmd = app.add_subcommand("mu-solve", "chemical potential of the homogeneous background");
  mu_cmd->add_option("--beta", beta)->required();
  mu_cmd->add_option("--kappa0", kappa0)->required();

  auto* mult = app.add_subcommand("multiplier", "screening multiplier table as CSV");
  mult->add_option("--beta", beta)->required();
  mult->add_option("--mu", mu)->required();
  mult->add_option("--p-min", p_min);
  mult->add_option("--p-max", p_max);
  mult->add_option("--points", points);
  mult->add_option("--out", out)->required();

  auto* sol = app.add_subcommand("solve", "solve one disorder realization");
  sol->add_option("--config", config)->required();
  sol->add_option("--seed", seed)->required();
  sol->add_option("--out", out)->required();
  sol->add_option("--fields", fields, "directory for phi/kappa field dumps");

  auto* ens = app.add_subcommand("ensemble", "solve a range of seeds");
  ens->add_option("--config", config)->required();
  ens->add_option("--seeds", seeds, "S0..S1")->required();
  ens->add_option("--out", out)->required();

  auto* ver = app.add_subcommand("verify", "run the property suite");
  ver->add_option("--level", level);
  ver->add_option("--out", out);
  ver->add_option("--m-scale", m_scale, "scale the multiplier table (fault injection)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    if (*mu_cmd) return mu_solve(beta, kappa0);
    if (*mult) return multiplier(beta, mu, p_min, p_max, points, out);
    if (*sol) return solve(config, seed, out, fields);
    if (*ens) return ensemble(config, seeds, out);
    if (*ver) return verify_cmd(level, out, m_scale);
  } catch (const Error& e) {
    std::cerr << "error [" << to_string(e.category()) << "]: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error [internal]: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
