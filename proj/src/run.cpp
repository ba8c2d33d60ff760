#include "rehf/run.hpp"

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "rehf/errors.hpp"
#include "rehf/jellium.hpp"

namespace rehf::run {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCategory::Config, "value '" + v + "' for " + key + " is not a number");
  }
  return out;
}

int to_int(const std::string& key, const std::string& v) {
  int out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    throw Error(ErrorCategory::Config, "value '" + v + "' for " + key + " is not an integer");
  }
  return out;
}

}  // namespace

disorder::DisorderSpec RunConfig::spec(std::uint64_t seed) const {
  disorder::DisorderSpec s;
  s.a = lattice_a;
  s.qbar = kappa0_qbar;
  s.width = disorder_width;
  s.seed = seed;
  return s;
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::set<std::string> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw Error(ErrorCategory::Config, "line " + std::to_string(lineno) + ": expected key=value");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (!seen.insert(key).second) {
      throw Error(ErrorCategory::Config, "line " + std::to_string(lineno) + ": duplicate key " + key);
    }
    if (key == "beta") cfg.beta = to_double(key, val);
    else if (key == "kappa0_qbar") cfg.kappa0_qbar = to_double(key, val);
    else if (key == "disorder_width") cfg.disorder_width = to_double(key, val);
    else if (key == "lattice_a") cfg.lattice_a = to_double(key, val);
    else if (key == "n_cells") cfg.n_cells = to_int(key, val);
    else if (key == "n_pts") cfg.n_pts = to_int(key, val);
    else if (key == "tol_residual") cfg.solve.tol_residual = to_double(key, val);
    else if (key == "tol_delta") cfg.solve.tol_delta = to_double(key, val);
    else if (key == "max_iter") cfg.solve.max_iter = to_int(key, val);
    else if (key == "mixing") cfg.solve.mixing = to_double(key, val);
    else throw Error(ErrorCategory::Config, "line " + std::to_string(lineno) + ": unknown key " + key);
  }
  if (!(cfg.beta > 0.0)) throw Error(ErrorCategory::Config, "beta must be positive");
  if (!(cfg.lattice_a > 0.0)) throw Error(ErrorCategory::Config, "lattice_a must be positive");
  if (cfg.n_cells < 1 || cfg.n_pts < 1) throw Error(ErrorCategory::Config, "n_cells and n_pts must be positive");
  cfg.solve.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCategory::Config, "cannot open config file " + path);
  return parse_config(in);
}

std::string format_config(const RunConfig& c) {
  std::ostringstream os;
  os.precision(17);
  os << "beta = " << c.beta << "\nkappa0_qbar = " << c.kappa0_qbar
     << "\ndisorder_width = " << c.disorder_width << "\nlattice_a = " << c.lattice_a
     << "\nn_cells = " << c.n_cells << "\nn_pts = " << c.n_pts
     << "\ntol_residual = " << c.solve.tol_residual << "\ntol_delta = " << c.solve.tol_delta
     << "\nmax_iter = " << c.solve.max_iter << "\nmixing = " << c.solve.mixing << '\n';
  return os.str();
}

namespace {

PhysParams params_for(const RunConfig& cfg) {
  cfg.spec(0).validate();
  const double k0 = cfg.spec(0).kappa0();
  return {cfg.beta, jellium::solve_mu(k0, cfg.beta), k0};
}

}  // namespace

Model::Model(const RunConfig& cfg)
    : cfg_(cfg),
      grid_(cfg.grid()),
      params_(params_for(cfg)),
      ev_(params_, grid_),
      sym_(screening::build_L_symbol(grid_, params_)) {}

Model::Outcome Model::solve_seed(std::uint64_t seed) const {
  auto real = disorder::sample(cfg_.spec(seed), grid_);
  auto res = solver::solve(real, ev_, sym_, cfg_.solve, RealField(grid_));
  return {std::move(real), std::move(res)};
}

}  // namespace rehf::run
