#include "rehf/disorder.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include "rehf/errors.hpp"

namespace rehf::disorder {

void DisorderSpec::validate() const {
  std::ostringstream msg;
  if (!(a > 0.0) || !std::isfinite(a)) msg << "lattice constant must be positive; ";
  if (!(qbar > 0.0) || !std::isfinite(qbar)) msg << "qbar must be positive; ";
  if (!(width >= 0.0) || !std::isfinite(width)) msg << "disorder width must be non-negative; ";
  if (!(bump_radius > 0.0)) msg << "bump radius must be positive; ";
  if (bump_radius > 0.5) msg << "bump radius " << bump_radius << "a leaves the unit cell; ";
  const auto text = msg.str();
  if (!text.empty()) throw Error(ErrorCategory::SpecValidation, text.substr(0, text.size() - 2));
}

std::vector<double> bump_profile(const DisorderSpec& spec, const Grid& grid) {
  spec.validate();
  if (std::abs(grid.a() - spec.a) > 1e-12 * spec.a) {
    throw Error(ErrorCategory::SpecValidation, "grid lattice constant differs from the disorder spec");
  }
  const int n = grid.n_pts();
  const double h = grid.spacing();
  const double r = spec.bump_radius * spec.a;
  std::vector<double> chi(static_cast<std::size_t>(n) * n * n, 0.0);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        const double x = i * h - 0.5 * spec.a;
        const double y = j * h - 0.5 * spec.a;
        const double z = k * h - 0.5 * spec.a;
        const double s2 = (x * x + y * y + z * z) / (r * r);
        const double v = s2 < 1.0 ? std::exp(-1.0 / (1.0 - s2)) : 0.0;
        chi[(static_cast<std::size_t>(i) * n + j) * n + k] = v;
        total += v;
      }
    }
  }
  if (!(total > 0.0)) {
    throw Error(ErrorCategory::SpecValidation, "bump has no grid point inside its support; refine n_pts");
  }
  const double scale = 1.0 / (total * grid.point_volume());
  for (auto& v : chi) v *= scale;
  return chi;
}

double site_uniform(std::uint64_t seed, std::array<int, 3> l) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(l[0]), static_cast<std::uint32_t>(l[1]),
                    static_cast<std::uint32_t>(l[2])};
  std::mt19937_64 gen(seq);
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

DisorderRealization assemble(const DisorderSpec& spec, const Grid& grid, std::vector<double> q) {
  const auto chi = bump_profile(spec, grid);
  const int nc = grid.n_cells();
  const int np = grid.n_pts();
  if (q.size() != static_cast<std::size_t>(nc) * nc * nc) {
    throw Error(ErrorCategory::SpecValidation, "one coefficient per unit cell is required");
  }
  RealField kappa(grid);
  for (int lx = 0; lx < nc; ++lx) {
    for (int ly = 0; ly < nc; ++ly) {
      for (int lz = 0; lz < nc; ++lz) {
        const double ql = q[(static_cast<std::size_t>(lx) * nc + ly) * nc + lz];
        for (int i = 0; i < np; ++i) {
          for (int j = 0; j < np; ++j) {
            for (int k = 0; k < np; ++k) {
              kappa[grid.index(lx * np + i, ly * np + j, lz * np + k)] =
                  ql * chi[(static_cast<std::size_t>(i) * np + j) * np + k];
            }
          }
        }
      }
    }
  }
  RealField kp = kappa;
  for (auto& v : kp.values) v -= spec.kappa0();
  return {spec, grid, std::move(q), std::move(kappa), std::move(kp)};
}

DisorderRealization sample(const DisorderSpec& spec, const Grid& grid) {
  spec.validate();
  const int nc = grid.n_cells();
  std::vector<double> q;
  q.reserve(static_cast<std::size_t>(nc) * nc * nc);
  for (int lx = 0; lx < nc; ++lx) {
    for (int ly = 0; ly < nc; ++ly) {
      for (int lz = 0; lz < nc; ++lz) {
        const double u = site_uniform(spec.seed, {lx, ly, lz});
        q.push_back(spec.qbar + spec.width * (2.0 * u - 1.0));
      }
    }
  }
  return assemble(spec, grid, std::move(q));
}

DisorderRealization jellium_background(const DisorderSpec& spec, const Grid& grid) {
  spec.validate();
  const auto cells = static_cast<std::size_t>(grid.n_cells());
  return {spec, grid, std::vector<double>(cells * cells * cells, spec.qbar),
          RealField(grid, spec.kappa0()), RealField(grid)};
}

DisorderRealization shifted(const DisorderRealization& r, std::array<int, 3> l) {
  const int nc = r.grid.n_cells();
  auto wrap = [nc](int v) { return ((v % nc) + nc) % nc; };
  std::vector<double> q(r.q.size());
  for (int x = 0; x < nc; ++x) {
    for (int y = 0; y < nc; ++y) {
      for (int z = 0; z < nc; ++z) {
        const auto src = (static_cast<std::size_t>(x) * nc + y) * nc + z;
        const auto dst = (static_cast<std::size_t>(wrap(x + l[0])) * nc + wrap(y + l[1])) * nc +
                         wrap(z + l[2]);
        q[dst] = r.q[src];
      }
    }
  }
  return {r.spec, r.grid, std::move(q), shift_lattice(r.kappa, l), shift_lattice(r.kappa_prime, l)};
}

NormPair norm_kappa_prime(const DisorderRealization& r) { return norm_L2_report(r.kappa_prime); }

}  // namespace rehf::disorder
