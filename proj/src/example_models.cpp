#include "ctsg/example_models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ctsg/errors.hpp"

namespace ctsg {

double PiecewiseLinear::operator()(double x) const {
  if (knots_x.empty()) return 1.0;
  if (x <= knots_x.front()) return knots_y.front();
  if (x >= knots_x.back()) return knots_y.back();
  const auto it = std::upper_bound(knots_x.begin(), knots_x.end(), x);
  const std::size_t k = static_cast<std::size_t>(it - knots_x.begin());
  const double w = (x - knots_x[k - 1]) / (knots_x[k] - knots_x[k - 1]);
  return knots_y[k - 1] + w * (knots_y[k] - knots_y[k - 1]);
}

void PiecewiseLinear::validate() const {
  if (knots_x.size() != knots_y.size()) throw PreconditionError("profile knots_x and knots_y differ in length");
  for (std::size_t k = 1; k < knots_x.size(); ++k)
    if (!(knots_x[k] > knots_x[k - 1])) throw PreconditionError("profile knots must be strictly increasing");
}

std::vector<double> uniform_grid(double lo, double hi, std::size_t n) {
  if (n < 2 || !(hi > lo)) throw PreconditionError("grid needs n >= 2 nodes and hi > lo");
  std::vector<double> g(n);
  for (std::size_t j = 0; j < n; ++j) g[j] = lo + (hi - lo) * static_cast<double>(j) / static_cast<double>(n - 1);
  g.back() = hi;
  return g;
}

std::vector<double> cell_widths(const std::vector<double>& grid) {
  const std::size_t n = grid.size();
  if (n < 2) throw PreconditionError("cell widths need at least two nodes");
  std::vector<double> w(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double left = j > 0 ? grid[j] - grid[j - 1] : grid[1] - grid[0];
    const double right = j + 1 < n ? grid[j + 1] - grid[j] : grid[n - 1] - grid[n - 2];
    w[j] = 0.5 * (left + right);
  }
  return w;
}

std::vector<double> discretize_density(const std::function<double(double)>& density,
                                       const std::vector<double>& grid, std::size_t self,
                                       double lambda) {
  if (self >= grid.size()) throw DimensionError("self index outside the grid");
  if (!(lambda >= 0.0)) throw PreconditionError("jump rate must be nonnegative");
  const std::vector<double> widths = cell_widths(grid);
  std::vector<double> mass(grid.size());
  double total = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    const double d = density(grid[j]);
    if (!(d >= 0.0) || !std::isfinite(d)) throw PreconditionError("density must be finite and nonnegative");
    mass[j] = d * widths[j];
    total += mass[j];
  }
  if (!(total > 0.0)) throw PreconditionError("density vanishes on the whole grid");
  std::vector<double> row(grid.size(), 0.0);
  double off = 0.0;
  for (std::size_t j = 0; j < grid.size(); ++j) {
    if (j == self) continue;
    row[j] = lambda * (mass[j] / total);
    off += row[j];
  }
  // Diagonal from the off-diagonal sum so the row is conservative to the last bit.
  row[self] = -off;
  return row;
}

namespace {

void require_unit_table(const Matrix& t, double lo, const char* what) {
  for (double v : t.data())
    if (!(v >= lo && v <= 1.0)) {
      std::ostringstream os;
      os << what << " entries must lie in [" << lo << ", 1]";
      throw PreconditionError(os.str());
    }
}

void require_profile(const PiecewiseLinear& p) {
  p.validate();
  for (double y : p.knots_y)
    if (!(y >= 0.0 && y <= 1.0)) throw PreconditionError("rate profile values must lie in [0, 1]");
}

void require_common(double theta, double horizon, std::size_t n_x) {
  if (!(theta > 0.0)) throw PreconditionError("theta must be positive");
  if (!(horizon > 0.0)) throw PreconditionError("horizon must be positive");
  if (n_x < 2) throw PreconditionError("grid needs at least two nodes");
}

}  // namespace

BuildResult build_rps(const RpsParams& p) {
  if (!(p.alpha > 0.0 && p.alpha <= 0.5)) throw PreconditionError("alpha must lie in (0, 0.5]");
  if (!(p.rate_bound > 0.0)) throw PreconditionError("rate bound L must be positive");
  if (!(p.x_max > 0.0)) throw PreconditionError("x_max must be positive");
  if (p.rate_table.rows() != 3 || p.rate_table.cols() != 3) throw DimensionError("rate table must be 3 x 3");
  require_unit_table(p.rate_table, 0.0, "rate table");
  require_profile(p.rate_profile);
  require_common(p.theta, p.horizon, p.n_x);

  const std::vector<double> grid = uniform_grid(0.0, p.x_max, p.n_x);
  const std::size_t n = grid.size();
  // win[a][b] = +1 when a beats b: scissors > paper > stone > scissors.
  const int win[3][3] = {{0, 1, -1}, {-1, 0, 1}, {1, -1, 0}};

  std::vector<Matrix> payoff, generator;
  std::vector<double> terminal;
  for (std::size_t x = 0; x < n; ++x) {
    const double s = std::sqrt(std::log1p(grid[x]));
    Matrix r(3, 3);
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) r(a, b) = p.alpha * s * win[a][b];
    payoff.push_back(r);
    terminal.push_back(0.5 * s);

    Matrix q(9, n);
    if (grid[x] > 0.0) {
      const double mean = grid[x];
      const auto density = [mean](double y) { return y < 0.0 ? 0.0 : std::exp(-y / mean) / mean; };
      const double profile = p.rate_profile(grid[x]);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b) {
          const double lambda = p.rate_bound * p.rate_table(a, b) * profile;
          const auto row = discretize_density(density, grid, x, lambda);
          std::copy(row.begin(), row.end(), q.row(a * 3 + b).begin());
        }
    }
    generator.push_back(q);
  }

  BuildResult out;
  out.model = make_uniform_action_model(3, 3, payoff, generator, terminal, p.theta, p.horizon, grid);
  LyapunovCertificate& c = out.certificate;
  for (double x : grid) {
    c.v0.push_back(1.0 + x);
    c.v1.push_back((1.0 + x) * (1.0 + x));
  }
  c.rho0 = 1.0;
  c.l0 = p.rate_bound;
  c.m0 = 1.0;
  c.rho1 = 23.0 * p.rate_bound;
  c.b1 = 1.0;
  c.m1 = 1.0;
  return out;
}

BuildResult build_gaussian(const GaussianParams& p) {
  if (!(p.rate_scale > 0.0)) throw PreconditionError("rate scale M must be positive");
  if (!(p.sigma > 0.0)) throw PreconditionError("sigma must be positive");
  if (!(p.m0 > 0.0)) throw PreconditionError("M0 must be positive");
  if (!(std::abs(p.terminal_scale) <= 1.0)) throw PreconditionError("terminal scale must lie in [-1, 1]");
  if (!(p.x_max > p.x_min)) throw PreconditionError("x_max must exceed x_min");
  if (p.rate_table.rows() != p.payoff_table.rows() || p.rate_table.cols() != p.payoff_table.cols() ||
      p.rate_table.empty())
    throw DimensionError("rate and payoff tables must share a nonempty shape");
  require_unit_table(p.rate_table, 0.0, "rate table");
  require_unit_table(p.payoff_table, -1.0, "payoff table");
  require_profile(p.rate_profile);
  require_common(p.theta, p.horizon, p.n_x);

  const std::vector<double> grid = uniform_grid(p.x_min, p.x_max, p.n_x);
  const std::vector<double> widths = cell_widths(grid);
  const std::size_t n = grid.size();
  const std::size_t na = p.rate_table.rows(), nb = p.rate_table.cols();
  const double sigma = p.sigma;

  BuildResult out;
  double worst_mass = 1.0;
  std::size_t worst_x = 0;
  std::vector<Matrix> payoff, generator;
  std::vector<double> terminal;
  for (std::size_t x = 0; x < n; ++x) {
    const double xv = grid[x];
    const double scale = p.m0 + std::numbers::sqrt2 / 2.0 * std::sqrt(std::log1p(xv * xv));
    Matrix r(na, nb);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) r(a, b) = p.payoff_table(a, b) * scale;
    payoff.push_back(r);
    terminal.push_back(p.terminal_scale * scale);

    const auto density = [xv, sigma](double y) {
      const double z = (y - xv) / sigma;
      return std::exp(-0.5 * z * z) / (sigma * std::sqrt(2.0 * std::numbers::pi));
    };
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) mass += density(grid[j]) * widths[j];
    if (mass < worst_mass) {
      worst_mass = mass;
      worst_x = x;
    }

    const double envelope = p.rate_scale * (1.0 + xv * xv) * p.rate_profile(xv);
    Matrix q(na * nb, n);
    for (std::size_t a = 0; a < na; ++a)
      for (std::size_t b = 0; b < nb; ++b) {
        const auto row = discretize_density(density, grid, x, envelope * p.rate_table(a, b));
        std::copy(row.begin(), row.end(), q.row(a * nb + b).begin());
      }
    generator.push_back(q);
  }
  if (worst_mass < 0.999) {
    std::ostringstream os;
    os << "Gaussian mass inside the grid is " << worst_mass << " at x = " << grid[worst_x]
       << " (below 0.999); drift checks will degrade near the grid edges";
    out.warnings.push_back(os.str());
  }

  out.model = make_uniform_action_model(na, nb, payoff, generator, terminal, p.theta, p.horizon, grid);
  LyapunovCertificate& c = out.certificate;
  for (double x : grid) {
    c.v0.push_back(1.0 + x * x);
    c.v1.push_back(1.0 + x * x * x * x);
  }
  const double s2 = sigma * sigma;
  c.rho0 = p.rate_scale * s2;
  c.l0 = p.rate_scale;
  c.m0 = p.m0;
  c.rho1 = 3780.0 * p.rate_scale * (s2 * s2 * s2 * s2 + s2 * s2 * s2 + s2 * s2 + s2);
  c.b1 = 1.0;
  c.m1 = 2.0;
  return out;
}

}  // namespace ctsg
