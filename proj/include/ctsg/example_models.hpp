#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ctsg/game_model.hpp"
#include "ctsg/matrix.hpp"

namespace ctsg {

/// Piecewise-linear function through (knots_x, knots_y), constant beyond
/// the end knots. With no knots it is identically 1.
struct PiecewiseLinear {
  std::vector<double> knots_x;
  std::vector<double> knots_y;

  double operator()(double x) const;
  /// Throws PreconditionError on length mismatch or unsorted knots.
  void validate() const;
};

/// n nodes evenly spaced on [lo, hi], ends included.
std::vector<double> uniform_grid(double lo, double hi, std::size_t n);

/// Width of the cell around each node: half the gap to each neighbour, with
/// the end cells mirrored so a uniform grid gives every node the full spacing.
std::vector<double> cell_widths(const std::vector<double>& grid);

/// Generator row of "jump at rate lambda to y ~ density": cell masses
/// density(y_j) * width_j normalized to 1 (the cell of `self` included),
/// off-diagonals lambda * mass_j, diagonal -lambda (1 - mass_self).
/// Throws PreconditionError if the density vanishes on the whole grid.
std::vector<double> discretize_density(const std::function<double(double)>& density,
                                       const std::vector<double>& grid, std::size_t self,
                                       double lambda);

struct BuildResult {
  GameModel model;
  LyapunovCertificate certificate;
  std::vector<std::string> warnings;
};

/// Scissors-paper-stone on a grid of [0, x_max]; action 0 = scissors,
/// 1 = paper, 2 = stone.
struct RpsParams {
  double alpha = 0.5;
  /// L: upper bound of the sojourn rate.
  double rate_bound = 1.0;
  /// lambda(x,a,b) = rate_bound * rate_table(a,b) * rate_profile(x), entries in [0, 1].
  Matrix rate_table = Matrix(3, 3, 1.0);
  PiecewiseLinear rate_profile;
  double x_max = 8.0;
  std::size_t n_x = 64;
  double theta = 1.0;
  double horizon = 1.0;
};

/// Payoff +-alpha sqrt(ln(1+x)) by the cyclic win pattern, terminal
/// sqrt(ln(1+x))/2, jumps to Exp(mean x) (none at x = 0). Certificate:
/// V0 = 1+x, V1 = (1+x)^2, rho0 = 1, L0 = L, M0 = 1, rho1 = 23L, b1 = 1, M1 = 1.
BuildResult build_rps(const RpsParams& params);

/// Gaussian jumps N(x, sigma^2) on a grid of [x_min, x_max].
struct GaussianParams {
  /// M: lambda(x,a,b) <= M (1 + x^2).
  double rate_scale = 1.0;
  double sigma = 0.5;
  /// lambda(x,a,b) = M (1 + x^2) rate_table(a,b) rate_profile(x), entries in [0, 1].
  Matrix rate_table = Matrix{{1.0, 0.5}, {0.25, 1.0}};
  PiecewiseLinear rate_profile;
  /// r(x,a,b) = payoff_table(a,b) (M0 + (sqrt2/2) sqrt(ln(1+x^2))), entries in [-1, 1].
  Matrix payoff_table = Matrix{{1.0, -1.0}, {-0.5, 0.5}};
  double m0 = 1.0;
  /// g(x) = terminal_scale (M0 + (sqrt2/2) sqrt(ln(1+x^2))), |terminal_scale| <= 1.
  double terminal_scale = 0.5;
  double x_min = -4.0;
  double x_max = 4.0;
  std::size_t n_x = 128;
  double theta = 1.0;
  double horizon = 1.0;
};

/// Certificate: V0 = 1+x^2, V1 = 1+x^4, rho0 = M sigma^2, L0 = M, M0 = m0,
/// rho1 = 3780 M (sigma^8+sigma^6+sigma^4+sigma^2), b1 = 1, M1 = 2. Warns when
/// the Gaussian mass inside the grid is below 0.999 for some node.
BuildResult build_gaussian(const GaussianParams& params);

}  // namespace ctsg
