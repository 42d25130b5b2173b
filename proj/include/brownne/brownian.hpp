#pragma once

#include <span>
#include <vector>

#include "brownne/quadrature.hpp"
#include "brownne/random.hpp"

namespace brownne {

/// Sample path of standard Brownian motion on a uniform grid starting at 0.
/// Between grid points the path is linearly interpolated.
struct BrownianPath {
  std::vector<double> grid;
  std::vector<double> values;

  double spacing() const { return grid[1] - grid[0]; }
  double at(double x) const;
};

/// Parameters of a Brownian ReLU: kernel index n (exponential rectangles),
/// direction v and noise scale alpha.
struct BrownianSpec {
  int n = 4;
  double v = 1.0;
  double alpha = 0.01;

  BrownianSpec() = default;
  BrownianSpec(int n, double v, double alpha);

  /// |v| (1 - ln 2)
  double beta() const noexcept;
  /// Variance of D_{n,v}W: 2^{n+1} beta.
  double variance() const noexcept;
};

/// `steps` grid points on [0, x_max] with i.i.d. N(0, dx) increments.
BrownianPath simulate_path(double x_max, int steps, RandomStream& rng);

/// D_{n,v}W(x) of one sample path with the exponential-rectangle kernel.
/// Throws DomainError if x + t v leaves the grid, ResolutionError if the grid
/// spacing exceeds 2^-(n+3).
double path_ndd(const BrownianPath& path, double x, const BrownianSpec& spec,
                const QuadratureConfig& quad = {8, 1});

/// ReLU(z) + alpha sqrt(|z|) xi with xi standard normal.
double forward_activation(double z, const BrownianSpec& spec, RandomStream& rng);

/// H(z) + alpha sqrt(2^{n+1} beta) xi, H the unit step with H(0) = 0.
double backward_activation(double z, const BrownianSpec& spec, RandomStream& rng);

}  // namespace brownne
