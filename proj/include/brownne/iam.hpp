#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "brownne/kernels.hpp"
#include "brownne/random.hpp"
#include "brownne/stochopt.hpp"

namespace brownne {

/// Disc radius in unit-square coordinates. The centre travels the diagonal
/// from (r, r) at theta = 0 to (1 - r, 1 - r) at theta = 1.
inline constexpr double disc_radius = 0.15;

/// Supersampled rasterisation of the disc at articulation theta on a P x P
/// grid. Each pixel holds the fraction of its s x s subsample points inside
/// the disc. Row-major, row 0 at the top.
struct DiscImage {
  int resolution = 0;
  int supersample = 1;
  double theta = 0.0;
  bool clamped = false;  ///< theta was outside [0, 1] and got clamped
  std::vector<double> pixels;
  /// Bounding rectangle of the nonzero pixels, [row0, row1) x [col0, col1).
  int row0 = 0, row1 = 0, col0 = 0, col1 = 0;

  double at(int row, int col) const { return pixels[static_cast<std::size_t>(row) * resolution + col]; }
  double mass() const;
  double squared_norm() const;
};

DiscImage render_disc(double theta, int resolution, int supersample = 4);

/// E(theta) = ||I_theta - target||, rendered with the target's resolution and
/// supersampling.
double objective(double theta, const DiscImage& target);

/// Writes the image as binary (P5) or ASCII (P2) PGM with 255 = full coverage.
void write_pgm(const DiscImage& image, const std::string& path, bool binary = true);

struct IamOptions {
  std::optional<double> theta0;  ///< start; uniform on [0, 1] when absent
  double tol_fraction = 0.02;    ///< converged when E < tol_fraction * plateau
  Box restart_box{{0.0}, {1.0}};
};

struct IamReport {
  double theta_hat = 0.0;
  double theta_star = 0.0;
  int iterations = 0;
  double rel_error = 0.0;  ///< |theta_hat - theta_star|
  bool converged = false;
  int restarts = 0;
  double final_objective = 0.0;
};

/// E for a pair of disjoint discs: sqrt(||I||^2 + ||g||^2) = sqrt(2) ||g||.
double plateau_value(const DiscImage& target);

/// Descent theta_{k+1} = theta_k - gamma_k D_{n,+1}E(theta_k) with the
/// derivative sampled by Monte Carlo. Iterates stay in [0, 1]; the reported
/// estimate is the best iterate seen. `cfg.max_iters` is the iteration cap.
IamReport estimate_theta(const DiscImage& target, double theta_star, const Kernel& kernel,
                         const GdConfig& cfg, RandomStream& rng, const IamOptions& options = {});

struct IamBatchRow {
  int n = 0;
  double mean_iterations = 0.0;
  double mean_rel_error = 0.0;
  double converged_fraction = 0.0;
};

struct IamBatchConfig {
  std::vector<int> n_values;
  int runs = 1;
  int resolution = 128;
  int supersample = 4;
  KernelFamily family = KernelFamily::linear_rect;
  GdConfig gd{};
  double tol_fraction = 0.02;
  std::uint64_t seed = 0;
  /// Start each run at its target (sanity mode).
  bool start_at_target = false;
  int threads = 1;
};

/// Runs `runs` randomized estimations per n. Run r for index n draws theta*
/// and theta0 from a substream keyed by (n, r), so rows are independent of
/// the worker count.
std::vector<IamBatchRow> batch_experiment(const IamBatchConfig& cfg);

}  // namespace brownne
