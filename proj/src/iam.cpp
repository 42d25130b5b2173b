#include "brownne/iam.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "brownne/error.hpp"
#include "brownne/ndd.hpp"
#include "brownne/parallel.hpp"

namespace brownne {

namespace {

double disc_center(double theta) { return disc_radius + theta * (1.0 - 2.0 * disc_radius); }

double clamp_unit(double theta) { return std::clamp(theta, 0.0, 1.0); }

// Coverage of the pixels around one disc; everything outside the window is 0.
struct Window {
  int row0 = 0, row1 = 0, col0 = 0, col1 = 0;
  std::vector<double> coverage;

  double at(int row, int col) const {
    return coverage[static_cast<std::size_t>(row - row0) * (col1 - col0) + (col - col0)];
  }
};

Window rasterize(double theta, int resolution, int supersample) {
  const double c = disc_center(theta);
  const double r2 = disc_radius * disc_radius;
  const double denom = static_cast<double>(resolution) * supersample;
  auto coord = [&](int sub) { return (sub + 0.5) / denom; };
  auto sq = [](double d) { return d * d; };

  Window w;
  w.row0 = std::max(0, static_cast<int>(std::floor((c - disc_radius) * resolution)));
  w.row1 = std::min(resolution, static_cast<int>(std::floor((c + disc_radius) * resolution)) + 1);
  w.col0 = w.row0;
  w.col1 = w.row1;
  const int span = w.row1 - w.row0;
  w.coverage.assign(static_cast<std::size_t>(span) * span, 0.0);
  const double cells = static_cast<double>(supersample) * supersample;

  for (int i = w.row0; i < w.row1; ++i) {
    const double y_lo = coord(i * supersample);
    const double y_hi = coord(i * supersample + supersample - 1);
    const double y_near = std::clamp(c, y_lo, y_hi);
    const double y_far = std::abs(y_lo - c) > std::abs(y_hi - c) ? y_lo : y_hi;
    for (int j = w.col0; j < w.col1; ++j) {
      const double x_lo = coord(j * supersample);
      const double x_hi = coord(j * supersample + supersample - 1);
      const double x_near = std::clamp(c, x_lo, x_hi);
      const double x_far = std::abs(x_lo - c) > std::abs(x_hi - c) ? x_lo : x_hi;
      double value;
      if (sq(x_near - c) + sq(y_near - c) > r2) {
        value = 0.0;
      } else if (sq(x_far - c) + sq(y_far - c) <= r2) {
        value = 1.0;
      } else {
        int inside = 0;
        for (int b = 0; b < supersample; ++b) {
          const double dy2 = sq(coord(i * supersample + b) - c);
          for (int a = 0; a < supersample; ++a) {
            if (sq(coord(j * supersample + a) - c) + dy2 <= r2) ++inside;
          }
        }
        value = inside / cells;
      }
      w.coverage[static_cast<std::size_t>(i - w.row0) * span + (j - w.col0)] = value;
    }
  }
  return w;
}

void check_render_args(int resolution, int supersample) {
  if (resolution < 16) throw ContractError("disc resolution must be >= 16");
  if (supersample < 1) throw ContractError("supersample factor must be >= 1");
}

}  // namespace

double DiscImage::mass() const {
  double sum = 0.0;
  for (double p : pixels) sum += p;
  return sum;
}

double DiscImage::squared_norm() const {
  double sum = 0.0;
  for (double p : pixels) sum += p * p;
  return sum;
}

DiscImage render_disc(double theta, int resolution, int supersample) {
  check_render_args(resolution, supersample);
  DiscImage image;
  image.resolution = resolution;
  image.supersample = supersample;
  image.clamped = !(theta >= 0.0 && theta <= 1.0);
  image.theta = clamp_unit(theta);
  image.pixels.assign(static_cast<std::size_t>(resolution) * resolution, 0.0);
  const Window w = rasterize(image.theta, resolution, supersample);
  image.row0 = resolution;
  image.col0 = resolution;
  for (int i = w.row0; i < w.row1; ++i) {
    for (int j = w.col0; j < w.col1; ++j) {
      const double v = w.at(i, j);
      image.pixels[static_cast<std::size_t>(i) * resolution + j] = v;
      if (v != 0.0) {
        image.row0 = std::min(image.row0, i);
        image.row1 = std::max(image.row1, i + 1);
        image.col0 = std::min(image.col0, j);
        image.col1 = std::max(image.col1, j + 1);
      }
    }
  }
  if (image.row1 == 0) image.row0 = image.col0 = 0;
  return image;
}

double objective(double theta, const DiscImage& target) {
  check_render_args(target.resolution, target.supersample);
  if (target.pixels.size() != static_cast<std::size_t>(target.resolution) * target.resolution) {
    throw ContractError("target image has the wrong pixel count for its resolution");
  }
  const Window w = rasterize(clamp_unit(theta), target.resolution, target.supersample);
  double sum = 0.0;
  for (int i = w.row0; i < w.row1; ++i) {
    for (int j = w.col0; j < w.col1; ++j) {
      const double d = w.at(i, j) - target.at(i, j);
      sum += d * d;
    }
  }
  // Target pixels that the window does not cover.
  for (int i = target.row0; i < target.row1; ++i) {
    const bool row_in = i >= w.row0 && i < w.row1;
    for (int j = target.col0; j < target.col1; ++j) {
      if (row_in && j >= w.col0 && j < w.col1) continue;
      const double g = target.at(i, j);
      sum += g * g;
    }
  }
  return std::sqrt(sum);
}

void write_pgm(const DiscImage& image, const std::string& path, bool binary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << (binary ? "P5" : "P2") << "\n" << image.resolution << " " << image.resolution << "\n255\n";
  for (int i = 0; i < image.resolution; ++i) {
    for (int j = 0; j < image.resolution; ++j) {
      const auto level = static_cast<int>(std::lround(255.0 * image.at(i, j)));
      if (binary) {
        out.put(static_cast<char>(level));
      } else {
        out << level << (j + 1 == image.resolution ? "\n" : " ");
      }
    }
  }
  if (!out) throw IoError("failed while writing '" + path + "'");
}

double plateau_value(const DiscImage& target) { return std::sqrt(2.0 * target.squared_norm()); }

IamReport estimate_theta(const DiscImage& target, double theta_star, const Kernel& kernel,
                         const GdConfig& cfg, RandomStream& rng, const IamOptions& options) {
  cfg.validate();
  if (cfg.mc_samples < 2) throw ContractError("IAM descent needs mc_samples >= 2");
  const ScalarField energy{1, [&](std::span<const double> th) { return objective(th[0], target); }};
  const double tol = options.tol_fraction * plateau_value(target);
  const std::vector<double> direction{1.0};

  IamReport report;
  report.theta_star = theta_star;
  double theta = clamp_unit(options.theta0 ? *options.theta0 : options.restart_box.sample(rng)[0]);
  double value = objective(theta, target);
  double best_theta = theta;
  double best_value = value;
  double best_since_restart = value;
  int stalled = 0;
  int local_k = 0;

  int k = 0;
  while (best_value >= tol && k < cfg.max_iters) {
    const std::vector<double> at{theta};
    const double grad = ndd_monte_carlo(energy, at, direction, kernel, cfg.mc_samples, rng).value;
    theta = clamp_unit(theta - cfg.step(local_k) * grad);
    value = objective(theta, target);
    ++k;
    ++local_k;
    if (value < best_value) {
      best_value = value;
      best_theta = theta;
    }
    if (!cfg.restart.enabled()) continue;
    if (value < best_since_restart) {
      best_since_restart = value;
      stalled = 0;
    } else if (++stalled >= cfg.restart.patience) {
      theta = clamp_unit(options.restart_box.sample(rng)[0]);
      value = objective(theta, target);
      best_since_restart = value;
      stalled = 0;
      local_k = 0;
      ++report.restarts;
      if (value < best_value) {
        best_value = value;
        best_theta = theta;
      }
    }
  }

  report.theta_hat = best_theta;
  report.iterations = k;
  report.rel_error = std::abs(best_theta - theta_star);
  report.converged = best_value < tol;
  report.final_objective = best_value;
  return report;
}

std::vector<IamBatchRow> batch_experiment(const IamBatchConfig& cfg) {
  if (cfg.runs < 1) throw ContractError("batch needs runs >= 1");
  std::vector<int> ns = cfg.n_values;
  std::sort(ns.begin(), ns.end());
  const std::size_t total = ns.size() * static_cast<std::size_t>(cfg.runs);
  std::vector<IamReport> reports(total);

  parallel_for(total, cfg.threads, [&](std::size_t task) {
    const std::size_t row = task / cfg.runs;
    const std::size_t run = task % cfg.runs;
    const int n = ns[row];
    auto rng = RandomStream::derive(cfg.seed, "iam/" + std::to_string(n), run);
    const double theta_star = rng.uniform();
    const auto target = render_disc(theta_star, cfg.resolution, cfg.supersample);
    IamOptions options;
    options.tol_fraction = cfg.tol_fraction;
    if (cfg.start_at_target) options.theta0 = theta_star;
    reports[task] = estimate_theta(target, theta_star, Kernel(cfg.family, n), cfg.gd, rng, options);
  });

  std::vector<IamBatchRow> rows;
  for (std::size_t row = 0; row < ns.size(); ++row) {
    IamBatchRow out;
    out.n = ns[row];
    for (int run = 0; run < cfg.runs; ++run) {
      const auto& r = reports[row * cfg.runs + run];
      out.mean_iterations += r.iterations;
      out.mean_rel_error += r.rel_error;
      out.converged_fraction += r.converged ? 1.0 : 0.0;
    }
    out.mean_iterations /= cfg.runs;
    out.mean_rel_error /= cfg.runs;
    out.converged_fraction /= cfg.runs;
    rows.push_back(out);
  }
  return rows;
}

}  // namespace brownne
