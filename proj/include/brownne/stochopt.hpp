#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "brownne/kernels.hpp"
#include "brownne/ndd.hpp"
#include "brownne/random.hpp"

namespace brownne {

/// Re-initialise the iterate when the objective has not decreased for
/// `patience` consecutive steps. `patience == 0` disables restarts.
struct RestartPolicy {
  int patience = 0;

  static RestartPolicy none() { return {}; }
  static RestartPolicy on_non_descent(int patience) { return {patience}; }
  bool enabled() const noexcept { return patience > 0; }
};

/// Axis-aligned box used for restart draws.
struct Box {
  std::vector<double> lower;
  std::vector<double> upper;

  std::vector<double> sample(RandomStream& rng) const;
};

struct GdConfig {
  double step0 = 0.1;
  double decay = 0.0;  ///< gamma_k = step0 / (1 + decay k)
  int max_iters = 500;
  NddMethod grad_method = NddMethod::quadrature;
  std::size_t mc_samples = 100;
  double noise_sigma = 0.0;
  RestartPolicy restart{};

  double step(int k) const noexcept { return step0 / (1.0 + decay * k); }
  void validate() const;
};

struct DescentReport {
  int iterates_count = 0;
  std::vector<double> final_point;
  double final_value = 0.0;
  std::vector<double> value_trace;  ///< length iterates_count + 1
  int restarts = 0;
};

/// x_{k+1} = x_k - gamma_k (grad_n u(x_k) + sigma xi_k), xi_k standard normal.
/// `restart_box` is required when the config enables restarts.
DescentReport biased_gd(const ScalarField& u, std::span<const double> x0, const MultiIndex& idx,
                        KernelFamily family, const GdConfig& cfg, RandomStream& rng,
                        const std::optional<Box>& restart_box = std::nullopt);

/// min over probes y of u(y) - u(x) - g.(y - x) + epsilon. A nonnegative result
/// certifies g as an epsilon-subgradient at x over the probe set.
double epsilon_subgradient_margin(const ScalarField& u, std::span<const double> x,
                                  std::span<const double> g,
                                  const std::vector<std::vector<double>>& probes, double epsilon);

using DirectionSampler = std::function<std::vector<double>(RandomStream&)>;

/// Nested Monte Carlo estimate of E_v[D_{n,v}u(x)]: m_dirs directions, each
/// with m_t kernel draws. The standard error is computed from the per-direction
/// means, which are independent.
NddEstimate random_direction_expectation(const ScalarField& u, std::span<const double> x,
                                         const DirectionSampler& sampler, const Kernel& kernel,
                                         std::size_t m_dirs, std::size_t m_t, RandomStream& rng);

}  // namespace brownne
