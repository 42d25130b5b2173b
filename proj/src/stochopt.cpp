#include "brownne/stochopt.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "brownne/error.hpp"

namespace brownne {

std::vector<double> Box::sample(RandomStream& rng) const {
  std::vector<double> x(lower.size());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = rng.uniform(lower[i], upper[i]);
  return x;
}

void GdConfig::validate() const {
  if (!(step0 > 0.0)) throw ContractError("step0 must be positive");
  if (decay < 0.0) throw ContractError("decay must be nonnegative");
  if (max_iters < 1) throw ContractError("max_iters must be >= 1");
  if (noise_sigma < 0.0) throw ContractError("noise_sigma must be nonnegative");
  if (restart.patience < 0) throw ContractError("restart patience must be >= 1");
  if (grad_method == NddMethod::monte_carlo && mc_samples < 2) {
    throw ContractError("monte carlo gradients need mc_samples >= 2");
  }
}

namespace {

[[noreturn]] void non_finite(int iteration, std::span<const double> x, double value) {
  std::ostringstream msg;
  msg << "objective became " << value << " at iteration " << iteration << ", last iterate (";
  for (std::size_t i = 0; i < x.size(); ++i) msg << (i ? ", " : "") << x[i];
  msg << ")";
  throw EvaluationError(msg.str());
}

}  // namespace

DescentReport biased_gd(const ScalarField& u, std::span<const double> x0, const MultiIndex& idx,
                        KernelFamily family, const GdConfig& cfg, RandomStream& rng,
                        const std::optional<Box>& restart_box) {
  cfg.validate();
  if (x0.size() != u.dim) throw ContractError("start point does not match field dimension");
  if (cfg.restart.enabled()) {
    if (!restart_box || restart_box->lower.size() != u.dim || restart_box->upper.size() != u.dim) {
      throw ContractError("restart policy needs a box matching the field dimension");
    }
  }

  const GradientOptions options{cfg.grad_method, cfg.mc_samples, {}};
  std::vector<double> x(x0.begin(), x0.end());
  double value = u(x);
  if (!std::isfinite(value)) non_finite(0, x, value);

  DescentReport report;
  report.value_trace.reserve(static_cast<std::size_t>(cfg.max_iters) + 1);
  report.value_trace.push_back(value);

  double best_since_restart = value;
  int stalled = 0;
  for (int k = 0; k < cfg.max_iters; ++k) {
    auto grad = nonlocal_gradient(u, x, idx, family, options, rng);
    const double gamma = cfg.step(k);
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double noise = cfg.noise_sigma > 0.0 ? cfg.noise_sigma * rng.normal() : 0.0;
      x[i] -= gamma * (grad[i] + noise);
    }
    value = u(x);
    if (!std::isfinite(value)) non_finite(k + 1, x, value);

    if (cfg.restart.enabled()) {
      if (value < best_since_restart) {
        best_since_restart = value;
        stalled = 0;
      } else if (++stalled >= cfg.restart.patience) {
        x = restart_box->sample(rng);
        value = u(x);
        if (!std::isfinite(value)) non_finite(k + 1, x, value);
        best_since_restart = value;
        stalled = 0;
        ++report.restarts;
      }
    }
    report.value_trace.push_back(value);
  }
  report.iterates_count = cfg.max_iters;
  report.final_point = std::move(x);
  report.final_value = value;
  return report;
}

double epsilon_subgradient_margin(const ScalarField& u, std::span<const double> x,
                                  std::span<const double> g,
                                  const std::vector<std::vector<double>>& probes, double epsilon) {
  if (probes.empty()) throw ContractError("probe set must be nonempty");
  if (x.size() != u.dim || g.size() != u.dim) throw ContractError("dimension mismatch in margin");
  const double ux = u(x);
  double margin = std::numeric_limits<double>::infinity();
  for (const auto& y : probes) {
    if (y.size() != u.dim) throw ContractError("probe dimension mismatch");
    double linear = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) linear += g[i] * (y[i] - x[i]);
    margin = std::min(margin, u(y) - ux - linear + epsilon);
  }
  return margin;
}

NddEstimate random_direction_expectation(const ScalarField& u, std::span<const double> x,
                                         const DirectionSampler& sampler, const Kernel& kernel,
                                         std::size_t m_dirs, std::size_t m_t, RandomStream& rng) {
  if (m_dirs < 2 || m_t < 1) throw ContractError("need m_dirs >= 2 and m_t >= 1");
  if (x.size() != u.dim) throw ContractError("point does not match field dimension");
  const double ux = u(x);
  std::vector<double> scratch;
  double mean = 0.0;
  double m2 = 0.0;
  for (std::size_t d = 0; d < m_dirs; ++d) {
    const auto v = sampler(rng);
    if (v.size() != u.dim) throw ContractError("direction sampler returned wrong dimension");
    double inner = 0.0;
    for (std::size_t j = 0; j < m_t; ++j) {
      inner += difference_quotient(u, x, v, kernel.sample(rng), ux, scratch);
    }
    inner /= static_cast<double>(m_t);
    const double delta = inner - mean;
    mean += delta / static_cast<double>(d + 1);
    m2 += delta * (inner - mean);
  }
  const double var = m2 / static_cast<double>(m_dirs - 1);
  return {mean, NddMethod::monte_carlo, m_dirs * m_t,
          std::sqrt(var / static_cast<double>(m_dirs))};
}

}  // namespace brownne
