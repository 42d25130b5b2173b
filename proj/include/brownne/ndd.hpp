#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "brownne/kernels.hpp"
#include "brownne/quadrature.hpp"
#include "brownne/random.hpp"

namespace brownne {

/// A real function on R^dim. Must be total: callers extend by zero outside
/// their domain of interest.
struct ScalarField {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> eval;

  double operator()(std::span<const double> x) const { return eval(x); }
};

enum class NddMethod { quadrature, monte_carlo };

/// One evaluation of D_{n,v}u(x). Quadrature results carry samples = 0 and
/// std_error = 0.
struct NddEstimate {
  double value = 0.0;
  NddMethod method = NddMethod::quadrature;
  std::size_t samples = 0;
  double std_error = 0.0;
};

/// Per-coordinate kernel indices n_1..n_N.
struct MultiIndex {
  std::vector<int> entries;

  std::size_t size() const noexcept { return entries.size(); }
  int operator[](std::size_t i) const { return entries[i]; }
  int min() const;

  static MultiIndex uniform(std::size_t dim, int n) { return {std::vector<int>(dim, n)}; }
};

/// N x N matrix whose row i is the direction v_i; row-major storage.
class DirectionSet {
 public:
  explicit DirectionSet(std::size_t dim, std::vector<double> rows);
  static DirectionSet identity(std::size_t dim);

  std::size_t dim() const noexcept { return dim_; }
  std::span<const double> row(std::size_t i) const { return {rows_.data() + i * dim_, dim_}; }

 private:
  std::size_t dim_;
  std::vector<double> rows_;
};

struct GradientOptions {
  NddMethod method = NddMethod::quadrature;
  std::size_t mc_samples = 1000;
  QuadratureConfig quad{};
};

/// Q(u, v, x, t) = (u(x + t v) - u(x)) / t, given u(x) precomputed.
double difference_quotient(const ScalarField& u, std::span<const double> x,
                           std::span<const double> v, double t, double ux,
                           std::vector<double>& scratch);

/// D_{n,v}u(x) by composite Gauss-Legendre over the kernel support. Gaussian
/// kernels are split at t = 0 so the removable singularity is never sampled.
NddEstimate ndd_quadrature(const ScalarField& u, std::span<const double> x,
                           std::span<const double> v, const Kernel& kernel,
                           const QuadratureConfig& quad = {});

/// D_{n,v}u(x) as the sample mean of Q over t_i ~ rho_n, m >= 2.
NddEstimate ndd_monte_carlo(const ScalarField& u, std::span<const double> x,
                            std::span<const double> v, const Kernel& kernel, std::size_t m,
                            RandomStream& rng);

/// Monte Carlo estimate of E[Q^k].
NddEstimate q_moment(const ScalarField& u, std::span<const double> x, std::span<const double> v,
                     const Kernel& kernel, int k, std::size_t m, RandomStream& rng);

/// Component i is D_{n_i, v_i}u(x) where v_i is row i of V.
std::vector<double> nonlocal_gradient(const ScalarField& u, std::span<const double> x,
                                      const MultiIndex& idx, KernelFamily family,
                                      const DirectionSet& directions,
                                      const GradientOptions& options, RandomStream& rng);

/// Nonlocal gradient along the coordinate axes.
std::vector<double> nonlocal_gradient(const ScalarField& u, std::span<const double> x,
                                      const MultiIndex& idx, KernelFamily family,
                                      const GradientOptions& options, RandomStream& rng);

/// First-order model u(x0) + (x - x0)^T grad_n u(x0).
double nonlocal_taylor(const ScalarField& u, std::span<const double> x0,
                       std::span<const double> x, const MultiIndex& idx, KernelFamily family,
                       const GradientOptions& options, RandomStream& rng);

/// The correction term b in D(u1 u2) = (u1 D u2 + u2 D u1 + b) / 2.
double product_defect(const ScalarField& u1, const ScalarField& u2, std::span<const double> x,
                      std::span<const double> v, const Kernel& kernel,
                      const QuadratureConfig& quad = {});

/// Applies `f` to every quadrature node t of the kernel's support and returns
/// sum w(t) f(t) rho(t). Shared by every quadrature-based nonlocal operator.
double integrate_against_kernel(const Kernel& kernel, const std::function<double(double)>& f,
                                const QuadratureConfig& quad = {});

}  // namespace brownne
