#include "brownne/ndd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "brownne/error.hpp"

namespace brownne {

namespace {

void check_dims(const ScalarField& u, std::span<const double> x, std::span<const double> v) {
  if (x.size() != u.dim || v.size() != u.dim) {
    std::ostringstream msg;
    msg << "dimension mismatch: field dim " << u.dim << ", x dim " << x.size() << ", v dim "
        << v.size();
    throw ContractError(msg.str());
  }
}

double checked(double value, std::span<const double> at) {
  if (!std::isfinite(value)) {
    std::ostringstream msg;
    msg << "field evaluated to " << value << " at (";
    for (std::size_t i = 0; i < at.size() && i < 8; ++i) msg << (i ? ", " : "") << at[i];
    if (at.size() > 8) msg << ", ...";
    msg << ")";
    throw EvaluationError(msg.str());
  }
  return value;
}

// Running mean and variance (Welford).
struct Accumulator {
  std::size_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  NddEstimate estimate() const {
    const double var = count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
    return {mean, NddMethod::monte_carlo, count, std::sqrt(var / static_cast<double>(count))};
  }
};

}  // namespace

int MultiIndex::min() const {
  if (entries.empty()) throw ContractError("empty multi-index");
  return *std::min_element(entries.begin(), entries.end());
}

DirectionSet::DirectionSet(std::size_t dim, std::vector<double> rows)
    : dim_(dim), rows_(std::move(rows)) {
  if (rows_.size() != dim_ * dim_) throw ContractError("direction set must be an N x N matrix");
  for (std::size_t i = 0; i < dim_; ++i) {
    const auto r = row(i);
    if (std::all_of(r.begin(), r.end(), [](double c) { return c == 0.0; })) {
      throw ContractError("direction " + std::to_string(i) + " is the zero vector");
    }
  }
}

DirectionSet DirectionSet::identity(std::size_t dim) {
  std::vector<double> rows(dim * dim, 0.0);
  for (std::size_t i = 0; i < dim; ++i) rows[i * dim + i] = 1.0;
  return DirectionSet(dim, std::move(rows));
}

double difference_quotient(const ScalarField& u, std::span<const double> x,
                           std::span<const double> v, double t, double ux,
                           std::vector<double>& scratch) {
  scratch.resize(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) scratch[i] = x[i] + t * v[i];
  const double shifted = checked(u(scratch), scratch);
  return (shifted - ux) / t;
}

double integrate_against_kernel(const Kernel& kernel, const std::function<double(double)>& f,
                                const QuadratureConfig& quad) {
  const auto s = kernel.support();
  auto weighted = [&](double t) { return f(t) * kernel.pdf(t); };
  if (kernel.family() == KernelFamily::gaussian) {
    // Split at zero; Gauss-Legendre nodes are interior so t = 0 is never hit.
    // Dividing by the rule's own mass renormalises the truncated density.
    auto density = [&](double t) { return kernel.pdf(t); };
    const double mass = integrate(density, s.lo, 0.0, quad) + integrate(density, 0.0, s.hi, quad);
    return (integrate(weighted, s.lo, 0.0, quad) + integrate(weighted, 0.0, s.hi, quad)) / mass;
  }
  // Rectangle densities are constant on their support.
  return kernel.pdf(0.5 * (s.lo + s.hi)) * integrate(f, s.lo, s.hi, quad);
}

NddEstimate ndd_quadrature(const ScalarField& u, std::span<const double> x,
                           std::span<const double> v, const Kernel& kernel,
                           const QuadratureConfig& quad) {
  check_dims(u, x, v);
  const double ux = checked(u(x), x);
  std::vector<double> scratch;
  const double value = integrate_against_kernel(
      kernel, [&](double t) { return difference_quotient(u, x, v, t, ux, scratch); }, quad);
  return {value, NddMethod::quadrature, 0, 0.0};
}

NddEstimate ndd_monte_carlo(const ScalarField& u, std::span<const double> x,
                            std::span<const double> v, const Kernel& kernel, std::size_t m,
                            RandomStream& rng) {
  return q_moment(u, x, v, kernel, 1, m, rng);
}

NddEstimate q_moment(const ScalarField& u, std::span<const double> x, std::span<const double> v,
                     const Kernel& kernel, int k, std::size_t m, RandomStream& rng) {
  check_dims(u, x, v);
  if (m < 2) throw ContractError("Monte Carlo evaluation needs at least 2 samples");
  if (k < 1) throw ContractError("moment order must be >= 1");
  const double ux = checked(u(x), x);
  std::vector<double> scratch;
  Accumulator acc;
  for (std::size_t i = 0; i < m; ++i) {
    const double q = difference_quotient(u, x, v, kernel.sample(rng), ux, scratch);
    acc.add(k == 1 ? q : std::pow(q, k));
  }
  return acc.estimate();
}

std::vector<double> nonlocal_gradient(const ScalarField& u, std::span<const double> x,
                                      const MultiIndex& idx, KernelFamily family,
                                      const DirectionSet& directions,
                                      const GradientOptions& options, RandomStream& rng) {
  if (idx.size() != u.dim || directions.dim() != u.dim || x.size() != u.dim) {
    throw ContractError("nonlocal gradient: multi-index, directions and point must match field dim " +
                        std::to_string(u.dim));
  }
  std::vector<double> grad(u.dim);
  for (std::size_t i = 0; i < u.dim; ++i) {
    const Kernel kernel(family, idx[i]);
    grad[i] = options.method == NddMethod::quadrature
                  ? ndd_quadrature(u, x, directions.row(i), kernel, options.quad).value
                  : ndd_monte_carlo(u, x, directions.row(i), kernel, options.mc_samples, rng).value;
  }
  return grad;
}

std::vector<double> nonlocal_gradient(const ScalarField& u, std::span<const double> x,
                                      const MultiIndex& idx, KernelFamily family,
                                      const GradientOptions& options, RandomStream& rng) {
  return nonlocal_gradient(u, x, idx, family, DirectionSet::identity(u.dim), options, rng);
}

double nonlocal_taylor(const ScalarField& u, std::span<const double> x0,
                       std::span<const double> x, const MultiIndex& idx, KernelFamily family,
                       const GradientOptions& options, RandomStream& rng) {
  if (x.size() != x0.size()) throw ContractError("nonlocal taylor: x and x0 differ in dimension");
  const double base = checked(u(x0), x0);
  if (std::equal(x.begin(), x.end(), x0.begin())) return base;
  const auto grad = nonlocal_gradient(u, x0, idx, family, options, rng);
  double value = base;
  for (std::size_t i = 0; i < x.size(); ++i) value += (x[i] - x0[i]) * grad[i];
  return value;
}

double product_defect(const ScalarField& u1, const ScalarField& u2, std::span<const double> x,
                      std::span<const double> v, const Kernel& kernel,
                      const QuadratureConfig& quad) {
  check_dims(u1, x, v);
  check_dims(u2, x, v);
  const double a0 = checked(u1(x), x);
  const double b0 = checked(u2(x), x);
  std::vector<double> shifted(x.size());
  return integrate_against_kernel(
      kernel,
      [&](double t) {
        for (std::size_t i = 0; i < x.size(); ++i) shifted[i] = x[i] + t * v[i];
        const double a = checked(u1(shifted), shifted);
        const double b = checked(u2(shifted), shifted);
        return (2.0 * a * b - a0 * b - a * b0) / t;
      },
      quad);
}

}  // namespace brownne
