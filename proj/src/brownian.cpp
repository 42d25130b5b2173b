#include "brownne/brownian.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "brownne/error.hpp"

namespace brownne {

double BrownianPath::at(double x) const {
  const double dx = spacing();
  const double pos = (x - grid.front()) / dx;
  const auto last = static_cast<double>(grid.size() - 1);
  if (pos < 0.0 || pos > last) {
    std::ostringstream msg;
    msg << "x = " << x << " is outside the path grid [" << grid.front() << ", " << grid.back()
        << "]";
    throw DomainError(msg.str());
  }
  const auto i = std::min(static_cast<std::size_t>(pos), grid.size() - 2);
  const double frac = pos - static_cast<double>(i);
  return values[i] + frac * (values[i + 1] - values[i]);
}

BrownianSpec::BrownianSpec(int n_, double v_, double alpha_) : n(n_), v(v_), alpha(alpha_) {
  if (n < 1) throw ContractError("Brownian kernel index must be >= 1");
  if (v == 0.0) throw ContractError("Brownian direction must be nonzero");
  if (alpha < 0.0) throw ContractError("Brownian scale alpha must be nonnegative");
}

double BrownianSpec::beta() const noexcept { return std::abs(v) * (1.0 - std::numbers::ln2); }

double BrownianSpec::variance() const noexcept { return std::ldexp(beta(), n + 1); }

BrownianPath simulate_path(double x_max, int steps, RandomStream& rng) {
  if (steps < 2) throw ContractError("a Brownian path needs at least 2 grid points");
  if (!(x_max > 0.0)) throw ContractError("x_max must be positive");
  BrownianPath path;
  path.grid.resize(steps);
  path.values.resize(steps);
  const double dx = x_max / (steps - 1);
  const double sd = std::sqrt(dx);
  path.grid[0] = 0.0;
  path.values[0] = 0.0;
  for (int i = 1; i < steps; ++i) {
    path.grid[i] = i * dx;
    path.values[i] = path.values[i - 1] + sd * rng.normal();
  }
  return path;
}

double path_ndd(const BrownianPath& path, double x, const BrownianSpec& spec,
                const QuadratureConfig& quad) {
  if (path.grid.size() < 2) throw ContractError("path has fewer than 2 grid points");
  const double a = std::ldexp(1.0, -spec.n);
  const double b = 2.0 * a;
  const double dx = path.spacing();
  if (dx > std::ldexp(1.0, -(spec.n + 3)) * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "path spacing " << dx << " is coarser than 2^-(n+3) = " << std::ldexp(1.0, -(spec.n + 3));
    throw ResolutionError(msg.str());
  }
  const double lo = x + std::min(a * spec.v, b * spec.v);
  const double hi = x + std::max(a * spec.v, b * spec.v);
  if (lo < path.grid.front() || hi > path.grid.back() || x < path.grid.front() ||
      x > path.grid.back()) {
    std::ostringstream msg;
    msg << "kernel support around x = " << x << " leaves the path grid";
    throw DomainError(msg.str());
  }

  const double w0 = path.at(x);
  auto integrand = [&](double t) { return (path.at(x + t * spec.v) - w0) / t; };

  // Split [a, b] at every t where x + t v crosses a grid point, so each panel
  // sees a linear path segment and the rule converges fast.
  std::vector<double> cuts{a, b};
  const double origin = path.grid.front();
  const double first = std::ceil((lo - origin) / dx);
  for (double k = first; origin + k * dx < hi; k += 1.0) {
    const double t = (origin + k * dx - x) / spec.v;
    if (t > a && t < b) cuts.push_back(t);
  }
  std::sort(cuts.begin(), cuts.end());

  const auto& rule = GaussLegendre::get(quad.order);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] > cuts[i]) sum += rule.integrate(integrand, cuts[i], cuts[i + 1]);
  }
  return sum / (b - a);
}

double forward_activation(double z, const BrownianSpec& spec, RandomStream& rng) {
  const double relu = z > 0.0 ? z : 0.0;
  if (spec.alpha == 0.0 || z == 0.0) return relu;
  return relu + spec.alpha * std::sqrt(std::abs(z)) * rng.normal();
}

double backward_activation(double z, const BrownianSpec& spec, RandomStream& rng) {
  const double step = z > 0.0 ? 1.0 : 0.0;
  if (spec.alpha == 0.0) return step;
  return step + spec.alpha * std::sqrt(spec.variance()) * rng.normal();
}

}  // namespace brownne
