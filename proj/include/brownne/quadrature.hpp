#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace brownne {

/// Fixed-order composite Gauss-Legendre settings. Every support interval is
/// cut into `panels` equal panels and each panel gets an `order`-point rule.
struct QuadratureConfig {
  int order = 64;
  int panels = 4;
};

/// Nodes and weights of the Gauss-Legendre rule on [-1, 1].
class GaussLegendre {
 public:
  explicit GaussLegendre(int order);

  /// Shared, lazily built rule for the given order.
  static const GaussLegendre& get(int order);

  int order() const noexcept { return static_cast<int>(nodes_.size()); }
  std::span<const double> nodes() const noexcept { return nodes_; }
  std::span<const double> weights() const noexcept { return weights_; }

  /// Integral of f over [a, b] with a single panel.
  template <class F>
  double integrate(F&& f, double a, double b) const {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    double sum = 0.0;
    for (std::size_t i = 0; i < nodes_.size(); ++i) sum += weights_[i] * f(mid + half * nodes_[i]);
    return half * sum;
  }

 private:
  std::vector<double> nodes_;
  std::vector<double> weights_;
};

/// Composite rule over [a, b]. Nodes are strictly interior to each panel, so
/// the endpoints are never evaluated.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureConfig& cfg = {}) {
  const auto& rule = GaussLegendre::get(cfg.order);
  const double width = (b - a) / cfg.panels;
  double sum = 0.0;
  for (int p = 0; p < cfg.panels; ++p) {
    const double lo = a + p * width;
    const double hi = (p + 1 == cfg.panels) ? b : lo + width;
    sum += rule.integrate(f, lo, hi);
  }
  return sum;
}

}  // namespace brownne
