#include "brownne/kernels.hpp"

#include <charconv>
#include <cmath>
#include <numbers>

#include "brownne/error.hpp"
#include "brownne/quadrature.hpp"

namespace brownne {

std::string_view to_string(KernelFamily family) noexcept {
  switch (family) {
    case KernelFamily::gaussian: return "gaussian";
    case KernelFamily::linear_rect: return "linrect";
    case KernelFamily::exponential_rect: return "exprect";
  }
  return "unknown";
}

KernelFamily parse_family(std::string_view name) {
  if (name == "gaussian" || name == "gauss") return KernelFamily::gaussian;
  if (name == "linrect" || name == "linear_rect") return KernelFamily::linear_rect;
  if (name == "exprect" || name == "exponential_rect") return KernelFamily::exponential_rect;
  throw ContractError("unknown kernel family '" + std::string(name) + "'");
}

int min_index(KernelFamily family) noexcept {
  return family == KernelFamily::linear_rect ? 2 : 1;
}

Kernel::Kernel(KernelFamily family, int n) : family_(family), n_(n) {
  if (n < min_index(family)) {
    throw ContractError("kernel " + std::string(brownne::to_string(family)) + " requires n >= " +
                        std::to_string(min_index(family)) + ", got " + std::to_string(n));
  }
  switch (family) {
    case KernelFamily::linear_rect:
      rect_ = {1.0 / n, 1.0 / (n - 1)};
      break;
    case KernelFamily::exponential_rect:
      if (n > max_exponential_index) {
        throw ContractError("exprect index " + std::to_string(n) + " underflows double precision");
      }
      rect_ = {std::ldexp(1.0, -n), std::ldexp(1.0, -(n - 1))};
      break;
    case KernelFamily::gaussian:
      break;
  }
}

Kernel Kernel::parse(std::string_view spec) {
  const auto colon = spec.find(':');
  if (colon == std::string_view::npos) {
    throw ContractError("kernel spec '" + std::string(spec) + "' is not of the form family:n");
  }
  const auto family = parse_family(spec.substr(0, colon));
  const auto digits = spec.substr(colon + 1);
  int n = 0;
  const auto [end, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
  if (ec != std::errc{} || end != digits.data() + digits.size()) {
    throw ContractError("kernel spec '" + std::string(spec) + "' has a non-integer index");
  }
  return Kernel(family, n);
}

double Kernel::pdf(double t) const noexcept {
  if (family_ == KernelFamily::gaussian) {
    const double nt = n_ * t;
    return n_ * std::numbers::inv_sqrtpi / std::numbers::sqrt2 * std::exp(-0.5 * nt * nt);
  }
  if (!rect_.contains(t)) return 0.0;
  return family_ == KernelFamily::linear_rect ? static_cast<double>(n_) * (n_ - 1) : std::ldexp(1.0, n_);
}

double Kernel::cdf(double t) const noexcept {
  if (family_ == KernelFamily::gaussian) return 0.5 * std::erfc(-n_ * t / std::numbers::sqrt2);
  if (t <= rect_.lo) return 0.0;
  if (t >= rect_.hi) return 1.0;
  return (t - rect_.lo) / rect_.width();
}

Interval Kernel::support() const noexcept {
  if (family_ == KernelFamily::gaussian) return {-6.0 / n_, 6.0 / n_};
  return rect_;
}

double Kernel::sample(RandomStream& rng) const {
  if (family_ == KernelFamily::gaussian) return rng.normal() / n_;
  return rect_.lo + rng.uniform() * rect_.width();
}

double Kernel::tail(double delta) const {
  if (!(delta > 0.0)) throw ContractError("tail location must be positive");
  if (family_ == KernelFamily::gaussian) return std::erfc(n_ * delta / std::numbers::sqrt2);
  // Rectangles live on the positive axis, so |t| > delta is t > delta.
  if (delta <= rect_.lo) return 1.0;
  if (delta >= rect_.hi) return 0.0;
  return (rect_.hi - delta) / rect_.width();
}

double Kernel::moment(int k) const {
  if (k < 1) throw ContractError("moment order must be >= 1");
  if (family_ == KernelFamily::gaussian) {
    const auto s = support();
    const QuadratureConfig split{64, 4};
    auto f = [&](double t) { return std::pow(t, k) * pdf(t); };
    return integrate(f, s.lo, 0.0, split) + integrate(f, 0.0, s.hi, split);
  }
  // (b^{k+1} - a^{k+1}) / ((k+1)(b-a)) = sum_j a^j b^{k-j} / (k+1), free of cancellation.
  const double a = rect_.lo;
  const double b = rect_.hi;
  double sum = 0.0;
  double apow = 1.0;
  for (int j = 0; j <= k; ++j) {
    sum += apow * std::pow(b, k - j);
    apow *= a;
  }
  return sum / (k + 1);
}

std::string Kernel::to_string() const {
  return std::string(brownne::to_string(family_)) + ":" + std::to_string(n_);
}

}  // namespace brownne
