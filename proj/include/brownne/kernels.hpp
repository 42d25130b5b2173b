#pragma once

#include <string>
#include <string_view>

#include "brownne/random.hpp"

namespace brownne {

enum class KernelFamily { gaussian, linear_rect, exponential_rect };

std::string_view to_string(KernelFamily family) noexcept;
/// Accepts "gaussian"/"gauss", "linrect"/"linear_rect", "exprect"/"exponential_rect".
KernelFamily parse_family(std::string_view name);

/// Smallest index allowed for the family (linear_rect starts at 2).
int min_index(KernelFamily family) noexcept;

struct Interval {
  double lo;
  double hi;

  double width() const noexcept { return hi - lo; }
  bool contains(double t) const noexcept { return lo <= t && t <= hi; }

  friend bool operator==(const Interval&, const Interval&) = default;
};

/// Member n of an interaction-density sequence rho_n on the real line.
///
///   gaussian          rho_n(t) = n / sqrt(2 pi) * exp(-n^2 t^2 / 2)
///   linear_rect       rho_n(t) = n (n - 1) on [1/n, 1/(n-1)]
///   exponential_rect  rho_n(t) = 2^n on [2^-n, 2^-(n-1)]
///
/// The rectangle densities are one-sided and never touch t = 0. Kernels are
/// immutable values.
class Kernel {
 public:
  /// Largest exponential_rect index whose support is still a normal double.
  static constexpr int max_exponential_index = 1000;

  Kernel(KernelFamily family, int n);

  /// Parses "family:n", e.g. "exprect:8" or "linrect:150".
  static Kernel parse(std::string_view spec);

  KernelFamily family() const noexcept { return family_; }
  int index() const noexcept { return n_; }

  double pdf(double t) const noexcept;
  double cdf(double t) const noexcept;

  /// Exact support for rectangles; [-6/n, 6/n] for the gaussian, outside of
  /// which the mass is below 1e-8.
  Interval support() const noexcept;

  /// Inverse-CDF draw for rectangles, scaled standard normal for the gaussian.
  double sample(RandomStream& rng) const;

  /// Probability mass at |t| > delta.
  double tail(double delta) const;

  /// E[T^k].
  double moment(int k) const;

  std::string to_string() const;

  friend bool operator==(const Kernel&, const Kernel&) = default;

 private:
  KernelFamily family_;
  int n_;
  Interval rect_{0.0, 0.0};
};

}  // namespace brownne
