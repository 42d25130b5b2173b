#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "brownne/error.hpp"
#include "brownne/iam.hpp"
#include "brownne/ndd.hpp"

using namespace brownne;

namespace {

double full_norm(const DiscImage& a, const DiscImage& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i) s += (a.pixels[i] - b.pixels[i]) * (a.pixels[i] - b.pixels[i]);
  return std::sqrt(s);
}

double loglog_slope(int P, const std::vector<double>& deltas) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const auto base = render_disc(0.3, P);
  for (double d : deltas) {
    const double x = std::log(d);
    const double y = std::log(full_norm(base, render_disc(0.3 + d, P)));
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double n = static_cast<double>(deltas.size());
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

GdConfig iam_cfg() {
  GdConfig cfg;
  cfg.step0 = 1e-4;
  cfg.max_iters = 20000;
  cfg.grad_method = NddMethod::monte_carlo;
  cfg.mc_samples = 4;
  cfg.restart = RestartPolicy::on_non_descent(10);
  return cfg;
}

}  // namespace

TEST_SUITE("iam") {

TEST_CASE("rendering contracts") {
  CHECK_THROWS_AS(render_disc(0.5, 15), ContractError);
  CHECK_THROWS_AS(render_disc(0.5, 64, 0), ContractError);
  CHECK(render_disc(1.3, 32).clamped);
  CHECK(render_disc(1.3, 32).theta == 1.0);
  CHECK_FALSE(render_disc(0.7, 32).clamped);

  const auto a = render_disc(0.37, 128), b = render_disc(0.37, 128);
  CHECK(a.pixels == b.pixels);
  for (double p : a.pixels) {
    CHECK(p >= 0.0);
    CHECK(p <= 1.0);
  }
  const double rp = disc_radius * 128;
  CHECK(std::abs(a.mass() - std::numbers::pi * rp * rp) <= 2.0 * std::numbers::pi * rp);
  CHECK(render_disc(0.0, 128).mass() == doctest::Approx(render_disc(1.0, 128).mass()).epsilon(1e-12));
}

TEST_CASE("Holder exponent one half") {
  CHECK(std::abs(loglog_slope(128, {0.02, 0.04, 0.06, 0.08, 0.1}) - 0.5) <= 0.1);
  for (int P : {64, 128}) {
    std::vector<double> deltas;
    for (double d = 4.0 / P; d <= 0.1 + 1e-12; d *= 1.25) deltas.push_back(d);
    CHECK(std::abs(loglog_slope(P, deltas) - 0.5) <= 0.1);
  }
}

TEST_CASE("objective") {
  const auto target = render_disc(0.5, 64);
  CHECK(objective(0.5, target) == 0.0);
  for (double d : {0.01, 0.05, 0.2, 0.4}) {
    CHECK(objective(0.5 - d, target) == doctest::Approx(objective(0.5 + d, target)).epsilon(1e-10));
  }
  for (double theta : {0.0, 0.13, 0.49, 0.77, 1.0}) {
    CHECK(objective(theta, target) == doctest::Approx(full_norm(render_disc(theta, 64), target)).epsilon(1e-12));
  }
  const auto t2 = render_disc(0.2, 64);
  double prev = 0.0;
  for (double theta = 0.2; theta <= 1.0 + 1e-12; theta += 0.01) {
    const double e = objective(theta, t2);
    if (theta <= 0.2 + 0.3) CHECK(e >= prev - 1e-12);
    prev = e;
    if (theta > 0.2 + 0.32) {
      const auto img = render_disc(theta, 64);
      CHECK(e == doctest::Approx(std::sqrt(img.squared_norm() + t2.squared_norm())).epsilon(1e-12));
    }
  }
  CHECK(plateau_value(t2) == doctest::Approx(std::sqrt(2.0 * t2.squared_norm())));
}

TEST_CASE("ndd of the objective is finite") {
  const auto target = render_disc(0.4, 64);
  const ScalarField e{1, [&](std::span<const double> th) { return objective(th[0], target); }};
  RandomStream rng(3);
  const double one = 1.0;
  for (int n : {50, 150, 500}) {
    for (double theta = 0.0; theta <= 1.0; theta += 0.05) {
      CHECK(std::isfinite(ndd_monte_carlo(e, {&theta, 1}, {&one, 1}, Kernel(KernelFamily::linear_rect, n), 8, rng).value));
    }
  }
}

TEST_CASE("estimate theta") {
  const Kernel k(KernelFamily::linear_rect, 150);
  RandomStream rng(10);
  const auto at_target = render_disc(0.62, 128);
  IamOptions start;
  start.theta0 = 0.62;
  const auto r0 = estimate_theta(at_target, 0.62, k, iam_cfg(), rng, start);
  CHECK(r0.converged);
  CHECK(r0.iterations <= 1);
  CHECK(r0.rel_error < 1e-12);

  const auto target = render_disc(0.5, 128);
  IamOptions near;
  near.theta0 = 0.45;
  const auto r = estimate_theta(target, 0.5, k, iam_cfg(), rng, near);
  CHECK(r.converged);
  CHECK(r.rel_error < 0.05);
  CHECK(r.iterations <= 20000);
  CHECK(r.final_objective < 0.02 * plateau_value(target));
  CHECK(r.rel_error == doctest::Approx(std::abs(r.theta_hat - 0.5)));
}

TEST_CASE("batch experiment") {
  IamBatchConfig cfg;
  cfg.n_values = {100, 50};
  cfg.runs = 1;
  cfg.resolution = 64;
  cfg.gd = iam_cfg();
  cfg.seed = 5;
  cfg.start_at_target = true;
  auto rows = batch_experiment(cfg);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 50);
  CHECK(rows[1].n == 100);
  for (const auto& row : rows) CHECK(row.mean_rel_error < 1e-12);

  cfg.start_at_target = false;
  cfg.runs = 4;
  cfg.gd.max_iters = 500;
  const auto a = batch_experiment(cfg);
  cfg.threads = 3;
  const auto b = batch_experiment(cfg);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].mean_rel_error == b[i].mean_rel_error);
    CHECK(a[i].mean_iterations == b[i].mean_iterations);
    CHECK(a[i].converged_fraction == b[i].converged_fraction);
  }
  cfg.runs = 0;
  CHECK_THROWS_AS(batch_experiment(cfg), ContractError);
}

TEST_CASE("pgm export") {
  const auto img = render_disc(0.25, 32, 2);
  const auto dir = std::filesystem::temp_directory_path() / "brownne_pgm_test";
  std::filesystem::create_directories(dir);
  write_pgm(img, (dir / "a.pgm").string());
  write_pgm(img, (dir / "b.pgm").string(), false);
  std::ifstream bin(dir / "a.pgm", std::ios::binary);
  std::string magic;
  int w = 0, h = 0, maxv = 0;
  bin >> magic >> w >> h >> maxv;
  CHECK(magic == "P5");
  CHECK(w == 32);
  CHECK(h == 32);
  CHECK(maxv == 255);
  CHECK(std::filesystem::file_size(dir / "a.pgm") == std::string("P5\n32 32\n255\n").size() + 32 * 32);
  std::ifstream txt(dir / "b.pgm");
  txt >> magic;
  CHECK(magic == "P2");
  CHECK_THROWS_AS(write_pgm(img, (dir / "missing" / "x.pgm").string()), IoError);
  std::filesystem::remove_all(dir);
}

}  // TEST_SUITE
