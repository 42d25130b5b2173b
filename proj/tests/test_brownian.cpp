#include <doctest.h>

#include <boost/math/distributions/chi_squared.hpp>
#include <cmath>

#include "brownne/brownian.hpp"
#include "brownne/error.hpp"
#include "oracles.hpp"

using namespace brownne;

namespace {

double jarque_bera_p(const std::vector<double>& xs) {
  const auto s = oracle::summarize(xs);
  const double n = static_cast<double>(xs.size());
  double m2 = 0.0, m3 = 0.0, m4 = 0.0;
  for (double x : xs) {
    const double d = x - s.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  const double skew = m3 / std::pow(m2, 1.5);
  const double kurt = m4 / (m2 * m2);
  const double jb = n / 6.0 * (skew * skew + 0.25 * (kurt - 3.0) * (kurt - 3.0));
  return boost::math::cdf(boost::math::complement(boost::math::chi_squared(2.0), jb));
}

// dx = 2^-(n+7) on [0, 1.5]
std::vector<BrownianPath> ensemble(int paths, int finest, std::uint64_t seed) {
  const int steps = static_cast<int>(1.5 * std::ldexp(1.0, finest + 7)) + 1;
  std::vector<BrownianPath> out;
  out.reserve(paths);
  for (int i = 0; i < paths; ++i) {
    auto rng = RandomStream::derive(seed, "path", i);
    out.push_back(simulate_path(1.5, steps, rng));
  }
  return out;
}

}  // namespace

TEST_SUITE("brownian") {

TEST_CASE("spec validation and constants") {
  CHECK_THROWS_AS(BrownianSpec(0, 1.0, 0.1), ContractError);
  CHECK_THROWS_AS(BrownianSpec(2, 0.0, 0.1), ContractError);
  CHECK_THROWS_AS(BrownianSpec(2, 1.0, -0.1), ContractError);
  const BrownianSpec s(4, 1.0, 0.0);
  CHECK(s.beta() == doctest::Approx(1.0 - std::log(2.0)).epsilon(1e-15));
  CHECK(s.variance() == doctest::Approx(9.81929).epsilon(1e-6));
  CHECK(BrownianSpec(4, -0.5, 0.0).variance() == doctest::Approx(0.5 * s.variance()).epsilon(1e-15));
  CHECK(BrownianSpec(1, 2.0, 1.0).variance() == doctest::Approx(2.45482).epsilon(1e-5));
}

TEST_CASE("path simulation") {
  RandomStream rng(1);
  CHECK_THROWS_AS(simulate_path(1.0, 1, rng), ContractError);
  CHECK_THROWS_AS(simulate_path(0.0, 10, rng), ContractError);

  std::vector<double> end2, w1, w3, w7;
  for (int i = 0; i < 10000; ++i) {
    auto r = RandomStream::derive(7, "sim", i);
    const auto p2 = simulate_path(2.0, 2, r);
    CHECK(p2.values[0] == 0.0);
    CHECK(p2.grid[1] == 2.0);
    end2.push_back(p2.values[1]);
    const auto p = simulate_path(1.0, 1024, r);
    CHECK(p.grid.size() == 1024);
    w1.push_back(p.values.back());
    w3.push_back(p.at(0.3));
    w7.push_back(p.at(0.7));
  }
  const auto s2 = oracle::summarize(end2);
  CHECK(std::abs(s2.variance - 2.0) <= 4.0 * s2.variance_se);
  CHECK(std::abs(oracle::summarize(w1).variance - 1.0) <= 0.05);
  const auto a = oracle::summarize(w3), b = oracle::summarize(w7);
  double cov = 0.0;
  for (std::size_t i = 0; i < w3.size(); ++i) cov += (w3[i] - a.mean) * (w7[i] - b.mean);
  cov /= static_cast<double>(w3.size() - 1);
  CHECK(std::abs(cov - 0.3) <= 0.05 * 0.3);
}

TEST_CASE("path ndd of deterministic paths") {
  BrownianPath zero, line;
  for (int i = 0; i <= 256; ++i) {
    zero.grid.push_back(i / 256.0);
    zero.values.push_back(0.0);
    line.grid.push_back(i / 256.0);
    line.values.push_back(-1.7 * i / 256.0);
  }
  CHECK(path_ndd(zero, 0.4, BrownianSpec(3, 1.0, 1.0)) == 0.0);
  CHECK(path_ndd(line, 0.4, BrownianSpec(3, 1.0, 1.0)) == doctest::Approx(-1.7).epsilon(1e-12));
  CHECK(path_ndd(line, 0.6, BrownianSpec(5, -0.5, 1.0)) == doctest::Approx(0.85).epsilon(1e-12));

  CHECK_THROWS_AS(path_ndd(line, 0.9, BrownianSpec(2, 1.0, 1.0)), DomainError);
  CHECK_THROWS_AS(path_ndd(line, 0.1, BrownianSpec(2, -1.0, 1.0)), DomainError);
  CHECK_THROWS_AS(path_ndd(line, 0.5, BrownianSpec(6, 1.0, 1.0)), ResolutionError);
  CHECK_NOTHROW(path_ndd(line, 0.5, BrownianSpec(5, 1.0, 1.0)));
  CHECK_THROWS_AS(line.at(1.5), DomainError);
}

TEST_CASE("Gaussian law of the path ndd") {
  const auto paths = ensemble(10000, 4, 2024);
  for (int n : {2, 3, 4}) {
    for (double v : {1.0, -0.5}) {
      const BrownianSpec spec(n, v, 1.0);
      std::vector<double> xs_var;
      // x = 0.2 is too close to the origin for v < 0 at n = 2
      const auto xs = v > 0 ? std::vector<double>{0.2, 0.3, 0.5, 0.8} : std::vector<double>{0.3, 0.5, 0.8};
      for (double x : xs) {
        std::vector<double> d;
        d.reserve(paths.size());
        for (const auto& p : paths) d.push_back(path_ndd(p, x, spec));
        const auto s = oracle::summarize(d);
        CHECK(std::abs(s.mean) <= 4.0 * s.mean_se);
        CHECK(std::abs(s.variance - spec.variance()) <= 0.05 * spec.variance());
        if ((n == 2 || n == 4) && (x == 0.3 || x == 0.5)) CHECK(jarque_bera_p(d) > 0.01);
        xs_var.push_back(s.variance);
      }
      // stationarity: variances at different x agree within sampling error
      for (double var : xs_var) {
        CHECK(std::abs(var - xs_var[0]) <= 5.0 * std::sqrt(2.0) * spec.variance() * std::sqrt(2.0 / 9999.0));
      }
    }
  }
}

TEST_CASE("forward activation") {
  RandomStream rng(3);
  const BrownianSpec quiet(4, 1.0, 0.0);
  CHECK(forward_activation(2.5, quiet, rng) == 2.5);
  CHECK(forward_activation(-2.5, quiet, rng) == 0.0);
  CHECK(forward_activation(0.0, BrownianSpec(4, 1.0, 0.7), rng) == 0.0);

  for (double z : {4.0, -2.0}) {
    const BrownianSpec spec(4, 1.0, 0.5);
    std::vector<double> xs(100000);
    for (auto& x : xs) x = forward_activation(z, spec, rng);
    const auto s = oracle::summarize(xs);
    CHECK(std::abs(s.mean - std::max(z, 0.0)) <= 4.0 * s.mean_se);
    CHECK(std::abs(s.variance - 0.25 * std::abs(z)) <= 0.05 * 0.25 * std::abs(z));
  }
}

TEST_CASE("alpha zero draws no random numbers") {
  RandomStream a(5), b(5);
  const BrownianSpec quiet(3, 1.0, 0.0);
  forward_activation(1.0, quiet, a);
  backward_activation(1.0, quiet, a);
  CHECK(a.next_u64() == b.next_u64());
}

TEST_CASE("backward activation") {
  RandomStream rng(4);
  const BrownianSpec quiet(4, 1.0, 0.0);
  CHECK(backward_activation(3.0, quiet, rng) == 1.0);
  CHECK(backward_activation(-3.0, quiet, rng) == 0.0);
  CHECK(backward_activation(0.0, quiet, rng) == 0.0);

  for (const auto& [spec, z] : {std::pair{BrownianSpec(4, 1.0, 1.0), 1.0}, std::pair{BrownianSpec(1, 2.0, 1.0), -1.0}}) {
    std::vector<double> xs(100000);
    for (auto& x : xs) x = backward_activation(z, spec, rng);
    const auto s = oracle::summarize(xs);
    CHECK(std::abs(s.mean - (z > 0 ? 1.0 : 0.0)) <= 4.0 * s.mean_se);
    CHECK(std::abs(s.variance - spec.variance()) <= 0.05 * spec.variance());
  }
}

}  // TEST_SUITE
