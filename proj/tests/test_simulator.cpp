#include "dqwalk/brokenline.hpp"
#include "dqwalk/channel.hpp"
#include "dqwalk/simulator.hpp"
#include "support.hpp"

#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

using namespace dqwalk;

namespace {

double prob_at(const std::vector<std::pair<int, double>>& dist, int x) {
  for (const auto& [site, prob] : dist) {
    if (site == x) return prob;
  }
  return 0.0;
}

double variance(const DensityState& s) {
  const double m1 = moments_direct(s, 1);
  return moments_direct(s, 2) - m1 * m1;
}

CoinOperator random_unitary(std::mt19937& rng) {
  std::normal_distribution<double> g;
  Eigen::Matrix2cd a;
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) a(r, c) = Complex(g(rng), g(rng));
  Eigen::HouseholderQR<Eigen::Matrix2cd> qr(a);
  return qr.householderQ();
}

// Random coin walk with a random mixed-unitary or amplitude-damping noise set.
WalkChannel random_coin_channel(std::mt19937& rng, int index) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const CoinOperator coin = random_unitary(rng);
  if (index % 3 == 2) {
    const double gamma = u(rng);
    CoinOperator k0, k1;
    k0 << 1.0, 0.0, 0.0, std::sqrt(1.0 - gamma);
    k1 << 0.0, std::sqrt(gamma), 0.0, 0.0;
    // Weights of 1/2 each with the operators scaled by sqrt(2).
    return build_coin_channel(coin, {{0.5, std::numbers::sqrt2 * k0}, {0.5, std::numbers::sqrt2 * k1}});
  }
  const int m = 1 + index % 3;
  std::vector<double> w(static_cast<std::size_t>(m));
  double total = 0.0;
  for (auto& x : w) total += (x = u(rng) + 0.05);
  std::vector<CoinKraus> noise;
  for (const double x : w) noise.push_back({x / total, random_unitary(rng)});
  return build_coin_channel(coin, noise);
}

}  // namespace

TEST_CASE("initial states", "[simulator]") {
  const auto s = init_state(0, Complex(1.0), Complex(0.0));
  CHECK(s.t == 0);
  CHECK(s.num_sites() == 1);
  const auto dist = position_distribution(s);
  REQUIRE(dist.size() == 1);
  CHECK(dist[0].first == 0);
  CHECK(dist[0].second == 1.0);
  CHECK(s.rho(0, 0) == Complex(1.0));

  const auto mixed = init_state(3, CoinOperator(0.5 * pauli::identity()));
  CHECK(mixed.x_min == 3);
  CHECK(std::abs(trace(mixed) - 1.0) <= 1e-15);
  CHECK(std::abs(purity(mixed) - 0.5) <= 1e-15);

  CHECK_ERROR_KIND(init_state(0, Complex(1.0), Complex(1.0)), ErrorKind::UnnormalizedCoin);
  CHECK_ERROR_KIND(init_state(0, CoinOperator(pauli::identity())), ErrorKind::UnnormalizedCoin);
  CHECK_ERROR_KIND(init_state(0, CoinOperator(0.5 * pauli::identity() + dyad(Coin::R, Coin::L))),
                   ErrorKind::InvalidCoinState);
}

TEST_CASE("t = 0 moments vanish at the origin", "[simulator]") {
  const auto s = init_state(0, PauliVector(0.5, 0, 0, 0.5));
  CHECK(moments_direct(s, 1) == 0.0);
  CHECK(moments_direct(s, 2) == 0.0);
  CHECK_ERROR_KIND(moments_direct(s, 3), ErrorKind::InvalidArgument);
}

TEST_CASE("two Hadamard steps from R", "[simulator]") {
  const auto s = evolve(init_state(0, Complex(1.0), Complex(0.0)), build_coherent(hadamard()), 2);
  const auto dist = position_distribution(s);
  CHECK(std::abs(prob_at(dist, -2) - 0.25) <= 1e-15);
  CHECK(std::abs(prob_at(dist, 0) - 0.5) <= 1e-15);
  CHECK(std::abs(prob_at(dist, 2) - 0.25) <= 1e-15);
  CHECK(prob_at(dist, 1) == 0.0);
  CHECK(prob_at(dist, -1) == 0.0);
}

TEST_CASE("one Hadamard step gives unit second moment", "[simulator]") {
  const auto s = step(init_state(0, Complex(1.0), Complex(0.0)), build_coherent(hadamard()));
  CHECK(std::abs(moments_direct(s, 1)) <= 1e-15);
  CHECK(std::abs(moments_direct(s, 2) - 1.0) <= 1e-15);
}

TEST_CASE("identity coin moves ballistically", "[simulator]") {
  const auto s = evolve(init_state(0, Complex(1.0), Complex(0.0)), build_coherent(pauli::identity()), 9);
  CHECK(std::abs(prob_at(position_distribution(s), 9) - 1.0) <= 1e-15);
}

TEST_CASE("evolve with zero steps is the identity", "[simulator]") {
  const auto s0 = init_state(2, Complex(0.6), Complex(0.0, 0.8));
  const auto s1 = evolve(s0, build_broken_line({0.3}), 0);
  CHECK(s1.t == 0);
  CHECK(s1.rho == s0.rho);
  CHECK_ERROR_KIND(evolve(s0, build_broken_line({0.3}), -1), ErrorKind::InvalidArgument);
}

TEST_CASE("symmetric coin gives a symmetric coherent walk", "[simulator]") {
  auto s = init_state(0, Complex(1.0 / std::numbers::sqrt2), Complex(0.0, 1.0 / std::numbers::sqrt2));
  const auto ch = build_coherent(hadamard());
  for (int t = 1; t <= 40; ++t) {
    s = step(s, ch);
    const auto dist = position_distribution(s);
    for (int x = 0; x <= t; ++x) REQUIRE(std::abs(prob_at(dist, x) - prob_at(dist, -x)) <= 1e-13);
  }
}

TEST_CASE("fully broken line freezes the walker", "[simulator]") {
  const auto ch = build_broken_line({1.0});
  for (const auto& start : {init_state(0, Complex(1.0), Complex(0.0)), init_state(0, PauliVector(0.5, 0.2, 0.1, -0.3))}) {
    auto s = start;
    for (int t = 1; t <= 50; ++t) {
      s = step(s, ch);
      REQUIRE(std::abs(prob_at(position_distribution(s), 0) - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("coherent Hadamard walk at t = 100 has ballistic peaks", "[simulator]") {
  const int t = 100;
  const auto s = evolve(init_state(0, Complex(1.0), Complex(0.0)), build_coherent(hadamard()), t);
  const auto dist = position_distribution(s);
  const double peak = t / std::numbers::sqrt2;

  auto argmax_in = [&](int lo, int hi) {
    int best = lo;
    for (int x = lo; x <= hi; ++x) {
      if (prob_at(dist, x) > prob_at(dist, best)) best = x;
    }
    return best;
  };
  CHECK(std::abs(argmax_in(1, t) - peak) <= 5.0);
  CHECK(std::abs(argmax_in(-t, -1) + peak) <= 5.0);

  double right = 0.0, left = 0.0;
  for (const auto& [x, prob] : dist) {
    if (x > 0) right += prob;
    if (x < 0) left += prob;
  }
  CHECK(right - left > 0.3);  // starting in R biases the walk to the right
}

TEST_CASE("broken line p = 0.9 spreads diffusively", "[simulator]") {
  const int t = 200;
  const auto s = evolve(init_state(0, PauliVector(0.5, 0, 0, 0)), build_broken_line({0.9}), t);
  const double d = diffusion_closed_form(0.9).D;
  CHECK(std::abs(variance(s) - 2.0 * d * t) <= 0.05 * 2.0 * d * t);
}

TEST_CASE("state invariants hold for random coin channels", "[simulator][property]") {
  std::mt19937 rng(1234);
  for (int c = 0; c < 24; ++c) {
    const auto ch = random_coin_channel(rng, c);
    REQUIRE_NOTHROW(validate_completeness(ch));
    auto s = init_state(0, Complex(0.6), Complex(0.0, -0.8));
    for (int t = 1; t <= 12; ++t) {
      s = step(s, ch);
      REQUIRE(std::abs(trace(s) - 1.0) <= 1e-12);
      REQUIRE(hermiticity_error(s) <= 1e-12);
      REQUIRE(s.x_min >= -t);
      REQUIRE(s.x_max <= t);
      double total = 0.0;
      for (const auto& [x, prob] : position_distribution(s)) total += prob;
      REQUIRE(std::abs(total - 1.0) <= 1e-12);
    }
    REQUIRE(min_eigenvalue(s) >= -1e-10);
  }
}

TEST_CASE("broken line purity is non-increasing", "[simulator][property]") {
  for (double p : {0.2, 0.5, 0.8}) {
    const auto ch = build_broken_line({p});
    auto s = init_state(0, Complex(1.0), Complex(0.0));
    double prev = purity(s);
    for (int t = 1; t <= 30; ++t) {
      s = step(s, ch);
      const double now = purity(s);
      REQUIRE(now <= prev + 1e-10);
      prev = now;
    }
  }
}

TEST_CASE("broken line with full coin dephasing is diffusive", "[simulator]") {
  const auto ch = append_coin_noise(build_broken_line({0.3}), {{0.5, pauli::identity()}, {0.5, pauli::sigma3()}},
                                    "broken-line+dephasing");
  REQUIRE_NOTHROW(validate_completeness(ch));
  auto s = init_state(0, Complex(1.0), Complex(0.0));
  s = evolve(s, ch, 60);
  const double v60 = variance(s);
  s = evolve(s, ch, 60);
  const double v120 = variance(s);
  // sigma^2 / t settles while sigma^2 / t^2 keeps halving.
  CHECK(std::abs(v120 / 120.0 - v60 / 60.0) <= 0.02 * (v60 / 60.0));
  CHECK((v120 / (120.0 * 120.0)) / (v60 / (60.0 * 60.0)) < 0.55);
}

TEST_CASE("threaded steps match serial steps", "[simulator]") {
  const auto ch = build_broken_line({0.4});
  auto a = init_state(0, Complex(1.0), Complex(0.0));
  auto b = a;
  for (int t = 0; t < 15; ++t) {
    a = step(a, ch, 1);
    b = step(b, ch, 4);
  }
  CHECK(a.rho == b.rho);
}

TEST_CASE("direct moment series", "[simulator]") {
  const auto series = direct_moment_series(init_state(0, Complex(1.0), Complex(0.0)), build_coherent(hadamard()), 2);
  REQUIRE(series.size() == 3);
  CHECK(series[0] == std::pair<double, double>(0.0, 0.0));
  CHECK(std::abs(series[1].second - 1.0) <= 1e-15);
  CHECK(std::abs(series[2].second - 2.0) <= 1e-15);
}

TEST_CASE("distribution CSV", "[simulator][io]") {
  const auto s = evolve(init_state(0, Complex(1.0), Complex(0.0)), build_coherent(hadamard()), 2);
  std::ostringstream sparse, full;
  write_distribution_csv(sparse, position_distribution(s));
  write_distribution_csv(full, position_distribution(s), true);
  const std::string a = sparse.str(), b = full.str();
  CHECK(a.rfind("x,prob\n-2,", 0) == 0);
  CHECK(std::count(a.begin(), a.end(), '\n') == 4);
  CHECK(std::count(b.begin(), b.end(), '\n') == 6);
  CHECK(b.find("\n-1,0\n") != std::string::npos);
}
