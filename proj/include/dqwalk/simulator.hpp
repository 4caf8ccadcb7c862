#pragma once

// Brute-force evolution of the full walker density matrix,
// rho(t+1) = sum_n E_n rho(t) E_n^dag, on a lattice that grows by
// max_hop sites per side per step (exactly the light cone).

#include "dqwalk/channel.hpp"
#include "dqwalk/csv.hpp"
#include "dqwalk/error.hpp"
#include "dqwalk/parallel.hpp"
#include "dqwalk/pauli.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <ostream>
#include <utility>
#include <vector>

namespace dqwalk {

/// rho is indexed by 2*(x - x_min) + coin, coin in (R, L) order.
struct DensityState {
  int t = 0;
  int x_min = 0;
  int x_max = 0;
  Eigen::MatrixXcd rho;

  int num_sites() const { return x_max - x_min + 1; }
};

inline DensityState init_state(int x0, const CoinOperator& coin_density) {
  if (std::abs(coin_density.trace() - Complex{1.0, 0.0}) > 1e-12) {
    throw Error(ErrorKind::UnnormalizedCoin, "coin density must have unit trace");
  }
  if (max_abs_diff(coin_density, coin_density.adjoint()) > 1e-12) {
    throw Error(ErrorKind::InvalidCoinState, "coin density must be Hermitian");
  }
  DensityState s;
  s.t = 0;
  s.x_min = x0;
  s.x_max = x0;
  s.rho = coin_density;
  return s;
}

inline DensityState init_state(int x0, const PauliVector& coin) { return init_state(x0, from_pauli(coin)); }

/// Pure coin state a_R |R> + a_L |L>.
inline DensityState init_state(int x0, Complex amp_r, Complex amp_l) {
  if (std::abs(std::norm(amp_r) + std::norm(amp_l) - 1.0) > 1e-12) {
    throw Error(ErrorKind::UnnormalizedCoin, "coin amplitudes must satisfy |a_R|^2 + |a_L|^2 = 1");
  }
  Eigen::Vector2cd psi(amp_r, amp_l);
  return init_state(x0, CoinOperator(psi * psi.adjoint()));
}

/// One application of the channel. Kraus terms may be summed on several
/// threads; the per-operator results are added in index order.
inline DensityState step(const DensityState& state, const WalkChannel& channel, unsigned threads = 1) {
  const int h = channel.max_hop();
  const Eigen::Index n_old = state.num_sites();
  const Eigen::Index n_new = n_old + 2 * h;
  const auto dim_new = 2 * n_new;

  std::vector<Eigen::MatrixXcd> parts(static_cast<std::size_t>(channel.num_kraus()));
  parallel_for(parts.size(), threads, [&](std::size_t n) {
    const auto& blocks = channel.hop_blocks(static_cast<int>(n));
    Eigen::MatrixXcd left = Eigen::MatrixXcd::Zero(dim_new, 2 * n_old);
    for (const auto& b : blocks) {
      for (Eigen::Index x = 0; x < n_old; ++x) {
        const Eigen::Index y = x + b.l + h;
        left.middleRows(2 * y, 2).noalias() += b.coin * state.rho.middleRows(2 * x, 2);
      }
    }
    Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(dim_new, dim_new);
    for (const auto& b : blocks) {
      const CoinOperator bd = b.coin.adjoint();
      for (Eigen::Index x = 0; x < n_old; ++x) {
        const Eigen::Index y = x + b.l + h;
        out.middleCols(2 * y, 2).noalias() += left.middleCols(2 * x, 2) * bd;
      }
    }
    parts[n] = std::move(out);
  });

  DensityState next;
  next.t = state.t + 1;
  next.x_min = state.x_min - h;
  next.x_max = state.x_max + h;
  next.rho = Eigen::MatrixXcd::Zero(dim_new, dim_new);
  for (const auto& part : parts) next.rho += part;
  return next;
}

inline DensityState evolve(DensityState state, const WalkChannel& channel, int steps, unsigned threads = 1) {
  if (steps < 0) throw Error(ErrorKind::InvalidArgument, "steps must be >= 0");
  for (int s = 0; s < steps; ++s) state = step(state, channel, threads);
  return state;
}

/// prob(x) = sum_i <x,i|rho|x,i> for every lattice site, in increasing x.
inline std::vector<std::pair<int, double>> position_distribution(const DensityState& state) {
  std::vector<std::pair<int, double>> dist;
  dist.reserve(static_cast<std::size_t>(state.num_sites()));
  for (int s = 0; s < state.num_sites(); ++s) {
    const double prob = state.rho(2 * s, 2 * s).real() + state.rho(2 * s + 1, 2 * s + 1).real();
    dist.emplace_back(state.x_min + s, prob);
  }
  return dist;
}

inline double moments_direct(const DensityState& state, int order) {
  if (order != 1 && order != 2) throw Error(ErrorKind::InvalidArgument, "moment order must be 1 or 2");
  double acc = 0.0;
  for (const auto& [x, prob] : position_distribution(state)) {
    acc += (order == 1 ? x : static_cast<double>(x) * x) * prob;
  }
  return acc;
}

inline Complex trace(const DensityState& state) { return state.rho.trace(); }

inline double purity(const DensityState& state) { return (state.rho * state.rho).trace().real(); }

inline double hermiticity_error(const DensityState& state) {
  return (state.rho - state.rho.adjoint()).cwiseAbs().maxCoeff();
}

/// Smallest eigenvalue of rho; O(N^3), diagnostic use only.
inline double min_eigenvalue(const DensityState& state) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(state.rho, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

/// Per-step oracle moments for t = 0..steps: {first, second}.
inline std::vector<std::pair<double, double>> direct_moment_series(DensityState state, const WalkChannel& channel,
                                                                   int steps, unsigned threads = 1) {
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(steps) + 1);
  for (int s = 0;; ++s) {
    out.emplace_back(moments_direct(state, 1), moments_direct(state, 2));
    if (s == steps) break;
    state = step(state, channel, threads);
  }
  return out;
}

/// CSV `x,prob`. Sites with probability exactly zero are skipped unless
/// all_sites is set.
inline void write_distribution_csv(std::ostream& os, const std::vector<std::pair<int, double>>& dist,
                                   bool all_sites = false) {
  os << "x,prob\n";
  for (const auto& [x, prob] : dist) {
    if (!all_sites && prob == 0.0) continue;
    os << x << ',' << format_double(prob) << '\n';
  }
}

}  // namespace dqwalk
