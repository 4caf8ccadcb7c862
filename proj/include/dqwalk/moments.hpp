#pragma once

// Exact finite-time position moments in momentum space.
//
// With a_m = L_k^{m-1} rho0 (rho0 the initial coin density),
//
//   <x>_t   = i   Int dk/2pi  sum_{m=1}^t Tr G_k a_m
//   <x^2>_t =     Int dk/2pi  sum_{m=1}^t sum_{m'<m}
//                   Tr[G_k L^{m-m'-1} G^dag_k a_m'] + Tr[G^dag_k L^{m-m'-1} G_k a_m']
//           +     Int dk/2pi  sum_{m=1}^t Tr J_k a_m
//
// where, in terms of the coin matrices C_n(k) and their k-derivatives C'_n,
//   L X = sum C X C^dag,  G X = sum C' X C^dag,  G^dag X = sum C X C'^dag,
//   J X = sum C' X C'^dag.
//
// Every integrand is a trigonometric polynomial in k of degree at most
// 2*max_hop*t, so the uniform trapezoid rule on [-pi, pi) is exact once the
// node count exceeds that degree.

#include "dqwalk/channel.hpp"
#include "dqwalk/error.hpp"
#include "dqwalk/parallel.hpp"
#include "dqwalk/pauli.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace dqwalk {

struct CoinMatrices {
  std::vector<CoinOperator> c;
  std::vector<CoinOperator> dc;
};

inline CoinMatrices coin_matrices(const WalkChannel& channel, double k) {
  CoinMatrices m;
  m.c.reserve(static_cast<std::size_t>(channel.num_kraus()));
  m.dc.reserve(static_cast<std::size_t>(channel.num_kraus()));
  for (int n = 0; n < channel.num_kraus(); ++n) {
    m.c.push_back(coin_matrix_at_k(channel, n, k));
    m.dc.push_back(coin_matrix_derivative_at_k(channel, n, k));
  }
  return m;
}

/// X -> sum_n C_n(k) X C_n^dag(k').
inline AffineSuperoperator build_L(const WalkChannel& channel, double k, double k_prime) {
  std::vector<CoinOperator> left, right;
  for (int n = 0; n < channel.num_kraus(); ++n) {
    left.push_back(coin_matrix_at_k(channel, n, k));
    right.push_back(coin_matrix_at_k(channel, n, k_prime));
  }
  return sandwich_superoperator(left, right);
}

inline AffineSuperoperator build_L(const WalkChannel& channel, double k) {
  const auto m = coin_matrices(channel, k);
  return sandwich_superoperator(m.c, m.c);
}

/// X -> sum_n C'_n(k) X C_n^dag(k').
inline AffineSuperoperator build_G(const WalkChannel& channel, double k, double k_prime) {
  std::vector<CoinOperator> left, right;
  for (int n = 0; n < channel.num_kraus(); ++n) {
    left.push_back(coin_matrix_derivative_at_k(channel, n, k));
    right.push_back(coin_matrix_at_k(channel, n, k_prime));
  }
  return sandwich_superoperator(left, right);
}

inline AffineSuperoperator build_G(const WalkChannel& channel, double k) {
  const auto m = coin_matrices(channel, k);
  return sandwich_superoperator(m.dc, m.c);
}

inline AffineSuperoperator build_Gdag(const WalkChannel& channel, double k) {
  const auto m = coin_matrices(channel, k);
  return sandwich_superoperator(m.c, m.dc);
}

inline AffineSuperoperator build_J(const WalkChannel& channel, double k) {
  const auto m = coin_matrices(channel, k);
  return sandwich_superoperator(m.dc, m.dc);
}

/// L, G, G^dag and J of one channel at one momentum.
struct SuperoperatorSet {
  AffineSuperoperator L, G, Gdag, J;

  static SuperoperatorSet at(const WalkChannel& channel, double k) {
    const auto m = coin_matrices(channel, k);
    return {sandwich_superoperator(m.c, m.c), sandwich_superoperator(m.dc, m.c),
            sandwich_superoperator(m.c, m.dc), sandwich_superoperator(m.dc, m.dc)};
  }
};

struct MomentOptions {
  /// Quadrature nodes; 0 selects default_node_count.
  int n_k = 0;
  /// Literal O(t^2)-per-node double sum instead of the O(t) recursion.
  bool naive = false;
  /// Worker threads for the k-loop; 0 reads DQWALK_THREADS.
  unsigned threads = 0;
  /// Test hook: negate G (but not G^dag). Used to check that cross-checks
  /// detect a broken superoperator.
  bool negate_g_for_testing = false;
};

struct MomentSeries {
  std::string label;
  PauliVector psi0;
  int n_k = 0;
  bool quadrature_exact = true;
  /// Indexed by t = 0..t_max.
  std::vector<double> first, second, variance, j_term;
  double max_imag_residue = 0.0;
  std::vector<std::string> warnings;

  int t_max() const { return static_cast<int>(first.size()) - 1; }
};

inline constexpr double kImagResidueWarn = 1e-10;
inline constexpr double kImagResidueFatal = 1e-8;

/// Smallest node count for which the trapezoid rule is exact (with margin).
inline int exactness_bound(const WalkChannel& channel, int t) { return 4 * channel.max_hop() * t + 1; }

inline int default_node_count(const WalkChannel& channel, int t) { return 4 * channel.max_hop() * t + 8; }

inline double quadrature_node(int j, int n_k) { return -std::numbers::pi + 2.0 * std::numbers::pi * j / n_k; }

inline void require_coin_density(const PauliVector& psi0) {
  if (!psi0.is_density()) {
    throw Error(ErrorKind::InvalidCoinState,
                "initial coin must be a density: r0 = 1/2, real coefficients, |r| <= 1/2");
  }
}

namespace detail {

/// Per-t accumulators of one node or one block of nodes.
struct SeriesAccumulator {
  std::vector<Complex> first, second, j_term;

  explicit SeriesAccumulator(int t = 0)
      : first(static_cast<std::size_t>(t) + 1), second(static_cast<std::size_t>(t) + 1),
        j_term(static_cast<std::size_t>(t) + 1) {}

  SeriesAccumulator& operator+=(const SeriesAccumulator& o) {
    for (std::size_t i = 0; i < first.size(); ++i) {
      first[i] += o.first[i];
      second[i] += o.second[i];
      j_term[i] += o.j_term[i];
    }
    return *this;
  }
};

/// Cumulative per-t integrand at one node: O(t) recursion with
///   u_{m+1} = L u_m + G^dag a_m,  v_{m+1} = L v_m + G a_m,
/// so that the double sum at step m is Tr(G u_m) + Tr(G^dag v_m).
inline void accumulate_node_recursive(const SuperoperatorSet& ops, const Eigen::Vector4cd& rho0, int t,
                                      SeriesAccumulator& acc) {
  const Eigen::Matrix4cd& L = ops.L.matrix();
  const Eigen::Matrix4cd& G = ops.G.matrix();
  const Eigen::Matrix4cd& Gd = ops.Gdag.matrix();
  const auto g0 = G.row(0);
  const auto gd0 = Gd.row(0);
  const auto j0 = ops.J.matrix().row(0);

  Eigen::Vector4cd a = rho0;
  Eigen::Vector4cd u = Eigen::Vector4cd::Zero();
  Eigen::Vector4cd v = Eigen::Vector4cd::Zero();
  Complex s1{0.0, 0.0}, s2{0.0, 0.0}, sj{0.0, 0.0};
  for (int m = 1; m <= t; ++m) {
    s1 += 2.0 * (g0 * a)(0);
    s2 += 2.0 * ((g0 * u)(0) + (gd0 * v)(0));
    sj += 2.0 * (j0 * a)(0);
    const auto i = static_cast<std::size_t>(m);
    acc.first[i] += kI * s1;
    acc.second[i] += s2 + sj;
    acc.j_term[i] += sj;
    const Eigen::Vector4cd u_next = L * u + Gd * a;
    const Eigen::Vector4cd v_next = L * v + G * a;
    const Eigen::Vector4cd a_next = L * a;
    u = u_next;
    v = v_next;
    a = a_next;
  }
}

/// Same quantity via the literal double sum with precomputed powers of L.
inline void accumulate_node_naive(const SuperoperatorSet& ops, const Eigen::Vector4cd& rho0, int t,
                                  SeriesAccumulator& acc) {
  std::vector<AffineSuperoperator> powers;
  powers.reserve(static_cast<std::size_t>(std::max(t, 1)));
  for (int j = 0; j < t; ++j) powers.push_back(power(ops.L, static_cast<unsigned>(j)));

  std::vector<PauliVector> a;
  for (int m = 1; m <= t; ++m) a.push_back(apply(powers[static_cast<std::size_t>(m - 1)], PauliVector(rho0)));

  Complex s1{0.0, 0.0}, s2{0.0, 0.0}, sj{0.0, 0.0};
  for (int m = 1; m <= t; ++m) {
    const auto& am = a[static_cast<std::size_t>(m - 1)];
    s1 += trace_of(apply(ops.G, am));
    sj += trace_of(apply(ops.J, am));
    for (int mp = 1; mp < m; ++mp) {
      const auto& amp = a[static_cast<std::size_t>(mp - 1)];
      const auto& lp = powers[static_cast<std::size_t>(m - mp - 1)];
      s2 += trace_of(apply(ops.G, apply(lp, apply(ops.Gdag, amp))));
      s2 += trace_of(apply(ops.Gdag, apply(lp, apply(ops.G, amp))));
    }
    const auto i = static_cast<std::size_t>(m);
    acc.first[i] += kI * s1;
    acc.second[i] += s2 + sj;
    acc.j_term[i] += sj;
  }
}

inline constexpr int kNodesPerBlock = 16;

/// Integrates node_fn(k, accumulator) over n_k trapezoid nodes. Nodes are
/// grouped into fixed-size blocks summed in node order, then blocks are
/// combined pairwise, so the result is identical for any thread count.
template <typename NodeFn>
SeriesAccumulator integrate_series(int n_k, int t, unsigned threads, NodeFn&& node_fn) {
  const int num_blocks = (n_k + kNodesPerBlock - 1) / kNodesPerBlock;
  std::vector<SeriesAccumulator> blocks(static_cast<std::size_t>(num_blocks), SeriesAccumulator(t));
  parallel_for(blocks.size(), threads, [&](std::size_t b) {
    const int lo = static_cast<int>(b) * kNodesPerBlock;
    const int hi = std::min(n_k, lo + kNodesPerBlock);
    for (int j = lo; j < hi; ++j) node_fn(quadrature_node(j, n_k), blocks[b]);
  });
  SeriesAccumulator total = pairwise_reduce(blocks, 0, blocks.size(), [](SeriesAccumulator a, const SeriesAccumulator& b) {
    a += b;
    return a;
  });
  const double w = 1.0 / n_k;
  for (std::size_t i = 0; i < total.first.size(); ++i) {
    total.first[i] *= w;
    total.second[i] *= w;
    total.j_term[i] *= w;
  }
  return total;
}

inline MomentSeries finish_series(const WalkChannel& channel, const PauliVector& psi0, int t, int n_k,
                                  const SeriesAccumulator& acc) {
  MomentSeries s;
  s.label = channel.label();
  s.psi0 = psi0;
  s.n_k = n_k;
  s.quadrature_exact = n_k >= exactness_bound(channel, t);
  if (!s.quadrature_exact) {
    std::ostringstream msg;
    msg << "QuadratureTooCoarse: N_k = " << n_k << " is below the exactness bound " << exactness_bound(channel, t)
        << " for t = " << t;
    s.warnings.push_back(msg.str());
  }
  for (int i = 0; i <= t; ++i) {
    const auto idx = static_cast<std::size_t>(i);
    const Complex x1 = acc.first[idx];
    const Complex x2 = acc.second[idx];
    s.max_imag_residue = std::max({s.max_imag_residue, std::abs(x1.imag()), std::abs(x2.imag())});
    s.first.push_back(x1.real());
    s.second.push_back(x2.real());
    s.variance.push_back(x2.real() - x1.real() * x1.real());
    s.j_term.push_back(acc.j_term[idx].real());
  }
  if (s.max_imag_residue > kImagResidueFatal) {
    std::ostringstream msg;
    msg << "moment imaginary residue " << s.max_imag_residue << " exceeds " << kImagResidueFatal;
    throw Error(ErrorKind::ImaginaryResidue, msg.str());
  }
  if (s.max_imag_residue > kImagResidueWarn) {
    std::ostringstream msg;
    msg << "imaginary residue " << s.max_imag_residue << " discarded";
    s.warnings.push_back(msg.str());
  }
  return s;
}

inline int resolve_node_count(const WalkChannel& channel, int t, int n_k) {
  if (n_k < 0) throw Error(ErrorKind::InvalidArgument, "N_k must be positive");
  return n_k == 0 ? default_node_count(channel, t) : n_k;
}

}  // namespace detail

/// First and second moments for every t = 0..t_max.
inline MomentSeries compute_moment_series(const WalkChannel& channel, const PauliVector& psi0, int t_max,
                                          const MomentOptions& options = {}) {
  if (t_max < 0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");
  require_coin_density(psi0);
  const int n_k = detail::resolve_node_count(channel, t_max, options.n_k);
  const Eigen::Vector4cd rho0 = psi0.coeffs();
  auto acc = detail::integrate_series(n_k, t_max, options.threads, [&](double k, detail::SeriesAccumulator& a) {
    auto ops = SuperoperatorSet::at(channel, k);
    if (options.negate_g_for_testing) ops.G = -ops.G;
    if (options.naive) {
      detail::accumulate_node_naive(ops, rho0, t_max, a);
    } else {
      detail::accumulate_node_recursive(ops, rho0, t_max, a);
    }
  });
  return detail::finish_series(channel, psi0, t_max, n_k, acc);
}

inline double first_moment(const WalkChannel& channel, const PauliVector& psi0, int t, int n_k = 0) {
  MomentOptions o;
  o.n_k = n_k;
  return compute_moment_series(channel, psi0, t, o).first.back();
}

inline double second_moment(const WalkChannel& channel, const PauliVector& psi0, int t, int n_k = 0) {
  MomentOptions o;
  o.n_k = n_k;
  return compute_moment_series(channel, psi0, t, o).second.back();
}

/// The J contribution Int dk/2pi sum_m Tr J_k a_m on its own.
inline double j_term(const WalkChannel& channel, const PauliVector& psi0, int t, int n_k = 0) {
  MomentOptions o;
  o.n_k = n_k;
  return compute_moment_series(channel, psi0, t, o).j_term.back();
}

/// Coin-only channels: G = -iZ L and J = Z L Z, which gives
///   <x>_t   = Int sum_m Tr Z L^m rho0
///   <x^2>_t = t + Int sum_m sum_{m'<m} Tr Z L^{m-m'} (Z L^m' rho0) + Tr Z L^{m-m'} ((L^m' rho0) Z).
/// Evaluated without G or J, as an independent route to the same moments.
inline MomentSeries compute_coin_series_specialized(const WalkChannel& channel, const PauliVector& psi0, int t_max,
                                                    const MomentOptions& options = {}) {
  if (!is_coin_channel(channel)) {
    throw Error(ErrorKind::NotACoinChannel,
                "channel '" + channel.label() + "' has terms other than R-right / L-left hops");
  }
  if (t_max < 0) throw Error(ErrorKind::InvalidArgument, "t must be >= 0");
  require_coin_density(psi0);
  const int n_k = detail::resolve_node_count(channel, t_max, options.n_k);
  const Eigen::Matrix4cd z_left = left_multiplication(pauli::sigma3()).matrix();
  const Eigen::Matrix4cd z_right = right_multiplication(pauli::sigma3()).matrix();
  const auto z_row = z_left.row(0);
  const Eigen::Vector4cd rho0 = psi0.coeffs();

  auto acc = detail::integrate_series(n_k, t_max, options.threads, [&](double k, detail::SeriesAccumulator& a) {
    const Eigen::Matrix4cd L = build_L(channel, k).matrix();
    Eigen::Vector4cd b = L * rho0;  // L^m rho0 for m = 1
    Eigen::Vector4cd p = Eigen::Vector4cd::Zero();
    Eigen::Vector4cd q = Eigen::Vector4cd::Zero();
    Complex s1{0.0, 0.0}, s2{0.0, 0.0};
    for (int m = 1; m <= t_max; ++m) {
      s1 += 2.0 * (z_row * b)(0);
      s2 += 2.0 * ((z_row * p)(0) + (z_row * q)(0));
      const auto i = static_cast<std::size_t>(m);
      a.first[i] += s1;
      a.second[i] += s2;
      const Eigen::Vector4cd p_next = L * (p + z_left * b);
      const Eigen::Vector4cd q_next = L * (q + z_right * b);
      p = p_next;
      q = q_next;
      b = L * b;
    }
  });
  for (int m = 0; m <= t_max; ++m) {
    const auto i = static_cast<std::size_t>(m);
    acc.second[i] += static_cast<double>(m);
    acc.j_term[i] = static_cast<double>(m);
  }
  return detail::finish_series(channel, psi0, t_max, n_k, acc);
}

inline double second_moment_coin_specialized(const WalkChannel& channel, const PauliVector& psi0, int t,
                                             int n_k = 0) {
  MomentOptions o;
  o.n_k = n_k;
  return compute_coin_series_specialized(channel, psi0, t, o).second.back();
}

inline constexpr double kContractionThreshold = 1.0 - 1e-9;

/// Largest eigenvalue modulus of the Bloch block M_k (rows/cols 1..3 of L_k).
inline double bloch_spectral_radius(const AffineSuperoperator& L) {
  const Eigen::Matrix3cd m = L.matrix().block<3, 3>(1, 1);
  Eigen::ComplexEigenSolver<Eigen::Matrix3cd> solver(m, false);
  return solver.eigenvalues().cwiseAbs().maxCoeff();
}

/// t -> infinity limit of <x>_t by summing the geometric series in M_k:
/// with L = [[1, 0], [c, M]] and fixed point r* = (I - M)^{-1} c / 2,
///   sum_m Tr G a_m = t * drift + 2 g (I - M)^{-1} (r - r*),
/// where g is the Bloch part of G's first row. A nonzero integrated drift
/// means <x>_t grows without bound.
inline double asymptotic_first_moment(const WalkChannel& channel, const PauliVector& psi0, int n_k) {
  require_coin_density(psi0);
  if (n_k < 1) throw Error(ErrorKind::InvalidArgument, "N_k must be positive");
  const Eigen::Vector3cd r = psi0.coeffs().tail<3>();
  Complex drift{0.0, 0.0};
  Complex value{0.0, 0.0};
  for (int j = 0; j < n_k; ++j) {
    const double k = quadrature_node(j, n_k);
    const auto ops = SuperoperatorSet::at(channel, k);
    const double radius = bloch_spectral_radius(ops.L);
    if (radius >= kContractionThreshold) {
      std::ostringstream msg;
      msg << "Bloch block of L_k is not strictly contracting at k = " << k << " (|lambda|max = " << radius
          << "); the long-time limit does not exist";
      throw NotContractingError(k, radius, msg.str());
    }
    const Eigen::Matrix3cd one_minus_m = Eigen::Matrix3cd::Identity() - ops.L.matrix().block<3, 3>(1, 1);
    const auto lu = one_minus_m.partialPivLu();
    const Eigen::Vector3cd c = ops.L.matrix().block<3, 1>(1, 0);
    const Eigen::Vector3cd r_star = lu.solve(0.5 * c);
    const Complex g0 = ops.G.matrix()(0, 0);
    const Eigen::RowVector3cd g = ops.G.matrix().block<1, 3>(0, 1);
    drift += 2.0 * (0.5 * g0 + (g * r_star)(0));
    value += 2.0 * (g * lu.solve(r - r_star))(0);
  }
  drift *= kI / static_cast<double>(n_k);
  value *= kI / static_cast<double>(n_k);
  if (std::abs(drift) > 1e-9) {
    std::ostringstream msg;
    msg << "mean velocity " << drift.real() << " is nonzero; <x>_t grows linearly";
    throw Error(ErrorKind::UnboundedDrift, msg.str());
  }
  if (std::abs(value.imag()) > kImagResidueFatal) {
    throw Error(ErrorKind::ImaginaryResidue, "asymptotic first moment has imaginary residue");
  }
  return value.real();
}

/// D estimate 1/2 (sigma^2(t_hi) - sigma^2(t_lo)) / (t_hi - t_lo).
inline double diffusion_from_slope(const WalkChannel& channel, const PauliVector& psi0, int t_lo, int t_hi,
                                   const MomentOptions& options = {}) {
  if (!(t_hi > t_lo && t_lo >= 1)) throw Error(ErrorKind::InvalidArgument, "need t_hi > t_lo >= 1");
  const auto s = compute_moment_series(channel, psi0, t_hi, options);
  return 0.5 * (s.variance[static_cast<std::size_t>(t_hi)] - s.variance[static_cast<std::size_t>(t_lo)]) /
         (t_hi - t_lo);
}

}  // namespace dqwalk
