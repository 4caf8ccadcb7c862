#pragma once

// Translation-invariant Kraus channels for a walker on the line.
//
// Each Kraus operator is E_n = sum_x sum_l sum_{i,j} a^(n)_{l,i,j} |x+l><x| (x) |i><j|
// with amplitudes independent of x. In momentum space it becomes the coin
// matrix C_n(k) = sum a^(n)_{l,i,j} e^{-ilk} |i><j|.

#include "dqwalk/error.hpp"
#include "dqwalk/pauli.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace dqwalk {

struct KrausTerm {
  int n = 0;
  int l = 0;
  Coin i = Coin::R;
  Coin j = Coin::R;
  Complex amp{0.0, 0.0};

  friend bool operator==(const KrausTerm&, const KrausTerm&) = default;
};

/// All terms of one Kraus operator that share a hop length l, collapsed
/// into the coin block A_{n,l} = sum_{i,j} a^(n)_{l,i,j} |i><j|.
struct HopBlock {
  int l = 0;
  CoinOperator coin = CoinOperator::Zero();
};

class WalkChannel {
 public:
  WalkChannel() = default;

  /// Terms with amplitude exactly zero are dropped; Kraus indices are
  /// renumbered densely in order of first appearance after sorting by n.
  WalkChannel(std::vector<KrausTerm> terms, std::string label) : label_(std::move(label)) {
    std::erase_if(terms, [](const KrausTerm& t) { return t.amp == Complex{0.0, 0.0}; });
    std::stable_sort(terms.begin(), terms.end(),
                     [](const KrausTerm& a, const KrausTerm& b) { return a.n < b.n; });
    std::map<int, int> renumber;
    for (auto& t : terms) {
      auto [it, inserted] = renumber.try_emplace(t.n, static_cast<int>(renumber.size()));
      t.n = it->second;
    }
    terms_ = std::move(terms);
    num_kraus_ = static_cast<int>(renumber.size());
    max_hop_ = 0;
    for (const auto& t : terms_) max_hop_ = std::max(max_hop_, std::abs(t.l));

    blocks_.assign(static_cast<std::size_t>(num_kraus_), {});
    for (const auto& t : terms_) {
      auto& kraus = blocks_[static_cast<std::size_t>(t.n)];
      auto it = std::find_if(kraus.begin(), kraus.end(), [&](const HopBlock& b) { return b.l == t.l; });
      if (it == kraus.end()) {
        kraus.push_back(HopBlock{t.l, CoinOperator::Zero()});
        it = std::prev(kraus.end());
      }
      it->coin(index_of(t.i), index_of(t.j)) += t.amp;
    }
  }

  const std::vector<KrausTerm>& terms() const { return terms_; }
  int num_kraus() const { return num_kraus_; }
  int max_hop() const { return max_hop_; }
  const std::string& label() const { return label_; }

  const std::vector<HopBlock>& hop_blocks(int n) const { return blocks_.at(static_cast<std::size_t>(n)); }

 private:
  std::vector<KrausTerm> terms_;
  std::vector<std::vector<HopBlock>> blocks_;
  int num_kraus_ = 0;
  int max_hop_ = 0;
  std::string label_;
};

struct BrokenLineParams {
  double p = 0.0;
  double theta1 = 0.0;
  double theta2 = std::numbers::pi;
  double theta3 = 0.0;
  double theta4 = 0.0;
};

/// Coin channel element: D applied to the coin with probability `prob`
/// before the walk step.
struct CoinKraus {
  double prob = 1.0;
  CoinOperator op = CoinOperator::Identity();
};

inline CoinOperator coin_matrix_at_k(const WalkChannel& channel, int n, double k) {
  CoinOperator c = CoinOperator::Zero();
  for (const auto& b : channel.hop_blocks(n)) {
    c += std::exp(-kI * (static_cast<double>(b.l) * k)) * b.coin;
  }
  return c;
}

inline CoinOperator coin_matrix_derivative_at_k(const WalkChannel& channel, int n, double k) {
  CoinOperator c = CoinOperator::Zero();
  for (const auto& b : channel.hop_blocks(n)) {
    const double l = static_cast<double>(b.l);
    c += (-kI * l) * std::exp(-kI * (l * k)) * b.coin;
  }
  return c;
}

struct CompletenessReport {
  double worst_k = 0.0;
  double residual = 0.0;
};

/// Max-norm of sum_n C_n^dag(k) C_n(k) - I over a uniform grid on [-pi, pi).
inline CompletenessReport completeness_residual(const WalkChannel& channel, int num_k_samples) {
  CompletenessReport report;
  for (int s = 0; s < num_k_samples; ++s) {
    const double k = -std::numbers::pi + 2.0 * std::numbers::pi * s / num_k_samples;
    CoinOperator sum = CoinOperator::Zero();
    for (int n = 0; n < channel.num_kraus(); ++n) {
      const CoinOperator c = coin_matrix_at_k(channel, n, k);
      sum += c.adjoint() * c;
    }
    const double r = max_abs_diff(sum, CoinOperator::Identity());
    if (r > report.residual || s == 0) report = {k, r};
  }
  return report;
}

/// The entries of sum C^dag C are trigonometric polynomials of degree at
/// most 2*max_hop, so this many samples certify the identity for every k.
inline int certifying_sample_count(const WalkChannel& channel) { return 4 * channel.max_hop() + 1; }

/// Throws CompletenessError(CompletenessViolated) if the residual exceeds tol.
inline void validate_completeness(const WalkChannel& channel, int num_k_samples, double tol) {
  if (num_k_samples < 1) throw Error(ErrorKind::InvalidArgument, "num_k_samples must be >= 1");
  if (channel.num_kraus() == 0) {
    throw CompletenessError(ErrorKind::CompletenessViolated, 0.0, 1.0, "channel has no Kraus operators");
  }
  const auto report = completeness_residual(channel, num_k_samples);
  if (!(report.residual <= tol)) {
    std::ostringstream msg;
    msg << "sum_n C_n^dag C_n != I for channel '" << channel.label() << "': residual " << report.residual
        << " at k = " << report.worst_k;
    throw CompletenessError(ErrorKind::CompletenessViolated, report.worst_k, report.residual, msg.str());
  }
}

inline void validate_completeness(const WalkChannel& channel, double tol = 1e-10) {
  validate_completeness(channel, certifying_sample_count(channel), tol);
}

inline bool is_unitary(const CoinOperator& c, double tol = 1e-12) {
  return max_abs_diff(c.adjoint() * c, CoinOperator::Identity()) <= tol;
}

/// One noiseless step S (I (x) coin): R moves +1, L moves -1.
inline WalkChannel build_coherent(const CoinOperator& coin, std::string label = "coherent") {
  if (!is_unitary(coin)) throw Error(ErrorKind::NonUnitaryCoin, "coin operator is not unitary");
  std::vector<KrausTerm> terms;
  for (Coin j : {Coin::R, Coin::L}) {
    terms.push_back({0, +1, Coin::R, j, coin(0, index_of(j))});
    terms.push_back({0, -1, Coin::L, j, coin(1, index_of(j))});
  }
  return WalkChannel(std::move(terms), std::move(label));
}

/// Applies coin noise before every Kraus operator of `channel`:
/// E_{n,m} = sqrt(p_m) E_n (I (x) D_m).
inline WalkChannel append_coin_noise(const WalkChannel& channel, const std::vector<CoinKraus>& noise,
                                     std::string label) {
  std::vector<KrausTerm> out;
  const int num_noise = static_cast<int>(noise.size());
  for (const auto& t : channel.terms()) {
    for (int m = 0; m < num_noise; ++m) {
      const auto& d = noise[static_cast<std::size_t>(m)];
      const double w = std::sqrt(d.prob);
      for (Coin s : {Coin::R, Coin::L}) {
        const Complex amp = w * t.amp * d.op(index_of(t.j), index_of(s));
        out.push_back({t.n * num_noise + m, t.l, t.i, s, amp});
      }
    }
  }
  // Merge duplicates produced by the sum over j.
  std::vector<KrausTerm> merged;
  for (const auto& t : out) {
    auto it = std::find_if(merged.begin(), merged.end(), [&](const KrausTerm& u) {
      return u.n == t.n && u.l == t.l && u.i == t.i && u.j == t.j;
    });
    if (it == merged.end()) {
      merged.push_back(t);
    } else {
      it->amp += t.amp;
    }
  }
  return WalkChannel(std::move(merged), std::move(label));
}

inline void validate_coin_kraus_set(const std::vector<CoinKraus>& coin_kraus) {
  if (coin_kraus.empty()) throw Error(ErrorKind::InvalidCoinKrausSet, "empty coin Kraus set");
  double total = 0.0;
  CoinOperator sum = CoinOperator::Zero();
  for (const auto& d : coin_kraus) {
    if (!(d.prob >= 0.0)) throw Error(ErrorKind::InvalidCoinKrausSet, "negative probability");
    total += d.prob;
    sum += d.prob * d.op.adjoint() * d.op;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    throw Error(ErrorKind::InvalidCoinKrausSet, "probabilities sum to " + std::to_string(total));
  }
  if (max_abs_diff(sum, CoinOperator::Identity()) > 1e-10) {
    throw Error(ErrorKind::InvalidCoinKrausSet, "sum_n p_n D_n^dag D_n != I");
  }
}

/// Coin-only decoherence: E_n = sqrt(p_n) S (I (x) coin D_n).
inline WalkChannel build_coin_channel(const CoinOperator& coin, const std::vector<CoinKraus>& coin_kraus,
                                      std::string label = "coin-channel") {
  validate_coin_kraus_set(coin_kraus);
  return append_coin_noise(build_coherent(coin), coin_kraus, std::move(label));
}

/// Hadamard walk whose coin coherences are scaled by (1 - q) before each
/// step: q = 0 is coherent, q = 1 is full dephasing.
inline WalkChannel build_coin_dephasing(double q) {
  if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorKind::DomainError, "dephasing strength q must lie in [0, 1]");
  std::ostringstream label;
  label << "coin-dephasing(q=" << q << ")";
  return build_coin_channel(hadamard(), {{1.0 - 0.5 * q, pauli::identity()}, {0.5 * q, pauli::sigma3()}},
                            label.str());
}

/// Broken-line noise on the Hadamard walk: each link next to the walker is
/// broken with probability p. Kraus weights (1-p), sqrt(p(1-p)) twice and p
/// select the shifts S_1..S_4 (no break, left broken, right broken, both).
/// No phase check; build_broken_line is the validating entry point.
inline WalkChannel build_broken_line_unchecked(const BrokenLineParams& params) {
  const double p = params.p;
  if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorKind::DomainError, "break probability p must lie in [0, 1]");

  const CoinOperator h = hadamard();
  const Complex ph1 = std::polar(1.0, params.theta1);
  const Complex ph2 = std::polar(1.0, params.theta2);
  const Complex ph3 = std::polar(1.0, params.theta3);
  const Complex ph4 = std::polar(1.0, params.theta4);
  const double w_none = 1.0 - p;
  const double w_one = std::sqrt(p * (1.0 - p));
  const double w_both = p;

  std::vector<KrausTerm> terms;
  auto add = [&](int n, int l, Coin i, const CoinOperator& block) {
    for (Coin j : {Coin::R, Coin::L}) {
      terms.push_back({n, l, i, j, block(index_of(i), index_of(j))});
    }
  };
  const CoinOperator rr = dyad(Coin::R, Coin::R) * h;
  const CoinOperator ll = dyad(Coin::L, Coin::L) * h;
  const CoinOperator rl = dyad(Coin::R, Coin::L) * h;
  const CoinOperator lr = dyad(Coin::L, Coin::R) * h;

  add(0, +1, Coin::R, w_none * rr);
  add(0, -1, Coin::L, w_none * ph1 * ll);
  add(1, +1, Coin::R, w_one * rr);
  add(1, 0, Coin::R, w_one * ph2 * rl);
  add(2, 0, Coin::L, w_one * lr);
  add(2, -1, Coin::L, w_one * ph3 * ll);
  add(3, 0, Coin::R, w_both * rl);
  add(3, 0, Coin::L, w_both * ph4 * lr);

  std::ostringstream label;
  label << "broken-line(p=" << p << ")";
  return WalkChannel(std::move(terms), label.str());
}

/// Distance of a from b on the circle.
inline double angular_distance(double a, double b) {
  const double d = std::remainder(a - b, 2.0 * std::numbers::pi);
  return std::abs(d);
}

inline WalkChannel build_broken_line(const BrokenLineParams& params) {
  WalkChannel channel = build_broken_line_unchecked(params);
  const auto report = completeness_residual(channel, certifying_sample_count(channel));
  const double phase_error = angular_distance(params.theta2 - params.theta3, std::numbers::pi);
  if (phase_error > 1e-9 || report.residual > 1e-10) {
    // At p in {0, 1} the reflecting terms vanish; report the residual the
    // same phases would give at p = 1/2 so the message stays informative.
    CompletenessReport shown = report;
    if (shown.residual <= 1e-10) {
      BrokenLineParams probe = params;
      probe.p = 0.5;
      shown = completeness_residual(build_broken_line_unchecked(probe), 5);
    }
    std::ostringstream msg;
    msg << "theta2 - theta3 must equal pi (mod 2pi), got " << params.theta2 - params.theta3
        << "; completeness residual " << shown.residual;
    throw CompletenessError(ErrorKind::PhaseConstraintViolated, shown.worst_k, shown.residual, msg.str());
  }
  return channel;
}

/// Coin-only channels are those whose every term is an R-hop right or an
/// L-hop left; exactly then dC_n/dk = -i Z C_n(k).
inline bool is_coin_channel(const WalkChannel& channel) {
  return std::all_of(channel.terms().begin(), channel.terms().end(), [](const KrausTerm& t) {
    return (t.i == Coin::R && t.l == +1) || (t.i == Coin::L && t.l == -1);
  });
}

}  // namespace dqwalk
