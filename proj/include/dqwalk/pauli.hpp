#pragma once

// Coin-space operator algebra in the Pauli basis {I, s1, s2, s3}.
//
// Coin basis order is (R, L) throughout: index 0 is |R>, the rightward
// (+1) hop; index 1 is |L>. With this order |R><R| = (I + s3)/2.
//
// A 2x2 operator O is stored as the complex 4-vector r with
//   O = r0 I + r1 s1 + r2 s2 + r3 s3,   r_i = Tr(s_i O) / 2,
// so superoperators on coin space become 4x4 complex matrices.

#include <Eigen/Dense>

#include <array>
#include <complex>
#include <cstddef>
#include <numbers>

namespace dqwalk {

using Complex = std::complex<double>;
using CoinOperator = Eigen::Matrix2cd;

enum class Coin : int { R = 0, L = 1 };

constexpr int index_of(Coin c) { return static_cast<int>(c); }

inline constexpr Complex kI{0.0, 1.0};

namespace pauli {

inline CoinOperator identity() { return CoinOperator::Identity(); }

inline CoinOperator sigma1() {
  CoinOperator m;
  m << 0, 1, 1, 0;
  return m;
}

inline CoinOperator sigma2() {
  CoinOperator m;
  m << 0, -kI, kI, 0;
  return m;
}

inline CoinOperator sigma3() {
  CoinOperator m;
  m << 1, 0, 0, -1;
  return m;
}

/// sigma_0 = I, sigma_1..3 the Pauli matrices.
inline const std::array<CoinOperator, 4>& basis() {
  static const std::array<CoinOperator, 4> b{identity(), sigma1(), sigma2(), sigma3()};
  return b;
}

}  // namespace pauli

/// |i><j| in the (R, L) basis.
inline CoinOperator dyad(Coin i, Coin j) {
  CoinOperator m = CoinOperator::Zero();
  m(index_of(i), index_of(j)) = 1.0;
  return m;
}

inline CoinOperator hadamard() {
  CoinOperator m;
  m << 1, 1, 1, -1;
  return m * (std::numbers::sqrt2 / 2.0);
}

class PauliVector {
 public:
  PauliVector() : r_(Eigen::Vector4cd::Zero()) {}
  PauliVector(Complex r0, Complex r1, Complex r2, Complex r3) { r_ << r0, r1, r2, r3; }
  explicit PauliVector(const Eigen::Vector4cd& r) : r_(r) {}

  Complex operator[](std::size_t i) const { return r_(static_cast<Eigen::Index>(i)); }
  Complex& operator[](std::size_t i) { return r_(static_cast<Eigen::Index>(i)); }

  const Eigen::Vector4cd& coeffs() const { return r_; }

  /// Real coefficients with r0 = 1/2 and |r_bloch| <= 1/2: a valid coin density.
  bool is_density(double tol = 1e-12) const {
    for (int i = 0; i < 4; ++i) {
      if (std::abs(r_(i).imag()) > tol) return false;
    }
    if (std::abs(r_(0).real() - 0.5) > tol) return false;
    const double bloch2 = std::norm(r_(1)) + std::norm(r_(2)) + std::norm(r_(3));
    return bloch2 <= 0.25 + tol;
  }

  friend bool operator==(const PauliVector& a, const PauliVector& b) { return a.r_ == b.r_; }

 private:
  Eigen::Vector4cd r_;
};

inline PauliVector to_pauli(const CoinOperator& op) {
  const auto& b = pauli::basis();
  Eigen::Vector4cd r;
  for (int i = 0; i < 4; ++i) r(i) = 0.5 * (b[static_cast<std::size_t>(i)] * op).trace();
  return PauliVector(r);
}

inline CoinOperator from_pauli(const PauliVector& v) {
  const auto& b = pauli::basis();
  CoinOperator m = CoinOperator::Zero();
  for (std::size_t i = 0; i < 4; ++i) m += v[i] * b[i];
  return m;
}

/// Tr I = 2 and Tr s_i = 0.
inline Complex trace_of(const PauliVector& v) { return 2.0 * v[0]; }

class AffineSuperoperator {
 public:
  AffineSuperoperator() : m_(Eigen::Matrix4cd::Zero()) {}
  explicit AffineSuperoperator(const Eigen::Matrix4cd& m) : m_(m) {}

  static AffineSuperoperator identity() { return AffineSuperoperator(Eigen::Matrix4cd::Identity()); }

  const Eigen::Matrix4cd& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

  /// Entrywise conjugate. For maps of the form X -> sum A X B^dag this is
  /// the matrix of X -> (M X^dag)^dag, because the Pauli basis is Hermitian.
  AffineSuperoperator conjugate() const { return AffineSuperoperator(m_.conjugate()); }

  AffineSuperoperator operator-() const { return AffineSuperoperator(-m_); }

  friend AffineSuperoperator operator+(const AffineSuperoperator& a, const AffineSuperoperator& b) {
    return AffineSuperoperator(a.m_ + b.m_);
  }
  friend AffineSuperoperator operator-(const AffineSuperoperator& a, const AffineSuperoperator& b) {
    return AffineSuperoperator(a.m_ - b.m_);
  }

 private:
  Eigen::Matrix4cd m_;
};

inline PauliVector apply(const AffineSuperoperator& s, const PauliVector& v) {
  return PauliVector(s.matrix() * v.coeffs());
}

/// compose(a, b) acts as a after b.
inline AffineSuperoperator compose(const AffineSuperoperator& a, const AffineSuperoperator& b) {
  return AffineSuperoperator(a.matrix() * b.matrix());
}

inline AffineSuperoperator power(const AffineSuperoperator& a, unsigned n) {
  Eigen::Matrix4cd result = Eigen::Matrix4cd::Identity();
  Eigen::Matrix4cd base = a.matrix();
  while (n > 0) {
    if (n & 1u) result = result * base;
    base = base * base;
    n >>= 1u;
  }
  return AffineSuperoperator(result);
}

/// Matrix of X -> sum_n left[n] X right[n]^dag, built column by column
/// from the images of the four basis operators.
template <typename LeftRange, typename RightRange>
AffineSuperoperator sandwich_superoperator(const LeftRange& left, const RightRange& right) {
  const auto& b = pauli::basis();
  Eigen::Matrix4cd m;
  for (std::size_t col = 0; col < 4; ++col) {
    CoinOperator image = CoinOperator::Zero();
    auto r = std::begin(right);
    for (auto l = std::begin(left); l != std::end(left); ++l, ++r) {
      image.noalias() += (*l) * b[col] * r->adjoint();
    }
    m.col(static_cast<Eigen::Index>(col)) = to_pauli(image).coeffs();
  }
  return AffineSuperoperator(m);
}

/// X -> A X.
inline AffineSuperoperator left_multiplication(const CoinOperator& a) {
  const std::array<CoinOperator, 1> l{a};
  const std::array<CoinOperator, 1> r{CoinOperator::Identity()};
  return sandwich_superoperator(l, r);
}

/// X -> X B.
inline AffineSuperoperator right_multiplication(const CoinOperator& b) {
  const std::array<CoinOperator, 1> l{CoinOperator::Identity()};
  const std::array<CoinOperator, 1> r{b.adjoint()};
  return sandwich_superoperator(l, r);
}

inline double max_abs_diff(const CoinOperator& a, const CoinOperator& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace dqwalk
