#pragma once

// Long-time diffusion of the Hadamard walk under broken-line noise:
//
//   D(p) = (1-p)/p K(p),   K(p) = 1/2 (1 - (1-p) I(1-p)),
//   I(x) = Int_{-pi}^{pi} dk/2pi (cos k + x) / (x cos^2 k + x cos k + 2x^2 - 2x + 1).
//
// D = 1/2 is the unbiased classical walk; critical_p locates that crossing.

#include "dqwalk/csv.hpp"
#include "dqwalk/error.hpp"
#include "dqwalk/parallel.hpp"

#include <cmath>
#include <numbers>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace dqwalk {

namespace detail {

inline double broken_line_integrand(double k, double x) {
  const double c = std::cos(k);
  const double den = x * c * c + x * c + 2.0 * x * x - 2.0 * x + 1.0;
  if (!(den > 1e-14)) {
    std::ostringstream msg;
    msg << "denominator " << den << " at k = " << k << ", x = " << x;
    throw Error(ErrorKind::SingularDenominator, msg.str());
  }
  return (c + x) / den;
}

/// Periodic trapezoid mean over n nodes on [-pi, pi).
template <typename F>
double periodic_mean(F&& f, int n) {
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += f(-std::numbers::pi + 2.0 * std::numbers::pi * j / n);
  return acc / n;
}

}  // namespace detail

/// Node doubling until successive trapezoid estimates differ by <= 1e-12.
/// The integrand is smooth and periodic, so convergence is geometric.
inline double integral_I(double x) {
  if (!(x > 0.0 && x <= 1.0)) {
    throw Error(ErrorKind::DomainError, "I(x) requires x in (0, 1], got " + std::to_string(x));
  }
  auto f = [x](double k) { return detail::broken_line_integrand(k, x); };
  int n = 16;
  double prev = detail::periodic_mean(f, n);
  for (int iter = 0; iter < 24; ++iter) {
    n *= 2;
    const double next = detail::periodic_mean(f, n);
    if (std::abs(next - prev) <= 1e-12) return next;
    prev = next;
  }
  return prev;
}

inline double K_of_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::DomainError, "K(p) requires p in [0, 1], got " + std::to_string(p));
  }
  if (p == 1.0) return 0.5;  // (1-p) I(1-p) -> 0
  return 0.5 * (1.0 - (1.0 - p) * integral_I(1.0 - p));
}

enum class DiffusionMethod { ClosedForm, Slope };

inline std::string to_string(DiffusionMethod m) { return m == DiffusionMethod::ClosedForm ? "closed-form" : "slope"; }

struct DiffusionResult {
  double p = 0.0;
  double D = 0.0;
  double K = 0.0;
  /// I(1-p); 0 at p = 1 by the limit.
  double I_val = 0.0;
  DiffusionMethod method = DiffusionMethod::ClosedForm;
};

inline DiffusionResult diffusion_closed_form(double p) {
  if (p == 0.0) {
    throw Error(ErrorKind::BallisticRegime, "p = 0 is the coherent walk: variance grows as t^2, D is undefined");
  }
  if (!(p > 0.0 && p <= 1.0)) {
    throw Error(ErrorKind::DomainError, "D(p) requires p in (0, 1], got " + std::to_string(p));
  }
  DiffusionResult r;
  r.p = p;
  r.I_val = p == 1.0 ? 0.0 : integral_I(1.0 - p);
  r.K = p == 1.0 ? 0.5 : 0.5 * (1.0 - (1.0 - p) * r.I_val);
  r.D = (1.0 - p) / p * r.K;
  return r;
}

/// Root of D(p) = 1/2 on (0, 1) by bisection. D decreases monotonically
/// there; every bisection step checks the bracket stays valid.
inline double critical_p(double tol = 1e-12) {
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tol must be positive");
  auto f = [](double p) { return diffusion_closed_form(p).D - 0.5; };
  double lo = 0.05, hi = 0.95;
  double f_lo = f(lo), f_hi = f(hi);
  if (!(f_lo > 0.0 && f_hi < 0.0)) {
    throw Error(ErrorKind::BracketingFailed, "D(p) - 1/2 does not change sign on [0.05, 0.95]");
  }
  while (hi - lo > tol) {
    const double mid = 0.5 * (lo + hi);
    const double f_mid = f(mid);
    if (!(f_mid <= f_lo && f_mid >= f_hi)) {
      throw Error(ErrorKind::BracketingFailed, "D(p) is not monotone on the bracket");
    }
    if (f_mid > 0.0) {
      lo = mid;
      f_lo = f_mid;
    } else {
      hi = mid;
      f_hi = f_mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// Closed-form results in input order; the first failing p propagates.
inline std::vector<DiffusionResult> sweep(const std::vector<double>& p_values, unsigned threads = 1) {
  std::vector<DiffusionResult> out(p_values.size());
  parallel_for(p_values.size(), threads, [&](std::size_t i) { out[i] = diffusion_closed_form(p_values[i]); });
  return out;
}

inline void write_sweep_csv_header(std::ostream& os, bool with_slope) {
  os << "p,K,D,I,method" << (with_slope ? ",D_slope" : "") << '\n';
}

inline void write_sweep_csv_row(std::ostream& os, const DiffusionResult& r) {
  os << format_double(r.p) << ',' << format_double(r.K) << ',' << format_double(r.D) << ','
     << format_double(r.I_val) << ',' << to_string(r.method);
}

}  // namespace dqwalk
