#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dqwalk {

enum class ErrorKind {
  NonUnitaryCoin,
  PhaseConstraintViolated,
  InvalidCoinKrausSet,
  CompletenessViolated,
  InvalidChannelFile,
  UnnormalizedCoin,
  InvalidCoinState,
  NotACoinChannel,
  NotContracting,
  UnboundedDrift,
  BallisticRegime,
  DomainError,
  SingularDenominator,
  BracketingFailed,
  ImaginaryResidue,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonUnitaryCoin: return "NonUnitaryCoin";
    case ErrorKind::PhaseConstraintViolated: return "PhaseConstraintViolated";
    case ErrorKind::InvalidCoinKrausSet: return "InvalidCoinKrausSet";
    case ErrorKind::CompletenessViolated: return "CompletenessViolated";
    case ErrorKind::InvalidChannelFile: return "InvalidChannelFile";
    case ErrorKind::UnnormalizedCoin: return "UnnormalizedCoin";
    case ErrorKind::InvalidCoinState: return "InvalidCoinState";
    case ErrorKind::NotACoinChannel: return "NotACoinChannel";
    case ErrorKind::NotContracting: return "NotContracting";
    case ErrorKind::UnboundedDrift: return "UnboundedDrift";
    case ErrorKind::BallisticRegime: return "BallisticRegime";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::SingularDenominator: return "SingularDenominator";
    case ErrorKind::BracketingFailed: return "BracketingFailed";
    case ErrorKind::ImaginaryResidue: return "ImaginaryResidue";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Regime errors: the requested limit does not exist for this channel
/// (coherent/ballistic or non-contracting dynamics), as opposed to bad input.
constexpr bool is_regime_error(ErrorKind kind) {
  return kind == ErrorKind::NotContracting || kind == ErrorKind::UnboundedDrift ||
         kind == ErrorKind::BallisticRegime;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Completeness failure with the location of the worst residual.
class CompletenessError : public Error {
 public:
  CompletenessError(ErrorKind kind, double worst_k, double residual, const std::string& message)
      : Error(kind, message), worst_k_(worst_k), residual_(residual) {}

  double worst_k() const noexcept { return worst_k_; }
  double residual() const noexcept { return residual_; }

 private:
  double worst_k_;
  double residual_;
};

/// Spectral radius of the Bloch block reached 1 at some quadrature node.
class NotContractingError : public Error {
 public:
  NotContractingError(double k, double max_modulus, const std::string& message)
      : Error(ErrorKind::NotContracting, message), k_(k), max_modulus_(max_modulus) {}

  double k() const noexcept { return k_; }
  double max_modulus() const noexcept { return max_modulus_; }

 private:
  double k_;
  double max_modulus_;
};

}  // namespace dqwalk
