#pragma once

#include "lpinfer/moments.hpp"
#include "lpinfer/parallel.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lpinfer {

/// Slack sequence kappa_n.
struct Kappa {
  enum class Rule { SqrtLog, Log, Fixed };
  Rule rule = Rule::SqrtLog;
  double fixed = 0.0;

  double value(Index n) const;
  std::string describe() const;
  /// "sqrt-log", "log" or "fixed:<x>"; throws std::invalid_argument otherwise.
  static Kappa parse(const std::string& spec);
};

struct TestConfig {
  double alpha = 0.05;
  Kappa kappa;  ///< used for every kappa of a test
  double tau = 0.0;  ///< reject iff sqrt(n) T > c + tau
  Execution exec = Execution::Parallel;
};

struct EtaSolution {
  Vector eta_hat;
  std::vector<Index> qp_active_set;
  double objective = 0.0;  ///< ||eta_hat||^2
  double kkt_residual = 0.0;
};

struct TestOutcome {
  std::string family;
  double statistic = 0.0;  ///< T-hat; +inf when the deterministic components alone reject
  bool infinite = false;
  double scaled = 0.0;  ///< sqrt(n) T-hat
  std::vector<double> boot_values;
  double critical_value = 0.0;  ///< NaN when the bootstrap was skipped
  bool reject = false;
  double alpha = 0.05;
  double tau = 0.0;
  std::vector<double> kappas;
  Index n = 0;
  Index empty_draws = 0;  ///< draws with an empty near-optimal set (value -inf)
  std::optional<EtaSolution> eta;
};

/// inf{u : H(u) >= 1 - alpha}; alpha in (0, 1/2).
double critical_value(const std::vector<double>& boot_values, double alpha);

/// max{lambda'b : lambda >= 0, ||D lambda||_1 <= 1}; all components estimated.
TestOutcome test_moment_ineq(const MomentModel& model, const BootstrapDraws& draws, const TestConfig& cfg);

/// Adds A'lambda = 0 for a known p x d matrix A; Known components allowed.
TestOutcome test_nuisance_linear(const MomentModel& model, const Matrix& a, const BootstrapDraws& draws,
                                 const TestConfig& cfg);

/// lambda free in sign with A'lambda <= 0 (null: b = A x for some x >= 0).
TestOutcome test_linear_system_known(const MomentModel& model, const Matrix& a, const BootstrapDraws& draws,
                                     const TestConfig& cfg);

/// argmin ||eta||^2 s.t. b - A eta <= (T + kappa3 / sqrt(n)) omega.
EtaSolution solve_eta_qp(const EstimatedSystem& system, double t_hat, double kappa3);

/// Null: b - A eta <= 0 for some eta, with A and b estimated.
TestOutcome test_linear_system_unknown(const EstimatedSystem& system, const BootstrapDraws& draws,
                                       const TestConfig& cfg);

enum class TestFamily { MomentInequality, Nuisance, SystemKnown, SystemUnknown };

std::string to_string(TestFamily f);

/// Population quantities for the limit law of the bootstrap statistic.
struct PopulationInputs {
  TestFamily family = TestFamily::MomentInequality;
  Vector b;
  Matrix a;      ///< p x d; unused for MomentInequality
  Vector scale;  ///< diagonal of D (or Omega for SystemUnknown)
  /// Covariance of zeta on `slots`: components of b, or entries of vec([A b]) for SystemUnknown.
  Matrix sigma;
  std::vector<Index> slots;
};

/// M draws of max over the population optimal face of <zeta, lambda> (or
/// <zeta_b - zeta_A eta*, lambda>), zeta ~ N(0, sigma), computed on the vertices
/// of the face.
std::vector<double> limit_distribution_oracle(const PopulationInputs& pop, Index M, std::uint64_t seed);

}  // namespace lpinfer
