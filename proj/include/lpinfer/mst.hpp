#pragma once

#include "lpinfer/moments.hpp"
#include "lpinfer/parallel.hpp"
#include "lpinfer/uniform.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace lpinfer {

/// Quadratic MTR m1(u) = alpha + beta u + gamma u^2 with binary instrument.
struct MtrParams {
  double alpha = 1.0;
  double beta = -1.0;
  double gamma = 0.5;
  double p0 = 1.0 / 3.0;
  double p1 = 2.0 / 3.0;
  double pz1 = 0.5;

  /// Throws std::invalid_argument unless 0 <= p0 < p1 <= 1, pz1 in (0,1) and
  /// m1 is a nonincreasing map [0,1] -> [0,1].
  void validate() const;
  double m1(double u) const { return alpha + beta * u + gamma * u * u; }
  double ate() const { return alpha + beta / 2.0 + gamma / 3.0; }
  /// E[Y D | Z = z].
  double moment(int z) const;

  static MtrParams dgp_a();
  static MtrParams dgp_b();
  /// "a", "b" or "custom:alpha,beta,gamma[,p0,p1,pz1]".
  static MtrParams parse(const std::string& spec);
};

struct ExperimentSample {
  Matrix rows;  ///< n x 3: Z, D, Y

  Index n() const { return rows.rows(); }
};

ExperimentSample simulate_dupas(const MtrParams& params, Index n, std::uint64_t seed);

/// The 10-row system A lambda >= b at propensities (p0, p1), moments (e0, e1)
/// and hypothesis ATE = theta; rows 0-3 data, 4-5 hypothesis, 6-9 shape.
void mst_rows(double p0, double p1, double e0, double e1, double theta, Matrix& a, Vector& b);

/// Population system of the parameters.
std::pair<Matrix, Vector> mst_population_system(const MtrParams& params, double theta);

/// Plug-in system from (Z, D, Y) rows. The inequality A lambda >= b is already
/// b - A lambda <= 0, the orientation of test_linear_system_unknown.
class MstBuilder final : public SystemBuilder {
 public:
  explicit MstBuilder(double theta) : theta_(theta) {}

  Index rows() const override { return 10; }
  Index cols() const override { return 3; }
  /// 1{Z=0}, D 1{Z=0}, Y D 1{Z=0}, 1{Z=1}, D 1{Z=1}, Y D 1{Z=1}.
  Matrix features(const Matrix& raw) const override;
  /// Throws EmptyCell when an instrument arm is empty.
  void evaluate(const Vector& means, Matrix& a, Vector& b) const override;
  EntryMask estimated_entries() const override;

 private:
  double theta_;
};

/// Same estimates for another hypothesis: theta enters only the deterministic rows 4-5.
EstimatedSystem with_theta(EstimatedSystem system, double theta);

/// Estimated system at hypothesis theta.
EstimatedSystem mst_system(const ExperimentSample& sample, double theta);

struct IdentifiedSet {
  double lower = 0.0;
  double upper = 0.0;
};

/// min / max of the ATE over the data and shape rows at population moments.
IdentifiedSet identified_set_oracle(const MtrParams& params);

struct PowerConfig {
  double alpha = 0.05;
  Index boot = 999;
  Kappa kappa;
  double tau = 0.0;
  std::uint64_t seed = 0;
  Execution exec = Execution::Parallel;
};

struct PowerRow {
  double theta = 0.0;
  double reject_rate = 0.0;
  double mean_statistic = 0.0;       ///< mean sqrt(n) T-hat
  double mean_critical_value = 0.0;  ///< over replications where the bootstrap ran
};

/// Replication r draws its sample from derive_seed(seed, 2r) and its bootstrap
/// from derive_seed(seed, 2r + 1); the sample and the draws are shared by every
/// theta of the grid. Replications run in parallel.
std::vector<PowerRow> power_curve(const MtrParams& params, Index n, Index reps, const std::vector<double>& grid,
                                  const PowerConfig& cfg);

/// lo, lo + step, ... up to hi (inclusive within 1e-9 step).
std::vector<double> make_grid(double lo, double hi, double step);
/// "lo:hi:step".
std::vector<double> parse_grid(const std::string& spec);

}  // namespace lpinfer
