#pragma once

#include "lpinfer/parallel.hpp"
#include "lpinfer/types.hpp"

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace lpinfer {

inline constexpr double kKnownThreshold = 1e-12;

struct MomentModel {
  Vector b_hat;
  Matrix sigma_hat;
  Vector d_hat;  ///< diagonal of D-hat: sqrt(diag(sigma_hat)), 0 on Known components
  ComponentMask mask;
  Index n = 0;

  Index dim() const { return b_hat.size(); }
  std::vector<Index> estimated() const;
};

/// Known iff d_hat[i] <= threshold, unless an override mask is given.
ComponentMask classify_components(const Vector& d_hat, double threshold = kKnownThreshold,
                                  const std::optional<ComponentMask>& override_mask = std::nullopt);

/// Column means and 1/n covariance of an n x p matrix of per-observation moments.
/// Throws DegenerateSample when n < 2.
MomentModel estimate_moments(const Matrix& obs, const std::optional<ComponentMask>& mask = std::nullopt,
                             double threshold = kKnownThreshold);

/// B bootstrap roots restricted to a subset of coordinates ("slots") of a
/// full_dim-dimensional parameter vector.
struct BootstrapDraws {
  Index full_dim = 0;
  std::vector<Index> slots;
  Matrix draws;  ///< B x slots.size()
  std::uint64_t seed = 0;
  std::string scheme;
  std::size_t redraws = 0;  ///< resamples rejected by the builder and redrawn

  Index count() const { return draws.rows(); }
  /// Replicate r scattered into a zero vector of length full_dim.
  Vector full(Index r) const;
};

/// Nonparametric bootstrap: row r of the result is sqrt(n) (mean* - b_hat) over
/// the Estimated components, the resample being n uniform row indices drawn
/// from Stream(seed, r).
BootstrapDraws bootstrap_root(const Matrix& obs, Index B, std::uint64_t seed,
                              const ComponentMask& mask, Execution exec = Execution::Parallel);
BootstrapDraws bootstrap_root(const Matrix& obs, Index B, std::uint64_t seed,
                              Execution exec = Execution::Parallel);

/// p x (d+1) flags; column d refers to b.
using EntryMask = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Column-major position of entry (i, j) of [A b] in vec([A b]).
inline Index vec_index(Index p, Index i, Index j) { return j * p + i; }

/// Plug-in estimator of a linear system (A, b) that is a smooth function of
/// feature means.
class SystemBuilder {
 public:
  virtual ~SystemBuilder() = default;
  virtual Index rows() const = 0;
  virtual Index cols() const = 0;
  /// Per-observation features; one row per observation.
  virtual Matrix features(const Matrix& raw) const = 0;
  /// (A, b) at the given feature means. Throws BuilderFailure when undefined.
  virtual void evaluate(const Vector& means, Matrix& a, Vector& b) const = 0;
  virtual EntryMask estimated_entries() const = 0;

  /// Sorted vec indices of the estimated entries.
  std::vector<Index> estimated_slots() const;
};

/// A, b fixed except for estimated entries, each the mean of its own raw column
/// (raw columns in estimated_slots() order).
class MeanBuilder final : public SystemBuilder {
 public:
  MeanBuilder(Matrix a_known, Vector b_known, EntryMask estimated);

  Index rows() const override { return a_.rows(); }
  Index cols() const override { return a_.cols(); }
  Matrix features(const Matrix& raw) const override;
  void evaluate(const Vector& means, Matrix& a, Vector& b) const override;
  EntryMask estimated_entries() const override { return mask_; }

 private:
  Matrix a_;
  Vector b_;
  EntryMask mask_;
  std::vector<Index> slots_;
};

struct EstimatedSystem {
  Matrix a_hat;
  Vector b_hat;
  std::vector<Index> slots;  ///< estimated entries of vec([A b])
  Matrix cov;                ///< delta-method covariance of the estimated entries
  Vector omega;              ///< diagonal of Omega-hat
  Index n = 0;

  Index rows() const { return a_hat.rows(); }
  Index cols() const { return a_hat.cols(); }
  Vector entry_sd() const { return cov.diagonal().cwiseMax(0.0).cwiseSqrt(); }
};

/// omega_i = max of the standard deviations of the estimated entries in row i
/// of [A b]; 0 for fully deterministic rows.
Vector omega_rule(Index p, const std::vector<Index>& slots, const Vector& sd);

/// Point estimates, delta-method covariance (central differences) and Omega-hat.
EstimatedSystem estimate_system(const Matrix& raw, const SystemBuilder& builder);

/// Pairs bootstrap over observation rows: sqrt(n) (vec([A* b*]) - vec([A b])) on
/// the estimated entries. A resample rejected by the builder is redrawn from the
/// same stream, at most max_redraws times per replicate.
BootstrapDraws bootstrap_system_root(const Matrix& raw, const SystemBuilder& builder,
                                     const EstimatedSystem& est, Index B, std::uint64_t seed,
                                     Execution exec = Execution::Parallel, int max_redraws = 100);

/// Splits a full vec([A b]) draw into its A and b parts.
void split_system_draw(const Vector& full, Index p, Index d, Matrix& za, Vector& zb);

}  // namespace lpinfer
