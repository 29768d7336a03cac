#include "lpinfer/moments.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace lpinfer {

namespace {

// Means computed as x_0 + mean(x - x_0): exact for constant columns.
Vector stable_means(const Matrix& x) {
  const Vector base = x.row(0).transpose();
  return base + (x.rowwise() - base.transpose()).colwise().mean().transpose();
}

Matrix centred(const Matrix& x, const Vector& mean) { return x.rowwise() - mean.transpose(); }

// Unique rows of x with per-observation group ids.
struct Groups {
  Matrix rows;               // unique rows, centred
  std::vector<Index> group;  // observation -> unique row
};

Groups group_rows(const Matrix& dev) {
  const Index n = dev.rows();
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  auto less = [&](Index a, Index b) {
    for (Index j = 0; j < dev.cols(); ++j) {
      if (dev(a, j) != dev(b, j)) return dev(a, j) < dev(b, j);
    }
    return a < b;
  };
  std::sort(order.begin(), order.end(), less);
  Groups g;
  g.group.assign(static_cast<std::size_t>(n), 0);
  std::vector<Index> reps;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const Index i = order[k];
    if (k == 0 || (dev.row(i).array() != dev.row(reps.back()).array()).any()) reps.push_back(i);
    g.group[static_cast<std::size_t>(i)] = static_cast<Index>(reps.size() - 1);
  }
  g.rows.resize(static_cast<Index>(reps.size()), dev.cols());
  for (std::size_t k = 0; k < reps.size(); ++k) g.rows.row(static_cast<Index>(k)) = dev.row(reps[k]);
  return g;
}

// Resampled mean deviation: (1/n) sum over n draws of the drawn centred rows.
Vector resample_deviation(const Groups& g, Stream& s, std::vector<Index>& counts) {
  const auto n = static_cast<Index>(g.group.size());
  std::fill(counts.begin(), counts.end(), 0);
  for (Index k = 0; k < n; ++k) ++counts[static_cast<std::size_t>(g.group[static_cast<std::size_t>(s.index(n))])];
  Vector acc = Vector::Zero(g.rows.cols());
  for (Index u = 0; u < g.rows.rows(); ++u) {
    const Index c = counts[static_cast<std::size_t>(u)];
    if (c != 0) acc += static_cast<double>(c) * g.rows.row(u).transpose();
  }
  return acc / static_cast<double>(n);
}

Vector gather(const Matrix& a, const Vector& b, const std::vector<Index>& slots) {
  const Index p = a.rows();
  const Index d = a.cols();
  Vector out(static_cast<Index>(slots.size()));
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Index j = slots[k] / p;
    const Index i = slots[k] % p;
    out[static_cast<Index>(k)] = j == d ? b[i] : a(i, j);
  }
  return out;
}

}  // namespace

std::vector<Index> MomentModel::estimated() const {
  std::vector<Index> out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] == Component::Estimated) out.push_back(static_cast<Index>(i));
  return out;
}

ComponentMask classify_components(const Vector& d_hat, double threshold,
                                  const std::optional<ComponentMask>& override_mask) {
  if (override_mask) {
    if (static_cast<Index>(override_mask->size()) != d_hat.size()) {
      throw std::invalid_argument("classify_components: mask length mismatch");
    }
    return *override_mask;
  }
  ComponentMask m(static_cast<std::size_t>(d_hat.size()));
  for (Index i = 0; i < d_hat.size(); ++i) {
    m[static_cast<std::size_t>(i)] = d_hat[i] <= threshold ? Component::Known : Component::Estimated;
  }
  return m;
}

MomentModel estimate_moments(const Matrix& obs, const std::optional<ComponentMask>& mask, double threshold) {
  if (obs.rows() < 2) throw DegenerateSample("estimate_moments: need at least two observations");
  MomentModel m;
  m.n = obs.rows();
  m.b_hat = stable_means(obs);
  const Matrix dev = centred(obs, m.b_hat);
  m.sigma_hat = (dev.transpose() * dev) / static_cast<double>(m.n);
  m.sigma_hat = 0.5 * (m.sigma_hat + m.sigma_hat.transpose()).eval();
  m.mask = classify_components(m.sigma_hat.diagonal().cwiseMax(0.0).cwiseSqrt(), threshold, mask);
  for (std::size_t i = 0; i < m.mask.size(); ++i) {
    if (m.mask[i] != Component::Known) continue;
    m.sigma_hat.row(static_cast<Index>(i)).setZero();
    m.sigma_hat.col(static_cast<Index>(i)).setZero();
  }
  m.d_hat = m.sigma_hat.diagonal().cwiseMax(0.0).cwiseSqrt();
  return m;
}

Vector BootstrapDraws::full(Index r) const {
  Vector v = Vector::Zero(full_dim);
  for (std::size_t k = 0; k < slots.size(); ++k) v[slots[k]] = draws(r, static_cast<Index>(k));
  return v;
}

BootstrapDraws bootstrap_root(const Matrix& obs, Index B, std::uint64_t seed, const ComponentMask& mask,
                              Execution exec) {
  if (obs.rows() < 2) throw DegenerateSample("bootstrap_root: need at least two observations");
  if (B < 1) throw std::invalid_argument("bootstrap_root: B must be positive");
  if (static_cast<Index>(mask.size()) != obs.cols()) {
    throw std::invalid_argument("bootstrap_root: mask length mismatch");
  }
  BootstrapDraws out;
  out.full_dim = obs.cols();
  out.seed = seed;
  out.scheme = "pairs";
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (mask[i] == Component::Estimated) out.slots.push_back(static_cast<Index>(i));
  Matrix sub(obs.rows(), static_cast<Index>(out.slots.size()));
  for (std::size_t k = 0; k < out.slots.size(); ++k) sub.col(static_cast<Index>(k)) = obs.col(out.slots[k]);
  out.draws.resize(B, sub.cols());
  if (sub.cols() == 0) return out;
  const Groups g = group_rows(centred(sub, stable_means(sub)));
  const double root_n = std::sqrt(static_cast<double>(obs.rows()));
  for_each_index(B, exec, [&](Index r) {
    Stream s(seed, static_cast<std::uint64_t>(r));
    std::vector<Index> counts(static_cast<std::size_t>(g.rows.rows()));
    out.draws.row(r) = root_n * resample_deviation(g, s, counts).transpose();
  });
  return out;
}

BootstrapDraws bootstrap_root(const Matrix& obs, Index B, std::uint64_t seed, Execution exec) {
  return bootstrap_root(obs, B, seed, ComponentMask(static_cast<std::size_t>(obs.cols()), Component::Estimated),
                        exec);
}

std::vector<Index> SystemBuilder::estimated_slots() const {
  const EntryMask m = estimated_entries();
  std::vector<Index> out;
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i)
      if (m(i, j)) out.push_back(vec_index(m.rows(), i, j));
  return out;
}

MeanBuilder::MeanBuilder(Matrix a_known, Vector b_known, EntryMask estimated)
    : a_(std::move(a_known)), b_(std::move(b_known)), mask_(std::move(estimated)) {
  if (b_.size() != a_.rows() || mask_.rows() != a_.rows() || mask_.cols() != a_.cols() + 1) {
    throw std::invalid_argument("MeanBuilder: inconsistent shapes");
  }
  slots_ = estimated_slots();
}

Matrix MeanBuilder::features(const Matrix& raw) const {
  if (raw.cols() != static_cast<Index>(slots_.size())) {
    throw std::invalid_argument("MeanBuilder: expected one raw column per estimated entry");
  }
  return raw;
}

void MeanBuilder::evaluate(const Vector& means, Matrix& a, Vector& b) const {
  a = a_;
  b = b_;
  const Index p = a_.rows();
  for (std::size_t k = 0; k < slots_.size(); ++k) {
    const Index j = slots_[k] / p;
    const Index i = slots_[k] % p;
    (j == a_.cols() ? b[i] : a(i, j)) = means[static_cast<Index>(k)];
  }
}

Vector omega_rule(Index p, const std::vector<Index>& slots, const Vector& sd) {
  Vector omega = Vector::Zero(p);
  for (std::size_t k = 0; k < slots.size(); ++k) {
    const Index i = slots[k] % p;
    omega[i] = std::max(omega[i], sd[static_cast<Index>(k)]);
  }
  return omega;
}

EstimatedSystem estimate_system(const Matrix& raw, const SystemBuilder& builder) {
  const Matrix f = builder.features(raw);
  if (f.rows() < 2) throw DegenerateSample("estimate_system: need at least two observations");
  EstimatedSystem est;
  est.n = f.rows();
  est.slots = builder.estimated_slots();
  const Vector means = stable_means(f);
  builder.evaluate(means, est.a_hat, est.b_hat);
  if (est.a_hat.rows() != builder.rows() || est.a_hat.cols() != builder.cols()) {
    throw std::invalid_argument("estimate_system: builder returned a system of the wrong shape");
  }
  const Index k = static_cast<Index>(est.slots.size());
  Matrix jac(k, f.cols());
  Matrix a;
  Vector b;
  for (Index c = 0; c < f.cols(); ++c) {
    const double h = 1e-6 * std::max(1.0, std::abs(means[c]));
    Vector up = means, down = means;
    up[c] += h;
    down[c] -= h;
    builder.evaluate(up, a, b);
    const Vector gu = gather(a, b, est.slots);
    builder.evaluate(down, a, b);
    const Vector gd = gather(a, b, est.slots);
    jac.col(c) = (gu - gd) / (up[c] - down[c]);
  }
  const Matrix dev = centred(f, means);
  const Matrix sigma_f = (dev.transpose() * dev) / static_cast<double>(est.n);
  est.cov = jac * sigma_f * jac.transpose();
  est.cov = 0.5 * (est.cov + est.cov.transpose()).eval();
  est.omega = omega_rule(est.rows(), est.slots, est.entry_sd());
  return est;
}

BootstrapDraws bootstrap_system_root(const Matrix& raw, const SystemBuilder& builder, const EstimatedSystem& est,
                                     Index B, std::uint64_t seed, Execution exec, int max_redraws) {
  if (B < 1) throw std::invalid_argument("bootstrap_system_root: B must be positive");
  const Matrix f = builder.features(raw);
  if (f.rows() < 2) throw DegenerateSample("bootstrap_system_root: need at least two observations");
  const Index p = est.rows();
  const Index d = est.cols();
  BootstrapDraws out;
  out.full_dim = p * (d + 1);
  out.slots = est.slots;
  out.seed = seed;
  out.scheme = "pairs-system";
  out.draws.resize(B, static_cast<Index>(out.slots.size()));
  if (out.slots.empty()) {
    out.draws.setZero();
    return out;
  }
  const Vector means = stable_means(f);
  const Groups g = group_rows(centred(f, means));
  const Vector centre = gather(est.a_hat, est.b_hat, est.slots);
  const double root_n = std::sqrt(static_cast<double>(f.rows()));
  std::vector<std::size_t> redraws(static_cast<std::size_t>(B), 0);
  for_each_index(B, exec, [&](Index r) {
    Stream s(seed, static_cast<std::uint64_t>(r));
    std::vector<Index> counts(static_cast<std::size_t>(g.rows.rows()));
    Matrix a;
    Vector b;
    for (int attempt = 0;; ++attempt) {
      const Vector m = means + resample_deviation(g, s, counts);
      try {
        builder.evaluate(m, a, b);
      } catch (const BuilderFailure&) {
        if (attempt >= max_redraws) throw;
        ++redraws[static_cast<std::size_t>(r)];
        continue;
      }
      break;
    }
    out.draws.row(r) = root_n * (gather(a, b, est.slots) - centre).transpose();
  });
  for (auto c : redraws) out.redraws += c;
  return out;
}

void split_system_draw(const Vector& full, Index p, Index d, Matrix& za, Vector& zb) {
  za = Eigen::Map<const Matrix>(full.data(), p, d);
  zb = full.segment(p * d, p);
}

}  // namespace lpinfer
