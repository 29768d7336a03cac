#include "lpinfer/mst.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/lp.hpp"
#include "lpinfer/rng.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <sstream>

namespace lpinfer {

namespace {

std::vector<double> split_numbers(const std::string& s, char sep) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size()) throw std::invalid_argument("expected a number, got '" + item + "'");
    out.push_back(v);
  }
  return out;
}

}  // namespace

void MtrParams::validate() const {
  if (!(0.0 <= p0 && p0 < p1 && p1 <= 1.0)) throw std::invalid_argument("MtrParams: need 0 <= p0 < p1 <= 1");
  if (!(pz1 > 0.0 && pz1 < 1.0)) throw std::invalid_argument("MtrParams: P(Z=1) must lie in (0, 1)");
  if (beta > 1e-12 || beta + 2.0 * gamma > 1e-12) throw std::invalid_argument("MtrParams: m1 must be nonincreasing");
  if (m1(0.0) > 1.0 + 1e-12 || m1(1.0) < -1e-12) throw std::invalid_argument("MtrParams: m1 must map into [0, 1]");
}

double MtrParams::moment(int z) const {
  const double p = z == 0 ? p0 : p1;
  return p * alpha + p * p / 2.0 * beta + p * p * p / 3.0 * gamma;
}

MtrParams MtrParams::dgp_a() { return {}; }

MtrParams MtrParams::dgp_b() {
  MtrParams m;
  m.alpha = 0.9;
  m.beta = -1.0;
  m.gamma = 1.0 / 3.0;
  return m;
}

MtrParams MtrParams::parse(const std::string& spec) {
  if (spec == "a") return dgp_a();
  if (spec == "b") return dgp_b();
  if (spec.rfind("custom:", 0) == 0) {
    const auto v = split_numbers(spec.substr(7), ',');
    if (v.size() != 3 && v.size() != 6) {
      throw std::invalid_argument("dgp: custom:alpha,beta,gamma[,p0,p1,pz1]");
    }
    MtrParams m;
    m.alpha = v[0];
    m.beta = v[1];
    m.gamma = v[2];
    if (v.size() == 6) {
      m.p0 = v[3];
      m.p1 = v[4];
      m.pz1 = v[5];
    }
    m.validate();
    return m;
  }
  throw std::invalid_argument("dgp: expected a, b or custom:..., got '" + spec + "'");
}

ExperimentSample simulate_dupas(const MtrParams& params, Index n, std::uint64_t seed) {
  params.validate();
  if (n < 1) throw std::invalid_argument("simulate_dupas: n must be positive");
  ExperimentSample s;
  s.rows.resize(n, 3);
  Stream rng(seed, 0);
  for (Index i = 0; i < n; ++i) {
    const int z = rng.uniform() < params.pz1 ? 1 : 0;
    const double u = rng.uniform();
    const double w = rng.uniform();
    const int d = u <= (z == 1 ? params.p1 : params.p0) ? 1 : 0;
    const int y = d == 1 && w <= params.m1(u) ? 1 : 0;
    s.rows(i, 0) = z;
    s.rows(i, 1) = d;
    s.rows(i, 2) = y;
  }
  return s;
}

void mst_rows(double p0, double p1, double e0, double e1, double theta, Matrix& a, Vector& b) {
  a.resize(10, 3);
  b.resize(10);
  const auto prow = [](double p) {
    Eigen::RowVector3d r;
    r << p, p * p / 2.0, p * p * p / 3.0;
    return r;
  };
  a.row(0) = prow(p0);
  a.row(1) = -prow(p0);
  a.row(2) = prow(p1);
  a.row(3) = -prow(p1);
  a.row(4) << 1.0, 0.5, 1.0 / 3.0;
  a.row(5) << -1.0, -0.5, -1.0 / 3.0;
  a.row(6) << -1.0, 0.0, 0.0;
  a.row(7) << 1.0, 1.0, 1.0;
  a.row(8) << 0.0, -1.0, 0.0;
  a.row(9) << 0.0, -1.0, -2.0;
  b << e0, -e0, e1, -e1, theta, -theta, -1.0, 0.0, 0.0, 0.0;
}

std::pair<Matrix, Vector> mst_population_system(const MtrParams& params, double theta) {
  Matrix a;
  Vector b;
  mst_rows(params.p0, params.p1, params.moment(0), params.moment(1), theta, a, b);
  return {a, b};
}

Matrix MstBuilder::features(const Matrix& raw) const {
  if (raw.cols() != 3) throw std::invalid_argument("MstBuilder: expected columns Z, D, Y");
  Matrix f(raw.rows(), 6);
  for (Index i = 0; i < raw.rows(); ++i) {
    const double z = raw(i, 0), d = raw(i, 1), y = raw(i, 2);
    if ((z != 0.0 && z != 1.0) || (d != 0.0 && d != 1.0) || (y != 0.0 && y != 1.0)) {
      throw std::invalid_argument("MstBuilder: Z, D and Y must be binary");
    }
    const double z0 = 1.0 - z;
    f.row(i) << z0, d * z0, y * d * z0, z, d * z, y * d * z;
  }
  return f;
}

void MstBuilder::evaluate(const Vector& m, Matrix& a, Vector& b) const {
  if (!(m[0] > 0.0) || !(m[3] > 0.0)) throw EmptyCell("MstBuilder: an instrument arm has no observations");
  mst_rows(m[1] / m[0], m[4] / m[3], m[2] / m[0], m[5] / m[3], theta_, a, b);
}

EntryMask MstBuilder::estimated_entries() const {
  EntryMask e = EntryMask::Constant(10, 4, false);
  e.topRows(4).setConstant(true);
  return e;
}

EstimatedSystem with_theta(EstimatedSystem system, double theta) {
  system.b_hat[4] = theta;
  system.b_hat[5] = -theta;
  return system;
}

EstimatedSystem mst_system(const ExperimentSample& sample, double theta) {
  return estimate_system(sample.rows, MstBuilder(theta));
}

IdentifiedSet identified_set_oracle(const MtrParams& params) {
  params.validate();
  const auto [a, b] = mst_population_system(params, 0.0);
  Matrix ai(8, 3);
  Vector bi(8);
  const Index keep[] = {0, 1, 2, 3, 6, 7, 8, 9};
  for (Index k = 0; k < 8; ++k) {
    ai.row(k) = -a.row(keep[k]);
    bi[k] = -b[keep[k]];
  }
  const Vector ate = a.row(4).transpose();
  const Polytope feas(Matrix(0, 3), Vector(0), ai, bi);
  const Support hi = support_max(feas, ate);
  const Support lo = support_max(feas, -ate);
  if (!hi.finite() || !lo.finite()) throw std::invalid_argument("identified_set_oracle: constraints infeasible");
  return {-lo.value, hi.value};
}

std::vector<PowerRow> power_curve(const MtrParams& params, Index n, Index reps, const std::vector<double>& grid,
                                  const PowerConfig& cfg) {
  params.validate();
  if (reps < 1) throw std::invalid_argument("power_curve: reps must be positive");
  if (grid.empty()) throw std::invalid_argument("power_curve: empty grid");
  const auto g = static_cast<Index>(grid.size());
  Matrix stat(reps, g), crit(reps, g);
  Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> rej(reps, g);
  TestConfig tc;
  tc.alpha = cfg.alpha;
  tc.kappa = cfg.kappa;
  tc.tau = cfg.tau;
  tc.exec = Execution::Serial;
  for_each_index(reps, cfg.exec, [&](Index r) {
    const auto rr = static_cast<std::uint64_t>(r);
    const ExperimentSample sample = simulate_dupas(params, n, derive_seed(cfg.seed, 2 * rr));
    const MstBuilder builder(grid.front());
    const EstimatedSystem base = estimate_system(sample.rows, builder);
    const BootstrapDraws draws =
        bootstrap_system_root(sample.rows, builder, base, cfg.boot, derive_seed(cfg.seed, 2 * rr + 1), Execution::Serial);
    for (Index k = 0; k < g; ++k) {
      const TestOutcome out = test_linear_system_unknown(with_theta(base, grid[static_cast<std::size_t>(k)]), draws, tc);
      stat(r, k) = out.scaled;
      crit(r, k) = out.critical_value;
      rej(r, k) = out.reject;
    }
  });
  std::vector<PowerRow> rows;
  for (Index k = 0; k < g; ++k) {
    PowerRow row;
    row.theta = grid[static_cast<std::size_t>(k)];
    Index hits = 0, ran = 0;
    double s = 0.0, c = 0.0;
    for (Index r = 0; r < reps; ++r) {
      hits += rej(r, k);
      s += stat(r, k);
      if (!std::isnan(crit(r, k))) {
        c += crit(r, k);
        ++ran;
      }
    }
    row.reject_rate = static_cast<double>(hits) / static_cast<double>(reps);
    row.mean_statistic = s / static_cast<double>(reps);
    row.mean_critical_value = ran > 0 ? c / static_cast<double>(ran) : std::nan("");
    rows.push_back(row);
  }
  return rows;
}

std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw std::invalid_argument("grid: need lo <= hi and step > 0");
  }
  std::vector<double> out;
  const auto count = static_cast<long long>(std::floor((hi - lo) / step + 1e-9));
  if (count > 1000000) throw std::invalid_argument("grid: too many points");
  for (long long k = 0; k <= count; ++k) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", lo + static_cast<double>(k) * step);
    out.push_back(std::strtod(buf, nullptr));
  }
  return out;
}

std::vector<double> parse_grid(const std::string& spec) {
  const auto v = split_numbers(spec, ':');
  if (v.size() != 3) throw std::invalid_argument("grid: expected lo:hi:step");
  return make_grid(v[0], v[1], v[2]);
}

}  // namespace lpinfer
