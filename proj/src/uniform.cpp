#include "lpinfer/uniform.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/kernels.hpp"
#include "lpinfer/lp.hpp"
#include "lpinfer/qp.hpp"
#include "lpinfer/rng.hpp"
#include "lpinfer/stats.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace lpinfer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClosedFormTol = 1e-7;

void require_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha < 0.5)) throw std::invalid_argument("alpha must lie in (0, 0.5)");
}

// {lambda >= 0, scale'lambda <= 1} in R^p, plus optional A'lambda = 0.
Polytope nonneg_l1_ball(const Vector& scale, const Matrix* a_zero) {
  const Index p = scale.size();
  Matrix ai(p + 1, p);
  ai.topRows(p) = -Matrix::Identity(p, p);
  ai.row(p) = scale.transpose();
  Vector bi = Vector::Zero(p + 1);
  bi[p] = 1.0;
  Matrix ae = a_zero ? Matrix(a_zero->transpose()) : Matrix(0, p);
  return Polytope(ae, Vector::Zero(ae.rows()), ai, bi);
}

// Split variables (lambda+, lambda-) for lambda free with A'lambda <= 0 and
// ||D lambda||_1 <= 1.
Polytope split_cone(const Vector& scale, const Matrix& a) {
  const Index p = scale.size();
  const Index d = a.cols();
  Matrix ai(2 * p + d + 1, 2 * p);
  ai.setZero();
  ai.topRows(2 * p) = -Matrix::Identity(2 * p, 2 * p);
  ai.block(2 * p, 0, d, p) = a.transpose();
  ai.block(2 * p, p, d, p) = -a.transpose();
  ai.block(2 * p + d, 0, 1, p) = scale.transpose();
  ai.block(2 * p + d, p, 1, p) = scale.transpose();
  Vector bi = Vector::Zero(2 * p + d + 1);
  bi[2 * p + d] = 1.0;
  return Polytope(Matrix(0, 2 * p), Vector(0), ai, bi);
}

Vector split_objective(const Vector& v) {
  Vector out(2 * v.size());
  out << v, -v;
  return out;
}

// {lambda >= 0, -k <= A'lambda <= k, omega'lambda <= 1}.
Polytope relaxed_system_set(const Matrix& a, const Vector& omega, double k) {
  const Index p = a.rows();
  const Index d = a.cols();
  Matrix ai(p + 2 * d + 1, p);
  ai.topRows(p) = -Matrix::Identity(p, p);
  ai.middleRows(p, d) = a.transpose();
  ai.middleRows(p + d, d) = -a.transpose();
  ai.row(p + 2 * d) = omega.transpose();
  Vector bi(p + 2 * d + 1);
  bi.head(p).setZero();
  bi.segment(p, 2 * d).setConstant(k);
  bi[p + 2 * d] = 1.0;
  return Polytope(Matrix(0, p), Vector(0), ai, bi);
}

Polytope system_set(const Matrix& a, const Vector& omega) {
  return nonneg_l1_ball(omega, &a);
}

void check_closed_form(const char* what, double lp_value, double closed) {
  if (std::isinf(lp_value) || std::isinf(closed)) {
    if (lp_value != closed) {
      throw ClosedFormMismatch(std::string(what) + ": LP value and closed form disagree on finiteness");
    }
    return;
  }
  if (std::abs(lp_value - closed) > kClosedFormTol * std::max(1.0, std::abs(lp_value))) {
    std::ostringstream os;
    os.precision(17);
    os << what << ": LP value " << lp_value << " vs closed form " << closed;
    throw ClosedFormMismatch(os.str());
  }
}

// Statistic and bootstrap over Delta-hat = feasible ∩ {obj'x >= T - kappa/sqrt(n)}.
TestOutcome run_test(std::string family, const Polytope& feasible, const Vector& obj, Index n, double kappa,
                     Index draws, const TestConfig& cfg, const std::function<Vector(Index)>& objective,
                     std::optional<double> known_t = std::nullopt) {
  require_alpha(cfg.alpha);
  TestOutcome out;
  out.family = std::move(family);
  out.alpha = cfg.alpha;
  out.tau = cfg.tau;
  out.n = n;
  const double root_n = std::sqrt(static_cast<double>(n));
  double t_hat;
  if (known_t) {
    t_hat = *known_t;
  } else {
    const Support s = support_max(feasible, obj);
    if (s.kind == Support::Kind::MinusInfinity) throw NumericalFailure(out.family + ": feasible set reported empty");
    t_hat = s.as_double();
  }
  out.statistic = t_hat;
  if (std::isinf(t_hat)) {
    out.infinite = true;
    out.scaled = kInf;
    out.critical_value = std::nan("");
    out.reject = true;
    return out;
  }
  out.scaled = root_n * t_hat;
  Polytope delta = feasible;
  delta.add_inequality(-obj, -(t_hat - kappa / root_n));
  out.boot_values = max_over_polytope(delta, draws, objective, cfg.exec);
  out.empty_draws = std::count(out.boot_values.begin(), out.boot_values.end(), -kInf);
  out.critical_value = critical_value(out.boot_values, cfg.alpha);
  out.reject = out.scaled > out.critical_value + cfg.tau;
  return out;
}

void check_draws(const BootstrapDraws& draws, Index full_dim, const char* what) {
  if (draws.full_dim != full_dim) throw std::invalid_argument(std::string(what) + ": draw dimension mismatch");
  if (draws.count() < 1) throw std::invalid_argument(std::string(what) + ": no bootstrap draws");
}

bool all_estimated(const MomentModel& m) { return count_estimated(m.mask) == m.mask.size(); }

// min t  s.t.  b - A eta <= t d (two-sided when both_sides), t >= 0, eta >= 0 when nonneg.
double dual_min_form(const Vector& b, const Matrix& a, const Vector& d, bool both_sides, bool nonneg) {
  const Index p = b.size();
  const Index k = a.cols();
  const Index rows = (both_sides ? 2 * p : p) + 1 + (nonneg ? k : 0);
  Matrix ai = Matrix::Zero(rows, k + 1);
  Vector bi = Vector::Zero(rows);
  ai.topLeftCorner(p, k) = -a;
  ai.block(0, k, p, 1) = -d;
  bi.head(p) = -b;
  Index r = p;
  if (both_sides) {
    ai.block(p, 0, p, k) = a;
    ai.block(p, k, p, 1) = -d;
    bi.segment(p, p) = b;
    r += p;
  }
  ai(r, k) = -1.0;
  ++r;
  if (nonneg) ai.block(r, 0, k, k) = -Matrix::Identity(k, k);
  Vector c = Vector::Zero(k + 1);
  c[k] = 1.0;
  const LPSolution s = solve(LinearProgram(c, Matrix(0, k + 1), Vector(0), ai, bi));
  if (s.status == LpStatus::Infeasible) return kInf;
  if (!s.optimal()) throw NumericalFailure("dual_min_form: unexpected status " + to_string(s.status));
  return s.value;
}

std::vector<Vector> face_vertices(const Polytope& feasible, const Vector& obj) {
  const Support s = support_max(feasible, obj);
  if (!s.finite()) throw std::invalid_argument("limit_distribution_oracle: population statistic is not finite");
  Polytope face = feasible;
  face.add_equality(obj, s.value);
  for (Index k = 0; k < face.dim(); ++k) {
    for (double sign : {1.0, -1.0}) {
      if (support_max(face, sign * Vector::Unit(face.dim(), k)).kind == Support::Kind::PlusInfinity) {
        throw UnboundedInner("limit_distribution_oracle: optimal face is unbounded");
      }
    }
  }
  auto verts = enumerate_vertices(face);
  if (verts.empty()) throw NumericalFailure("limit_distribution_oracle: no vertices found on the optimal face");
  return verts;
}

Vector unique_eta(const Matrix& a, const Vector& b) {
  const Polytope feas(Matrix(0, a.cols()), Vector(0), -a, -b);
  Vector eta(a.cols());
  for (Index j = 0; j < a.cols(); ++j) {
    const Support hi = support_max(feas, Vector::Unit(a.cols(), j));
    const Support lo = support_max(feas, -Vector::Unit(a.cols(), j));
    if (hi.kind == Support::Kind::MinusInfinity) throw std::invalid_argument("limit_distribution_oracle: b - A eta <= 0 infeasible");
    if (!hi.finite() || !lo.finite() || hi.value + lo.value > 1e-7 * (1.0 + std::abs(hi.value))) {
      throw NonUniqueEta("limit_distribution_oracle: b - A eta <= 0 has more than one solution");
    }
    eta[j] = 0.5 * (hi.value - lo.value);
  }
  return eta;
}

}  // namespace

double Kappa::value(Index n) const {
  const double ln = std::log(static_cast<double>(n));
  switch (rule) {
    case Rule::SqrtLog:
      return std::sqrt(ln);
    case Rule::Log:
      return ln;
    case Rule::Fixed:
      return fixed;
  }
  return fixed;
}

std::string Kappa::describe() const {
  switch (rule) {
    case Rule::SqrtLog:
      return "sqrt-log";
    case Rule::Log:
      return "log";
    case Rule::Fixed: {
      std::ostringstream os;
      os.precision(17);
      os << "fixed:" << fixed;
      return os.str();
    }
  }
  return "";
}

Kappa Kappa::parse(const std::string& spec) {
  Kappa k;
  if (spec == "sqrt-log") return k;
  if (spec == "log") {
    k.rule = Rule::Log;
    return k;
  }
  if (spec.rfind("fixed:", 0) == 0) {
    k.rule = Rule::Fixed;
    std::size_t used = 0;
    const std::string num = spec.substr(6);
    try {
      k.fixed = std::stod(num, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != num.size() || !(k.fixed > 0.0)) {
      throw std::invalid_argument("kappa: fixed value must be a positive number");
    }
    return k;
  }
  throw std::invalid_argument("kappa: expected sqrt-log, log or fixed:<x>, got '" + spec + "'");
}

double critical_value(const std::vector<double>& boot_values, double alpha) {
  require_alpha(alpha);
  return inf_quantile(boot_values, 1.0 - alpha);
}

TestOutcome test_moment_ineq(const MomentModel& model, const BootstrapDraws& draws, const TestConfig& cfg) {
  if (!all_estimated(model)) throw std::invalid_argument("test_moment_ineq: every component must be estimated");
  const Index p = model.dim();
  check_draws(draws, p, "test_moment_ineq");
  const Polytope feas = nonneg_l1_ball(model.d_hat, nullptr);
  const Support s = support_max(feas, model.b_hat);
  const double closed = std::max(0.0, model.b_hat.cwiseQuotient(model.d_hat).maxCoeff());
  check_closed_form("test_moment_ineq", s.as_double(), closed);
  const double kappa = cfg.kappa.value(model.n);
  auto out = run_test("mi", feas, model.b_hat, model.n, kappa, draws.count(), cfg,
                      [&](Index r) { return draws.full(r); }, s.as_double());
  out.kappas = {kappa};
  return out;
}

TestOutcome test_nuisance_linear(const MomentModel& model, const Matrix& a, const BootstrapDraws& draws,
                                 const TestConfig& cfg) {
  const Index p = model.dim();
  if (a.rows() != p) throw std::invalid_argument("test_nuisance_linear: A must have one row per moment");
  check_draws(draws, p, "test_nuisance_linear");
  const Polytope feas = nonneg_l1_ball(model.d_hat, &a);
  const double t = support_max(feas, model.b_hat).as_double();
  if (all_estimated(model)) {
    check_closed_form("test_nuisance_linear", t, dual_min_form(model.b_hat, a, model.d_hat, false, false));
  }
  const double kappa = cfg.kappa.value(model.n);
  auto out = run_test("nuisance", feas, model.b_hat, model.n, kappa, draws.count(), cfg,
                      [&](Index r) { return draws.full(r); }, t);
  out.kappas = {kappa};
  return out;
}

TestOutcome test_linear_system_known(const MomentModel& model, const Matrix& a, const BootstrapDraws& draws,
                                     const TestConfig& cfg) {
  const Index p = model.dim();
  if (a.rows() != p) throw std::invalid_argument("test_linear_system_known: A must have one row per moment");
  check_draws(draws, p, "test_linear_system_known");
  const Polytope feas = split_cone(model.d_hat, a);
  const Vector obj = split_objective(model.b_hat);
  const double t = support_max(feas, obj).as_double();
  if (all_estimated(model)) {
    check_closed_form("test_linear_system_known", t, dual_min_form(model.b_hat, a, model.d_hat, true, true));
  }
  const double kappa = cfg.kappa.value(model.n);
  auto out = run_test("system-known", feas, obj, model.n, kappa, draws.count(), cfg,
                      [&](Index r) { return split_objective(draws.full(r)); }, t);
  out.kappas = {kappa};
  return out;
}

EtaSolution solve_eta_qp(const EstimatedSystem& system, double t_hat, double kappa3) {
  if (!std::isfinite(t_hat)) throw std::invalid_argument("solve_eta_qp: statistic must be finite");
  const double level = t_hat + kappa3 / std::sqrt(static_cast<double>(system.n));
  // b - A eta <= level * omega  <=>  -A eta <= level * omega - b
  const Polytope feas(Matrix(0, system.cols()), Vector(0), -system.a_hat, level * system.omega - system.b_hat);
  Projection pr;
  try {
    pr = project_onto(feas, Vector::Zero(system.cols()));
  } catch (const EmptyPolyhedron&) {
    throw NumericalInfeasible("solve_eta_qp: could not certify a feasible point");
  }
  if (pr.kkt_residual > 1e-8 * (1.0 + pr.point.norm())) {
    throw NumericalFailure("solve_eta_qp: KKT residual " + std::to_string(pr.kkt_residual));
  }
  EtaSolution e;
  e.eta_hat = pr.point;
  e.qp_active_set = pr.active;
  e.objective = pr.point.squaredNorm();
  e.kkt_residual = pr.kkt_residual;
  return e;
}

TestOutcome test_linear_system_unknown(const EstimatedSystem& system, const BootstrapDraws& draws,
                                       const TestConfig& cfg) {
  const Index p = system.rows();
  const Index d = system.cols();
  check_draws(draws, p * (d + 1), "test_linear_system_unknown");
  const double kappa = cfg.kappa.value(system.n);
  const double root_n = std::sqrt(static_cast<double>(system.n));
  const Polytope feas = system_set(system.a_hat, system.omega);
  const double t = support_max(feas, system.b_hat).as_double();
  std::optional<EtaSolution> eta;
  if (std::isfinite(t)) eta = solve_eta_qp(system, t, kappa);
  const Polytope relaxed = relaxed_system_set(system.a_hat, system.omega, kappa / root_n);
  auto objective = [&](Index r) {
    Matrix za;
    Vector zb;
    split_system_draw(draws.full(r), p, d, za, zb);
    return Vector(zb - za * eta->eta_hat);
  };
  auto out = run_test("system-unknown", relaxed, system.b_hat, system.n, kappa, draws.count(), cfg, objective, t);
  out.kappas = {kappa, kappa, kappa};
  out.eta = eta;
  return out;
}

std::string to_string(TestFamily f) {
  switch (f) {
    case TestFamily::MomentInequality:
      return "mi";
    case TestFamily::Nuisance:
      return "nuisance";
    case TestFamily::SystemKnown:
      return "system-known";
    case TestFamily::SystemUnknown:
      return "system-unknown";
  }
  return "";
}

std::vector<double> limit_distribution_oracle(const PopulationInputs& pop, Index M, std::uint64_t seed) {
  const Index p = pop.b.size();
  if (pop.scale.size() != p) throw std::invalid_argument("limit_distribution_oracle: scale length mismatch");
  const auto k = static_cast<Index>(pop.slots.size());
  if (pop.sigma.rows() != k || pop.sigma.cols() != k) {
    throw std::invalid_argument("limit_distribution_oracle: sigma must match the slot count");
  }
  Polytope feas;
  Vector obj = pop.b;
  Vector eta;
  Index full_dim = p;
  switch (pop.family) {
    case TestFamily::MomentInequality:
      feas = nonneg_l1_ball(pop.scale, nullptr);
      break;
    case TestFamily::Nuisance:
      feas = nonneg_l1_ball(pop.scale, &pop.a);
      break;
    case TestFamily::SystemKnown:
      feas = split_cone(pop.scale, pop.a);
      obj = split_objective(pop.b);
      break;
    case TestFamily::SystemUnknown:
      feas = system_set(pop.a, pop.scale);
      eta = unique_eta(pop.a, pop.b);
      full_dim = p * (pop.a.cols() + 1);
      break;
  }
  const std::vector<Vector> verts = face_vertices(feas, obj);
  Matrix vmat(static_cast<Index>(verts.size()), feas.dim());
  for (std::size_t i = 0; i < verts.size(); ++i) vmat.row(static_cast<Index>(i)) = verts[i].transpose();

  Eigen::SelfAdjointEigenSolver<Matrix> es(pop.sigma);
  const Matrix root = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  std::vector<double> out(static_cast<std::size_t>(M));
  Vector z(k);
  for (Index m = 0; m < M; ++m) {
    Stream s(seed, static_cast<std::uint64_t>(m));
    for (Index i = 0; i < k; ++i) z[i] = s.normal();
    const Vector zeta = root * z;
    Vector full = Vector::Zero(full_dim);
    for (Index i = 0; i < k; ++i) full[pop.slots[static_cast<std::size_t>(i)]] = zeta[i];
    Vector dir;
    if (pop.family == TestFamily::SystemUnknown) {
      Matrix za;
      Vector zb;
      split_system_draw(full, p, pop.a.cols(), za, zb);
      dir = zb - za * eta;
    } else if (pop.family == TestFamily::SystemKnown) {
      dir = split_objective(full);
    } else {
      dir = full;
    }
    out[static_cast<std::size_t>(m)] = (vmat * dir).maxCoeff();
  }
  return out;
}

}  // namespace lpinfer
