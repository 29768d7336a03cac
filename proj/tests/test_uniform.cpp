#include "support.hpp"

#include "lpinfer/errors.hpp"
#include "lpinfer/rng.hpp"
#include "lpinfer/stats.hpp"
#include "lpinfer/uniform.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <limits>

using namespace lpinfer;

namespace {

MomentModel make_model(const Vector& b, const Vector& d, Index n) {
  MomentModel m;
  m.b_hat = b;
  m.d_hat = d;
  m.sigma_hat = Matrix(d.array().square().matrix().asDiagonal());
  m.mask = classify_components(d);
  m.n = n;
  return m;
}

BootstrapDraws gaussian_draws(const MomentModel& m, Index B, std::uint64_t seed) {
  BootstrapDraws out;
  out.full_dim = m.dim();
  out.slots = m.estimated();
  out.draws.resize(B, static_cast<Index>(out.slots.size()));
  for (Index r = 0; r < B; ++r) {
    Stream s(seed, static_cast<std::uint64_t>(r));
    for (std::size_t k = 0; k < out.slots.size(); ++k)
      out.draws(r, static_cast<Index>(k)) = m.d_hat[out.slots[k]] * s.normal();
  }
  return out;
}

BootstrapDraws system_draws(const EstimatedSystem& est, Index B, std::uint64_t seed) {
  BootstrapDraws out;
  out.full_dim = est.rows() * (est.cols() + 1);
  out.slots = est.slots;
  out.draws.resize(B, static_cast<Index>(est.slots.size()));
  const Vector sd = est.entry_sd();
  for (Index r = 0; r < B; ++r) {
    Stream s(seed, static_cast<std::uint64_t>(r));
    for (Index k = 0; k < out.draws.cols(); ++k) out.draws(r, k) = sd[k] * s.normal();
  }
  return out;
}

EstimatedSystem deterministic_system(const Matrix& a, const Vector& b, Index n) {
  EstimatedSystem e;
  e.a_hat = a;
  e.b_hat = b;
  e.omega = Vector::Zero(a.rows());
  e.cov = Matrix(0, 0);
  e.n = n;
  return e;
}

EstimatedSystem noisy_system(const Matrix& a, const Vector& b, double sd, Index n) {
  EstimatedSystem e = deterministic_system(a, b, n);
  const Index total = a.rows() * (a.cols() + 1);
  for (Index k = 0; k < total; ++k) e.slots.push_back(k);
  e.cov = sd * sd * Matrix::Identity(total, total);
  e.omega = omega_rule(a.rows(), e.slots, e.entry_sd());
  return e;
}

}  // namespace

TEST_CASE("Kappa") {
  CHECK(Kappa::parse("sqrt-log").value(100) == doctest::Approx(std::sqrt(std::log(100.0))));
  CHECK(Kappa::parse("log").value(100) == doctest::Approx(std::log(100.0)));
  CHECK(Kappa::parse("fixed:2.5").value(3) == 2.5);
  CHECK(Kappa::parse("fixed:2.5").describe() == "fixed:2.5");
  CHECK_THROWS_AS(Kappa::parse("fixed:x"), std::invalid_argument);
  CHECK_THROWS_AS(Kappa::parse("cube"), std::invalid_argument);
}

TEST_CASE("critical_value") {
  CHECK(critical_value(std::vector<double>(10, 0.0), 0.05) == 0.0);
  std::vector<double> v;
  for (int i = 1; i <= 100; ++i) v.push_back(i / 100.0);
  CHECK(critical_value(v, 0.05) == 0.95);
  std::vector<double> w = {-std::numeric_limits<double>::infinity(), 3.0, 1.0};
  CHECK(critical_value(w, 0.4) == 1.0);
  CHECK_THROWS_AS(critical_value(v, 0.5), std::invalid_argument);

  std::mt19937_64 rng(4);
  for (int t = 0; t < 200; ++t) {
    const int B = 1 + t;
    std::vector<double> x(static_cast<std::size_t>(B));
    for (auto& e : x) e = std::round(lpinfer::testing::normal_vector(rng, 1)[0] * 4.0) / 4.0;
    const double alpha = 0.01 + 0.47 * (t % 10) / 9.0;
    const double c = critical_value(x, alpha);
    // smallest order statistic whose empirical CDF reaches 1 - alpha
    std::vector<double> s = x;
    std::sort(s.begin(), s.end());
    double expect = s.back();
    for (int k = 0; k < B; ++k) {
      const double cdf = static_cast<double>(std::upper_bound(s.begin(), s.end(), s[k]) - s.begin()) / B;
      if (cdf >= 1.0 - alpha - 1e-12) {
        expect = s[k];
        break;
      }
    }
    CHECK(c == expect);
  }
}

TEST_CASE("kolmogorov_distance") {
  CHECK(kolmogorov_distance({1, 2, 3}, {1, 2, 3}) == 0.0);
  CHECK(kolmogorov_distance({0, 0}, {1, 1}) == 1.0);
  CHECK(kolmogorov_distance({0, 1}, {0, 0, 0, 1}) == doctest::Approx(0.25));
}

TEST_CASE("test_moment_ineq") {
  TestConfig cfg;
  SUBCASE("all slack") {
    Vector b(2);
    b << -0.5, -0.2;
    const auto m = make_model(b, Vector::Ones(2), 400);
    const auto out = test_moment_ineq(m, gaussian_draws(m, 199, 1), cfg);
    CHECK(out.statistic == 0.0);
    CHECK_FALSE(out.reject);
  }
  SUBCASE("closed form") {
    const auto m = make_model(Vector::Constant(1, 1.0), Vector::Constant(1, 2.0), 100);
    const auto out = test_moment_ineq(m, gaussian_draws(m, 99, 2), cfg);
    CHECK(out.statistic == doctest::Approx(0.5));
    CHECK(out.scaled == doctest::Approx(5.0));
    CHECK(out.reject);
  }
  SUBCASE("known component rejected by precondition") {
    Vector d(2);
    d << 1, 0;
    const auto m = make_model(Vector::Zero(2), d, 10);
    CHECK_THROWS_AS(test_moment_ineq(m, gaussian_draws(m, 9, 2), cfg), std::invalid_argument);
  }
  SUBCASE("invariants on random models") {
    std::mt19937_64 rng(6);
    for (int t = 0; t < 30; ++t) {
      const Index p = 1 + t % 4;
      const Vector b = 0.1 * lpinfer::testing::normal_vector(rng, p);
      const Vector d = lpinfer::testing::normal_vector(rng, p).cwiseAbs().array() + 0.2;
      const auto m = make_model(b, d, 200);
      const auto draws = gaussian_draws(m, 99, t);
      const auto out = test_moment_ineq(m, draws, cfg);
      CHECK(out.reject == (out.scaled > out.critical_value));
      if (out.statistic <= cfg.kappa.value(m.n) / std::sqrt(200.0)) {
        CHECK(*std::min_element(out.boot_values.begin(), out.boot_values.end()) >= -1e-12);
        CHECK(out.critical_value >= -1e-12);
      }
      // positive diagonal rescaling
      const Vector s = lpinfer::testing::normal_vector(rng, p).cwiseAbs().array() + 0.5;
      const auto ms = make_model(s.cwiseProduct(b), s.cwiseProduct(d), 200);
      BootstrapDraws ds = draws;
      for (Index r = 0; r < ds.count(); ++r) ds.draws.row(r) = ds.draws.row(r).cwiseProduct(s.transpose());
      const auto os = test_moment_ineq(ms, ds, cfg);
      CHECK(os.statistic == doctest::Approx(out.statistic).epsilon(1e-10));
      CHECK(os.critical_value == doctest::Approx(out.critical_value).epsilon(1e-9));
      CHECK(os.reject == out.reject);
      // serial kernel
      TestConfig serial = cfg;
      serial.exec = Execution::Serial;
      CHECK(test_moment_ineq(m, draws, serial).boot_values == out.boot_values);
    }
  }
}

TEST_CASE("test_nuisance_linear") {
  TestConfig cfg;
  std::mt19937_64 rng(8);
  SUBCASE("A = 0 reduces to the moment inequality test") {
    Vector b(3);
    b << 0.05, -0.1, 0.02;
    const auto m = make_model(b, Vector::Ones(3), 300);
    const auto draws = gaussian_draws(m, 199, 3);
    const auto mi = test_moment_ineq(m, draws, cfg);
    const auto nu = test_nuisance_linear(m, Matrix::Zero(3, 2), draws, cfg);
    CHECK(nu.statistic == doctest::Approx(mi.statistic).epsilon(1e-12));
    CHECK(nu.critical_value == doctest::Approx(mi.critical_value).epsilon(1e-12));
    CHECK(nu.reject == mi.reject);
  }
  SUBCASE("A of full range") {
    const auto m = make_model(Vector::Ones(2), Vector::Ones(2), 100);
    const auto out = test_nuisance_linear(m, Matrix::Identity(2, 2), gaussian_draws(m, 49, 1), cfg);
    CHECK(out.statistic == 0.0);
    CHECK_FALSE(out.reject);
  }
  SUBCASE("deterministic component alone rejects") {
    // b = (0.5 known, -1 estimated), A = (0; 1): lambda = (t, 0) has A'lambda = 0
    // and b'lambda = t/2 with no cost in ||D lambda||_1.
    Vector b(2), d(2);
    b << 0.5, -1.0;
    d << 0.0, 1.0;
    Matrix a(2, 1);
    a << 0, 1;
    const auto m = make_model(b, d, 100);
    const auto out = test_nuisance_linear(m, a, gaussian_draws(m, 49, 1), cfg);
    CHECK(out.infinite);
    CHECK(std::isinf(out.statistic));
    CHECK(out.reject);
    CHECK(out.boot_values.empty());
  }
  SUBCASE("null construction b <= 0 gives T = 0") {
    for (int t = 0; t < 20; ++t) {
      const Vector b = -lpinfer::testing::normal_vector(rng, 3).cwiseAbs();
      const auto m = make_model(b, Vector::Ones(3), 100);
      const Matrix a = lpinfer::testing::normal_matrix(rng, 3, 1);
      const auto out = test_nuisance_linear(m, a, gaussian_draws(m, 29, t), cfg);
      CHECK(out.statistic == doctest::Approx(0.0));
      CHECK_FALSE(out.reject);
    }
  }
}

TEST_CASE("test_linear_system_known") {
  TestConfig cfg;
  SUBCASE("one-dimensional arithmetic") {
    const auto m = make_model(Vector::Constant(1, -1.0), Vector::Ones(1), 100);
    const auto out = test_linear_system_known(m, Matrix::Identity(1, 1), gaussian_draws(m, 49, 1), cfg);
    CHECK(out.statistic == doctest::Approx(1.0));
    CHECK(out.reject);
  }
  SUBCASE("random instances pass the closed-form cross-check") {
    std::mt19937_64 rng(10);
    for (int t = 0; t < 40; ++t) {
      const Index p = 2 + t % 3;
      const Matrix a = lpinfer::testing::normal_matrix(rng, p, 2);
      const Vector b = lpinfer::testing::normal_vector(rng, p);
      const Vector d = lpinfer::testing::normal_vector(rng, p).cwiseAbs().array() + 0.3;
      const auto m = make_model(b, d, 100);
      CHECK_NOTHROW(test_linear_system_known(m, a, gaussian_draws(m, 19, t), cfg));
    }
  }
  SUBCASE("exact null b = A x gives T = 0") {
    Matrix a(3, 2);
    a << 1, 0, 0, 1, 1, 1;
    Vector x(2);
    x << 0.3, 0.7;
    const auto m = make_model(a * x, Vector::Ones(3), 1000);
    const auto out = test_linear_system_known(m, a, gaussian_draws(m, 99, 1), cfg);
    CHECK(out.statistic == doctest::Approx(0.0).epsilon(1e-12));
    CHECK_FALSE(out.reject);
  }
}

TEST_CASE("solve_eta_qp") {
  SUBCASE("zero already feasible") {
    Vector b(2);
    b << -1, -1;
    const auto e = solve_eta_qp(deterministic_system(Matrix::Identity(2, 2), b, 100), 0.0, 1.0);
    CHECK(e.eta_hat.norm() == 0.0);
  }
  SUBCASE("halfline") {
    const auto e = solve_eta_qp(deterministic_system(Matrix::Identity(1, 1), Vector::Ones(1), 100), 0.0, 1.0);
    CHECK(e.eta_hat[0] == doctest::Approx(1.0));
    CHECK(e.objective == doctest::Approx(1.0));
  }
  SUBCASE("grid oracle") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 15; ++t) {
      const Matrix a = lpinfer::testing::normal_matrix(rng, 3, 2);
      const Vector b = lpinfer::testing::normal_vector(rng, 3);
      EstimatedSystem sys = noisy_system(a, b, 0.5, 100);
      const double level = 0.3;  // T + kappa3 / sqrt(n) with T = 0.2, kappa3 = 1
      const Vector rhs = level * sys.omega - b;
      double best = std::numeric_limits<double>::infinity();
      const int steps = 800;
      for (int i = 0; i <= steps; ++i) {
        for (int j = 0; j <= steps; ++j) {
          Vector eta(2);
          eta << -4.0 + 8.0 * i / steps, -4.0 + 8.0 * j / steps;
          if (((-a * eta) - rhs).maxCoeff() <= 0.0) best = std::min(best, eta.norm());
        }
      }
      if (!std::isfinite(best)) continue;
      const auto e = solve_eta_qp(sys, 0.2, 1.0);
      CHECK(((-a * e.eta_hat) - rhs).maxCoeff() <= 1e-9);
      CHECK(std::abs(e.eta_hat.norm() - best) < 1e-2);
      CHECK(e.eta_hat.norm() <= best + 1e-9);
      CHECK(e.kkt_residual < 1e-8);
    }
  }
}

TEST_CASE("test_linear_system_unknown") {
  TestConfig cfg;
  SUBCASE("identity system with slack") {
    Vector b(2);
    b << -1, -1;
    const auto sys = noisy_system(Matrix::Identity(2, 2), b, 1.0, 200);
    const auto out = test_linear_system_unknown(sys, system_draws(sys, 99, 1), cfg);
    CHECK(out.statistic == doctest::Approx(0.0));
    CHECK_FALSE(out.reject);
    REQUIRE(out.eta);
    CHECK(out.eta->eta_hat.norm() == doctest::Approx(0.0));
  }
  SUBCASE("deterministic system under the null") {
    Matrix a(3, 2);
    a << 1, 0, 0, 1, -1, -1;
    Vector b(3);
    b << 1, 1, -2;
    const auto sys = deterministic_system(a, b, 500);
    const auto out = test_linear_system_unknown(sys, system_draws(sys, 49, 1), cfg);
    CHECK(out.statistic == 0.0);
    CHECK(std::all_of(out.boot_values.begin(), out.boot_values.end(), [](double v) { return v == 0.0; }));
    CHECK_FALSE(out.reject);
  }
  SUBCASE("deterministic violation rejects without bootstrap") {
    Matrix a(2, 1);
    a << 1, -1;
    Vector b(2);
    b << 1, 0;  // eta >= 1 and eta <= 0
    const auto sys = deterministic_system(a, b, 500);
    const auto out = test_linear_system_unknown(sys, system_draws(sys, 49, 1), cfg);
    CHECK(out.infinite);
    CHECK(out.reject);
  }
  SUBCASE("estimated violation rejects at large n") {
    Matrix a(2, 1);
    a << 1, -1;
    Vector b(2);
    b << 1, -0.8;  // eta >= 1 and eta <= 0.8
    const auto sys = noisy_system(a, b, 1.0, 5000);
    const auto out = test_linear_system_unknown(sys, system_draws(sys, 199, 1), cfg);
    CHECK(out.statistic > 0.0);
    CHECK(out.reject);
  }
}

TEST_CASE("limit_distribution_oracle") {
  SUBCASE("degenerate face") {
    PopulationInputs pop;
    pop.b = -Vector::Ones(2);
    pop.scale = Vector::Ones(2);
    pop.sigma = Matrix::Identity(2, 2);
    pop.slots = {0, 1};
    const auto v = limit_distribution_oracle(pop, 100, 1);
    CHECK(std::all_of(v.begin(), v.end(), [](double x) { return x == 0.0; }));
  }
  SUBCASE("one-dimensional half-normal") {
    PopulationInputs pop;
    pop.b = Vector::Zero(1);
    pop.scale = Vector::Ones(1);
    pop.sigma = Matrix::Constant(1, 1, 4.0);
    pop.slots = {0};
    const auto v = limit_distribution_oracle(pop, 20000, 2);
    const double zeros = std::count(v.begin(), v.end(), 0.0) / 20000.0;
    CHECK(zeros == doctest::Approx(0.5).epsilon(0.03));
    std::vector<double> ref(20000);
    Stream s(77, 0);
    for (auto& x : ref) x = std::max(0.0, 2.0 * s.normal());
    CHECK(kolmogorov_distance(v, ref) < 0.02);
  }
  SUBCASE("non-unique eta is refused") {
    PopulationInputs pop;
    pop.family = TestFamily::SystemUnknown;
    pop.a = Matrix::Identity(1, 1);
    pop.b = Vector::Zero(1);
    pop.scale = Vector::Ones(1);
    pop.slots = {0, 1};
    pop.sigma = Matrix::Identity(2, 2);
    CHECK_THROWS_AS(limit_distribution_oracle(pop, 10, 1), NonUniqueEta);
  }
  SUBCASE("bootstrap of the moment inequality test approaches the limit") {
    const Index n = 10000;
    Matrix x(n, 2);
    Stream s(5, 0);
    for (Index i = 0; i < n; ++i) {
      x(i, 0) = s.normal();
      x(i, 1) = 0.6 * x(i, 0) + 0.8 * s.normal();
    }
    const auto m = estimate_moments(x);
    const auto draws = bootstrap_root(x, 2000, 6);
    const auto out = test_moment_ineq(m, draws, TestConfig{});
    PopulationInputs pop;
    pop.b = Vector(2);
    pop.b << 0.0, 0.0;
    pop.scale = Vector::Ones(2);
    pop.sigma = Matrix::Identity(2, 2);
    pop.sigma(0, 1) = pop.sigma(1, 0) = 0.6;
    pop.slots = {0, 1};
    CHECK(kolmogorov_distance(out.boot_values, limit_distribution_oracle(pop, 20000, 7)) < 0.05);
  }
}
