#include <doctest.h>

#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cellscape/cvt.hpp"
#include "cellscape/field.hpp"
#include "support.hpp"

using namespace cellscape;
using support::catch_error;

namespace {

Population grid_population(int side) {
  Population pop{1.0, 1.0, {}};
  for (int y = 0; y < side; ++y)
    for (int x = 0; x < side; ++x) {
      Cell c;
      c.index = pop.size();
      c.position = Point((x + 0.5) / side, (y + 0.5) / side);
      pop.cells.push_back(c);
    }
  return pop;
}

Population random_population(int n, std::uint64_t seed) {
  Rng rng(seed);
  Population pop{1.0, 1.0, {}};
  for (int i = 0; i < n; ++i) {
    Cell c;
    c.index = i;
    c.position = Point(rng.uniform(), rng.uniform());
    pop.cells.push_back(c);
  }
  return pop;
}

FieldParams quiet_params() {
  FieldParams p;
  p.dog = {0.0, 0.05, 0.0, 0.15};
  p.input_mean = 0.0;
  p.input_noise = 0.0;
  return p;
}

// Pattern-forming fixture on the unit square.
FieldParams turing_params() {
  FieldParams p;
  p.tau = 0.1;
  p.dt = 0.01;
  p.dog = {200.0, 0.05, 50.0, 0.15};
  p.units = KernelUnits::domain;
  p.input_mean = 0.35;
  p.input_noise = 0.05;
  p.rate = RateFunction::sigmoid;
  p.slope = 10.0;
  p.offset = 0.5;
  return p;
}

}  // namespace

TEST_CASE("build_weights matches the kernel entrywise") {
  DogKernel dog{1.0, 0.05, 0.75, 0.15};
  CHECK(dog(0.0) == doctest::Approx(0.25).epsilon(1e-15));

  const Population pop = random_population(50, 3);
  FieldParams p;
  p.dog = dog;
  const Eigen::MatrixXd w = build_weights(pop, p);
  REQUIRE(w.rows() == 50);
  double worst = 0.0;
  for (int i = 0; i < 50; ++i)
    for (int j = 0; j < 50; ++j) {
      const double d2 = (pop.cells[i].position - pop.cells[j].position).squaredNorm();
      const double direct = (std::exp(-d2 / (2 * 0.05 * 0.05)) - 0.75 * std::exp(-d2 / (2 * 0.15 * 0.15))) / 50.0;
      worst = std::max(worst, std::abs(w(i, j) - direct));
    }
  CHECK(worst < 1e-12);
  CHECK(w(7, 7) == doctest::Approx(0.25 / 50));

  p.weight_scale = false;
  p.dog.inhibitory_amplitude = 0.0;
  const Eigen::MatrixXd positive = build_weights(pop, p);
  CHECK((positive.array() > 0.0).all());
  CHECK(positive(0, 0) == 1.0);

  // Domain units scale the widths by the population width.
  Population wide = pop;
  wide.width = 10.0;
  for (auto& c : wide.cells) c.position *= 10.0;
  FieldParams rel = p;
  rel.units = KernelUnits::domain;
  CHECK((build_weights(wide, rel) - positive).cwiseAbs().maxCoeff() < 1e-12);

  CHECK(catch_error([] { build_weights(Population{}, FieldParams{}); }).code == ErrorCode::invalid_input);
}

TEST_CASE("validation guards") {
  auto code = [](auto mutate) {
    FieldParams p;
    mutate(p);
    return catch_error([&] { validate(p); });
  };
  CHECK_NOTHROW(validate(FieldParams{}));
  CHECK(code([](FieldParams& p) { p.tau = 0; }).code == ErrorCode::invalid_parameter);
  CHECK(code([](FieldParams& p) { p.dt = -1; }).code == ErrorCode::invalid_parameter);
  CHECK(code([](FieldParams& p) { p.dt = 0.06; }).code == ErrorCode::invalid_parameter);
  FieldParams edge;
  edge.dt = 0.05;
  CHECK_NOTHROW(validate(edge));
  CHECK(code([](FieldParams& p) { p.dog.inhibitory_width = p.dog.excitatory_width; }).code ==
        ErrorCode::invalid_parameter);
  CHECK(catch_error([] { simulate(Eigen::MatrixXd::Zero(2, 2), FieldParams{}, 0, 1); }).code ==
        ErrorCode::invalid_parameter);
}

TEST_CASE("step arithmetic") {
  const FieldParams p = quiet_params();
  FieldState s = initial_state(3, 1);
  s.u.setOnes();
  step(s, Eigen::MatrixXd::Zero(3, 3), p);
  CHECK((s.u.array() - 0.9).abs().maxCoeff() < 1e-15);
  CHECK(s.t == doctest::Approx(0.01));
  CHECK(s.steps == 1);

  FieldParams fixed = quiet_params();
  fixed.input_mean = 0.35;
  fixed.h = 0.1;
  FieldState f = initial_state(4, 2);
  for (int i = 0; i < 1000; ++i) step(f, Eigen::MatrixXd::Zero(4, 4), fixed);
  CHECK((f.u.array() - 0.45).abs().maxCoeff() < 1e-6);

  CHECK(catch_error([&] { step(f, Eigen::MatrixXd::Zero(3, 3), fixed); }).code == ErrorCode::invalid_input);
}

TEST_CASE("divergence names the step") {
  FieldParams p = quiet_params();
  p.rate = RateFunction::identity;
  p.dt = p.tau * 0.5;
  FieldState s = initial_state(1, 0);
  s.u[0] = 1.0;
  const Eigen::MatrixXd w = Eigen::MatrixXd::Constant(1, 1, 1e300);
  auto caught = catch_error([&] {
    for (int i = 0; i < 10; ++i) step(s, w, p);
  });
  CHECK(caught.code == ErrorCode::divergence);
  CHECK(caught.message.find("step 2") != std::string::npos);
}

TEST_CASE("simulation is deterministic and steps=1 reduces to step") {
  const Population pop = random_population(80, 9);
  FieldParams p = turing_params();
  const Eigen::MatrixXd w = build_weights(pop, p);
  const auto a = simulate(w, p, 40, 5);
  const auto b = simulate(w, p, 40, 5);
  CHECK(a.state.u == b.state.u);
  CHECK(a.mean_activity == b.mean_activity);
  CHECK(simulate(w, p, 40, 6).state.u != a.state.u);

  const auto one = simulate(w, p, 1, 5);
  FieldState s = initial_state(pop.size(), 5);
  step(s, w, p);
  CHECK(one.state.u == s.u);
  CHECK(one.mean_activity == s.u.unaryExpr([&](double u) { return p.rate_of(u); }));

  CHECK(averaging_window(1000) == 200);
  CHECK(averaging_window(1) == 1);
  CHECK(averaging_window(7) == 2);
}

TEST_CASE("linear steady state solves (I - W) u = I + h") {
  const Population pop = random_population(60, 4);
  FieldParams p = quiet_params();
  p.rate = RateFunction::identity;
  p.dog = {0.8, 0.1, 0.4, 0.3};
  p.input_mean = 0.3;
  p.h = 0.05;
  const Eigen::MatrixXd w = build_weights(pop, p);
  const Eigen::Index n = pop.size();
  const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(n, n) - w;
  const Eigen::VectorXd direct = system.partialPivLu().solve(Eigen::VectorXd::Constant(n, 0.35));
  const auto sim = simulate(w, p, 3000, 0);
  CHECK((sim.state.u - direct).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("explicit Euler is first order") {
  const Population pop = random_population(40, 8);
  FieldParams p = quiet_params();
  p.rate = RateFunction::identity;
  p.dog = {0.8, 0.1, 0.4, 0.3};
  p.input_mean = 0.3;
  p.tau = 0.1;
  const Eigen::MatrixXd w = build_weights(pop, p);
  const Eigen::Index n = pop.size();

  // Exact solution of tau u' = -(I - W) u + b from u(0) = 0 via the eigenbasis of symmetric W.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(w);
  const Eigen::VectorXd b = Eigen::VectorXd::Constant(n, p.input_mean);
  const Eigen::VectorXd lambda = 1.0 - eig.eigenvalues().array();
  const double t_end = 1.0;
  const Eigen::VectorXd coeff = eig.eigenvectors().transpose() * b;
  const Eigen::VectorXd exact =
      eig.eigenvectors() *
      (coeff.array() / lambda.array() * (1.0 - (-lambda.array() * t_end / p.tau).exp())).matrix();

  auto error_at = [&](double dt) {
    FieldParams q = p;
    q.dt = dt;
    FieldState s = initial_state(n, 0);
    const int steps = static_cast<int>(std::lround(t_end / dt));
    for (int i = 0; i < steps; ++i) step(s, w, q);
    return (s.u - exact).cwiseAbs().maxCoeff();
  };
  const double e1 = error_at(0.02), e2 = error_at(0.01), e3 = error_at(0.005);
  CHECK(e1 / e2 == doctest::Approx(2.0).epsilon(0.25));
  CHECK(e2 / e3 == doctest::Approx(2.0).epsilon(0.25));
}

TEST_CASE("activity histogram") {
  Population one{1.0, 1.0, {}};
  Cell c;
  c.position = Point(0.26, 0.74);
  one.cells.push_back(c);
  const auto h1 = activity_histogram(one, Eigen::VectorXd::Constant(1, 2.5), 4, 4);
  CHECK(h1.means(2, 1) == 2.5);
  CHECK(h1.counts.sum() == 1);
  CHECK(h1.empty.count() == 15);
  CHECK_FALSE(h1.empty(2, 1));

  const Population pop = random_population(500, 12);
  const auto hc = activity_histogram(pop, Eigen::VectorXd::Constant(500, 0.7), 7, 5);
  CHECK(hc.counts.sum() == 500);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x < 7; ++x) CHECK((hc.empty(y, x) ? hc.means(y, x) == 0.0 : hc.means(y, x) == doctest::Approx(0.7)));

  Rng rng(2);
  Eigen::VectorXd values(500);
  for (auto& v : values) v = rng.uniform(-1, 3);
  const auto hm = activity_histogram(pop, values, 40, 40);
  CHECK(hm.counts.sum() == 500);
  CHECK(std::abs((hm.means.array() * hm.counts.cast<double>().array()).sum() - values.sum()) < 1e-9);

  // Cells on the far edge land in the last bin.
  Population edge{2.0, 1.0, {}};
  c.position = Point(2.0, 1.0);
  edge.cells.push_back(c);
  CHECK(activity_histogram(edge, Eigen::VectorXd::Ones(1), 3, 3).counts(2, 2) == 1);
  CHECK(catch_error([&] { activity_histogram(edge, Eigen::VectorXd::Ones(1), 0, 3); }).code ==
        ErrorCode::invalid_parameter);
}

TEST_CASE("radial autocorrelation") {
  // A stripe pattern of period 8 has its first non-origin maximum at lag 8.
  Eigen::MatrixXd stripes(32, 32);
  for (int y = 0; y < 32; ++y)
    for (int x = 0; x < 32; ++x) stripes(y, x) = std::cos(2 * M_PI * x / 8.0);
  const auto ac = radial_autocorrelation(stripes);
  CHECK(ac.size() == 16);
  CHECK(ac[0] == doctest::Approx(1.0));
  const auto peak = secondary_peak(ac);
  CHECK(peak.found);
  CHECK(peak.radius == 8);

  // White noise has no structured secondary lobe of comparable height.
  Rng rng(4);
  Eigen::MatrixXd noise(32, 32);
  for (auto& v : noise.reshaped()) v = rng.uniform();
  const auto np = secondary_peak(radial_autocorrelation(noise));
  CHECK((!np.found || np.value < 0.05));
}

TEST_CASE("homogeneous grid forms a Turing pattern") {
  const Population pop = grid_population(40);
  const auto sim = simulate(pop, turing_params(), 1000, 1);
  const auto hist = activity_histogram(pop, sim.mean_activity, 40, 40);
  CHECK(hist.empty.count() == 0);
  const auto ac = radial_autocorrelation(hist.means);
  const auto peak = secondary_peak(ac);
  MESSAGE("peak r=" << peak.radius << " value=" << peak.value);
  CHECK(peak.found);
  CHECK(peak.value > 0.05);
  const double spread = sim.mean_activity.maxCoeff() - sim.mean_activity.minCoeff();
  CHECK(spread > 0.5);
}

TEST_CASE("activity localizes on a high-density torus") {
  const DensityMap density = annulus(400, 400, 0.3, 0.06, 0.2);
  StippleOptions opt;
  opt.seed = 7;
  const SiteSet sites = stipple(density, 1600, opt);
  Population pop = population_from_sites(sites.positions / 400.0, nullptr, 1.0, 1.0);
  const auto sim = simulate(pop, turing_params(), 1000, 1);
  double in = 0, out = 0;
  int nin = 0, nout = 0;
  for (const Cell& c : pop.cells) {
    const double r = (c.position - Point(0.5, 0.5)).norm();
    if (std::abs(r - 0.3) < 0.1) {
      in += sim.mean_activity[c.index];
      ++nin;
    } else {
      out += sim.mean_activity[c.index];
      ++nout;
    }
  }
  MESSAGE("band " << in / nin << " outside " << out / nout << " (" << nin << "/" << nout << ")");
  CHECK(in / nin > out / nout + 0.1);
}
