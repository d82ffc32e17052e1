#include "phaselab/parabolic.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <memory>

using namespace phaselab;

namespace {

const DomainSpec kUnitDisk(Ball{1.0});

SparseSystem system_for(const PhaseConfig& c, int n) {
  auto mesh = std::make_shared<const Mesh>(assign_phases(generate_mesh(c, n), c));
  const auto& d = c.domain();
  return assemble_system(mesh, c, RadialProfiled::constant(2, d.inner_radius(), d.outer_radius(), 1.0));
}

const PhaseConfig& displaced() {
  static const PhaseConfig c(kUnitDisk, {{1, Disk{Point(0.2, 0.0), 0.3}, 2.0}});
  return c;
}

}  // namespace

TEST_SUITE("parabolic") {
  TEST_CASE("zero datum stays zero") {
    const auto sys = system_for(displaced(), 12);
    HeatState s = initial_state(sys, 0.0);
    ImplicitStepper stepper(sys);
    for (int k = 0; k < 5; ++k) s = stepper.step(s, 1e-3);
    CHECK(s.u.lpNorm<Eigen::Infinity>() == 0.0);
    CHECK(s.time == doctest::Approx(5e-3));
    CHECK_THROWS_AS(stepper.step(s, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(ImplicitStepper(sys, 0.0), std::invalid_argument);
  }

  TEST_CASE("an eigenvector decays by the exact amplification factor") {
    const auto sys = system_for(displaced(), 12);
    const auto eig = smallest_eigenvalue(sys, 1e-13);
    const HeatState start{0.0, eig.vector, 1.0};
    const double dt = 0.05, z = eig.lambda * dt;
    const auto be = step_implicit(start, dt, sys);
    CHECK(be.mass_norm == doctest::Approx(1.0 / (1.0 + z)).epsilon(1e-7));
    ImplicitStepper cn(sys, 0.5);
    const auto c = cn.step(start, dt);
    CHECK(c.mass_norm == doctest::Approx((1.0 - z / 2) / (1.0 + z / 2)).epsilon(1e-7));
    // Crank-Nicolson is closer to e^{-z}.
    CHECK(std::abs(c.mass_norm - std::exp(-z)) < std::abs(be.mass_norm - std::exp(-z)));
  }

  TEST_CASE("first eigenvalue of the unit disk against the Bessel zero") {
    const double j01 = oracle::bessel_j0_first_zero();
    CHECK(j01 == doctest::Approx(2.404825557695773).epsilon(1e-12));
    const auto eig = smallest_eigenvalue(system_for(PhaseConfig(kUnitDisk, {}), 32));
    CHECK(std::abs(eig.lambda - j01 * j01) / (j01 * j01) < 1e-2);
    CHECK(eig.lambda > j01 * j01);  // conforming P1 approximates from above
    // The eigenvector is M-normalized and satisfies K x = lambda M x.
    const auto sys = system_for(PhaseConfig(kUnitDisk, {}), 32);
    CHECK(mass_norm(sys.mass, eig.vector) == doctest::Approx(1.0));
    const Eigen::VectorXd r = sys.stiffness * eig.vector - eig.lambda * (sys.mass * eig.vector);
    CHECK(r.norm() < 1e-3 * eig.lambda);
  }

  TEST_CASE("first eigenvalue of an annulus against a Sturm-sequence oracle") {
    const double ref = oracle::annulus_first_eigenvalue(0.5, 1.0, 4000);
    const auto eig = smallest_eigenvalue(system_for(PhaseConfig(DomainSpec(Annulus{0.5, 1.0}), {}), 48));
    CHECK(std::abs(eig.lambda - ref) / ref < 1e-2);
  }

  TEST_CASE("property: eigenvalue scaling and monotonicity") {
    const double l1 = smallest_eigenvalue(system_for(PhaseConfig(kUnitDisk, {}), 16)).lambda;
    const double l2 = smallest_eigenvalue(system_for(PhaseConfig(DomainSpec(Ball{2.0}), {}), 16)).lambda;
    CHECK(l2 == doctest::Approx(l1 / 4.0).epsilon(1e-9));  // the mesh scales with R
    double prev = 0.0;
    for (double sigma : {0.2, 0.5, 2.0, 5.0}) {
      const PhaseConfig c(kUnitDisk, {{1, Disk{Point(0.1, 0.1), 0.4}, sigma}});
      const double l = smallest_eigenvalue(system_for(c, 16)).lambda;
      CHECK(l > prev);
      prev = l;
    }
  }

  TEST_CASE("time schedule and its eigenvalue cap") {
    const TimeSchedule s;
    CHECK(s.dt(0) == 1e-4);
    CHECK(s.dt(99) == 1e-4);
    CHECK(s.dt(100) == doctest::Approx(1.05e-4));
    CHECK(s.dt(10000) == 1e-3);
    const auto capped = s.limited_for(50.0);
    CHECK(capped.max_dt == doctest::Approx(2e-4));
    CHECK(capped.dt(10000) == doctest::Approx(2e-4));
    CHECK(capped.initial_dt == 1e-4);
    CHECK(s.limited_for(1.0).max_dt == 1e-3);
    CHECK(s.limited_for(1000.0).initial_dt == doctest::Approx(1e-5));
    CHECK_THROWS_AS(s.limited_for(0.0), std::invalid_argument);
  }

  TEST_CASE("heat run: dissipativity, decay and the time integral") {
    const auto sys = system_for(displaced(), 16);
    const auto eig = smallest_eigenvalue(sys);
    HeatRunOptions opts;
    opts.schedule = opts.schedule.limited_for(eig.lambda);
    const auto ti = integrate_time(sys, eig.lambda, opts);
    const auto& ser = ti.run.series;
    CHECK(ser.dissipativity_violations == 0);
    for (std::size_t i = 1; i < ser.mass_norms.size(); ++i) CHECK(ser.mass_norms[i] <= ser.mass_norms[i - 1]);
    CHECK(ser.mass_norms.back() <= opts.epsilon);

    const auto decay = decay_check(ser, eig.lambda, sys.mesh->total_area());
    CHECK(decay.pass);
    CHECK(decay.max_ratio <= 1.0 + 2e-2);
    CHECK(decay.slope_ratio == doctest::Approx(1.0).epsilon(2e-2));

    // V solves K V = M u0 up to time discretization.
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(sys.num_free());
    const Eigen::VectorXd ref = solve_free(sys, sys.mass * ones);
    const Eigen::VectorXd v = sys.restrict_to_free(ti.v.values);
    CHECK(mass_norm(sys.mass, v - ref) / mass_norm(sys.mass, ref) < 2e-2);

    const double change = extend_integration(sys, ti, opts);
    CHECK(change <= ti.tail_bound);
  }

  TEST_CASE("the first record satisfies the decay bound at t = 0") {
    const auto sys = system_for(PhaseConfig(kUnitDisk, {}), 12);
    TimeSeries ser;
    ser.times = {0.0};
    ser.mass_norms = {initial_state(sys).mass_norm};
    const auto d = decay_check(ser, 5.0, sys.mesh->total_area());
    CHECK(d.pass);
    CHECK(d.max_ratio < 1.0);
    // An inflated norm is caught with its time.
    ser.times.push_back(0.1);
    ser.mass_norms.push_back(2.0 * std::sqrt(sys.mesh->total_area()) * std::exp(-0.5));
    const auto bad = decay_check(ser, 5.0, sys.mesh->total_area());
    CHECK_FALSE(bad.pass);
    REQUIRE(bad.first_violation);
    CHECK(*bad.first_violation == 0.1);
  }

  TEST_CASE("property: the time integral is linear in the datum") {
    const auto sys = system_for(displaced(), 10);
    HeatRunOptions a;
    HeatRunOptions b = a;
    b.initial_value = 3.0;
    b.epsilon = 3.0 * a.epsilon;
    const auto ra = run_heat(sys, a);
    const auto rb = run_heat(sys, b);
    CHECK(ra.steps == rb.steps);
    CHECK((rb.integral - 3.0 * ra.integral).norm() < 1e-10 * rb.integral.norm());
  }

  TEST_CASE("property: time-integral error shrinks with the step") {
    const auto sys = system_for(PhaseConfig(kUnitDisk, {}), 10);
    const Eigen::VectorXd ref = solve_free(sys, sys.mass * Eigen::VectorXd::Ones(sys.num_free()));
    double prev = 1.0;
    for (double scale : {4.0, 2.0, 1.0}) {
      HeatRunOptions o;
      o.schedule.initial_dt *= scale;
      o.schedule.max_dt *= scale;
      const auto r = run_heat(sys, o);
      const double err = mass_norm(sys.mass, r.integral - ref) / mass_norm(sys.mass, ref);
      CHECK(err < prev);
      prev = err;
    }
  }

  TEST_CASE("a run that cannot reach epsilon reports it") {
    const auto sys = system_for(PhaseConfig(kUnitDisk, {}), 8);
    HeatRunOptions o;
    o.max_steps = 10;
    CHECK_THROWS_AS(run_heat(sys, o), std::runtime_error);
  }

  TEST_CASE("probe surfaces") {
    const PhaseConfig c(kUnitDisk, {{1, Disk{Point::Zero(), 0.5}, 2.0}});
    const auto ok = check_surface(c, {Point::Zero(), 0.75});
    CHECK(ok.distance_condition);
    CHECK(ok.min_core_distance == doctest::Approx(0.25).epsilon(1e-9));
    CHECK(ok.max_boundary_distance == doctest::Approx(0.25).epsilon(1e-9));
    CHECK_FALSE(check_surface(c, {Point::Zero(), 0.7}).distance_condition);
    CHECK_THROWS_AS(check_surface(c, {Point::Zero(), 0.5}), std::invalid_argument);
    CHECK_THROWS_AS(check_surface(c, {Point::Zero(), 0.4}), std::invalid_argument);
    CHECK_THROWS_AS(check_surface(c, {Point::Zero(), 1.0}), std::invalid_argument);
    CHECK_THROWS_AS(check_surface(c, {Point::Zero(), -1.0}), std::invalid_argument);
  }

  TEST_CASE("probe statistics of analytic and linear fields") {
    const SurfaceSpec m{Point::Zero(), 0.6};
    const auto radial = probe_function([](const Point& p) { return 1.0 - p.squaredNorm(); },
                                       [](const Point& p) { return Eigen::Vector2d(-2.0 * p); }, m);
    CHECK(radial.mean_u == doctest::Approx(0.64));
    CHECK(radial.dev_u < 1e-14);
    CHECK(radial.mean_flux == doctest::Approx(-1.2));
    CHECK(radial.dev_flux < 1e-14);

    // The recovered gradient is exact for a linear field.
    const PhaseConfig c(kUnitDisk, {});
    const Mesh mesh = assign_phases(generate_mesh(c, 12), c);
    Eigen::VectorXd nodal(mesh.num_vertices());
    for (int v = 0; v < mesh.num_vertices(); ++v) nodal[v] = 2.0 + 0.5 * mesh.vertices[v].x();
    const auto s = SurfaceProbe(mesh, m).measure(nodal);
    CHECK(s.mean_u == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(s.dev_u == doctest::Approx(0.5 * 0.6 / std::sqrt(2.0) / 2.0).epsilon(1e-9));
    CHECK(std::abs(s.mean_flux) < 1e-12);
    CHECK(s.dev_flux == doctest::Approx(0.5 / std::sqrt(2.0)).epsilon(1e-9));  // absolute: mean is zero
  }

  TEST_CASE("probe report over a series") {
    TimeSeries ser;
    ser.probes.resize(1);
    ser.probes[0] = {ProbeSample{1.0, 0.5, 0.0, 9.0}, ProbeSample{0.5, 0.01, -1.0, 0.01},
                     ProbeSample{0.1, 0.015, -1e-5, 0.3}};
    const auto r = probe_surface(ser, 0, SurfaceCheck{});
    CHECK(r.max_dev_u == 0.015);  // the t = 0 record is excluded
    CHECK(r.max_dev_flux == 0.3);
    CHECK(r.isothermic);
    CHECK_FALSE(r.constant_flow);
    CHECK(r.resolved_dev_flux == 0.01);
    CHECK(r.resolved_records_flux == 1);
    CHECK_THROWS_AS(probe_surface(ser, 1, SurfaceCheck{}), std::out_of_range);
  }

  TEST_CASE("concentric core: probe deviations on M shrink with refinement") {
    const PhaseConfig c(kUnitDisk, {{1, Disk{Point::Zero(), 0.5}, 2.0}});
    HeatRunOptions o;
    o.probes = {{Point::Zero(), 0.75}};
    o.epsilon = 1e-3;
    double prev_u = 1.0, prev_flux = 1.0;
    for (int n : {24, 48}) {
      const auto run = run_heat(system_for(c, n), o);
      const auto rep = probe_surface(run.series, 0, check_surface(c, o.probes[0]));
      CHECK(rep.max_dev_u < 2e-2);
      CHECK(rep.max_dev_u < prev_u);
      CHECK(rep.resolved_dev_flux < prev_flux);
      prev_u = rep.max_dev_u;
      prev_flux = rep.resolved_dev_flux;
    }
  }
}
