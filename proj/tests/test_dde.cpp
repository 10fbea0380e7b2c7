#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "attractorkit/dde.hpp"
#include "oracles.hpp"

using namespace attractorkit;
using namespace attractorkit::dde;

namespace {

DelayModel scalar_model(double a, double b, double tau, Nonlinearity f = {}) {
    DelayModel m;
    m.dim = 1;
    m.A = {a};
    m.b.is_scalar = true;
    m.b.scalar = b;
    m.tau = tau;
    m.f = f;
    m.lipschitz = f.catalog_lipschitz();
    m.f0_norm = 0.0;
    return m;
}

Nonlinearity tanh_nl(double k) { return nonlinearity_from_name("scaled_tanh", k, 0.0); }

}  // namespace

TEST_CASE("constant solution of x' = 0") {
    const auto m = scalar_model(0.0, 0.0, 1.0);
    const auto phi = make_constant_segment(1.0, 1, 64, 3.25);
    const auto traj = integrate(m, phi, 2.0, 1.0 / 64.0);
    for (double t : {0.0, 0.5, 1.0, 2.0}) {
        double x;
        traj.state_at(t, {&x, 1});
        CHECK(x == doctest::Approx(3.25).epsilon(1e-14));
    }
}

TEST_CASE("delay-free scalar reduces to the exponential") {
    const double a = -0.7;
    const auto m = scalar_model(a, 0.0, 1.0);
    auto phi = make_constant_segment(1.0, 1, 1000, 1.0);
    const auto traj = integrate(m, phi, 1.0, 1e-3);
    double x;
    traj.state_at(1.0, {&x, 1});
    CHECK(std::abs(x - std::exp(a)) < 1e-8);
}

TEST_CASE("pure delayed equation against the symbolic steps oracle") {
    // x'(t) = -x(t-1), phi = 1 on [-1, 0]
    const auto m = scalar_model(0.0, -1.0, 1.0);
    const auto phi = make_constant_segment(1.0, 1, 100, 1.0);
    const auto traj = integrate(m, phi, 3.0, 0.01);

    oracles::SymbolicSteps oracle(-1.0, 1.0, oracles::Polynomial{{1.0}}, 3);
    CHECK(oracle.eval(1.0) == doctest::Approx(0.0).epsilon(1e-14));

    double x1;
    traj.state_at(1.0, {&x1, 1});
    CHECK(std::abs(x1) < 1e-10);
    for (double t = 0.0; t <= 1.0; t += 0.05) {
        double x;
        traj.state_at(t, {&x, 1});
        CHECK(std::abs(x - (1.0 - t)) < 1e-12);  // oracle: x = 1 - t on [0, 1]
        CHECK(std::abs(oracle.eval(t) - (1.0 - t)) < 1e-14);
    }
    for (double t = 1.1; t <= 3.0; t += 0.13) {
        double x;
        traj.state_at(t, {&x, 1});
        CHECK(std::abs(x - oracle.eval(t)) < 1e-9);
    }
}

TEST_CASE("alignment and blow-up errors") {
    const auto m = scalar_model(0.0, -1.0, 1.0);
    const auto phi = make_constant_segment(1.0, 1, 10, 1.0);
    CHECK_THROWS_AS(integrate(m, phi, 1.0, 0.3), UsageError);

    auto blow = scalar_model(150.0, 0.0, 1.0);  // e^{150 t} overflows before t = 5
    const auto phi2 = make_constant_segment(1.0, 1, 32, 4.0);
    CHECK_THROWS_WITH_AS(integrate(blow, phi2, 6.0, 1.0 / 32.0),
                         doctest::Contains("NUMERIC_BLOWUP"), NumericError);
}

TEST_CASE("segment extraction") {
    const auto m = scalar_model(0.0, -1.0, 1.0);
    auto phi = make_uniform_segment(1.0, 1, 50);
    for (size_t i = 0; i < phi.grid.size(); ++i) phi.values[i] = std::sin(3.0 * phi.grid[i]);
    const auto traj = integrate(m, phi, 2.0, 1.0 / 50.0);

    SUBCASE("t = 0 reproduces the start segment at shared grid points") {
        const auto s0 = traj.segment_at(0.0);
        for (size_t i = 0; i < s0.grid.size(); ++i)
            CHECK(s0.values[i] == doctest::Approx(phi.values[i]).epsilon(1e-13));
    }
    SUBCASE("extraction at any interior time yields a valid segment") {
        for (double t : {0.0, 0.313, 1.0, 1.999, 2.0}) {
            const auto seg = traj.segment_at(t);
            seg.validate();
            CHECK(seg.grid.size() == phi.grid.size());
        }
    }
    SUBCASE("constant solution gives constant segments") {
        const auto mc = scalar_model(0.0, 0.0, 1.0);
        const auto c = make_constant_segment(1.0, 1, 50, -2.5);
        const auto tc = integrate(mc, c, 3.0, 1.0 / 50.0);
        const auto seg = tc.segment_at(1.7);
        for (double v : seg.values) CHECK(v == doctest::Approx(-2.5).epsilon(1e-13));
    }
    SUBCASE("x' = -x(t-1), phi = 1: segment at t = 1 is 1 - (1 + theta)") {
        const auto p1 = make_constant_segment(1.0, 1, 50, 1.0);
        const auto t1 = integrate(m, p1, 1.0, 1.0 / 50.0);
        const auto seg = t1.segment_at(1.0);
        for (size_t i = 0; i < seg.grid.size(); ++i)
            CHECK(seg.values[i] == doctest::Approx(1.0 - (1.0 + seg.grid[i])).epsilon(1e-12));
    }
    SUBCASE("out-of-range time") {
        CHECK_THROWS_AS(traj.segment_at(5.0), UsageError);
        CHECK_THROWS_AS(traj.segment_at(-0.5), UsageError);
    }
}

TEST_CASE("semigroup identity and self-consistency") {
    const auto m = scalar_model(-0.4, -0.1, 1.0, tanh_nl(0.2));
    auto phi = make_uniform_segment(1.0, 1, 1000);
    for (size_t i = 0; i < phi.grid.size(); ++i) phi.values[i] = std::cos(2.0 * phi.grid[i]);

    const auto id = semigroup_apply(m, phi, 0.0, 1e-3);
    CHECK(segment_sub(id, integrate(m, phi, 0.0, 1e-3).segment_at(0.0)).norm() == 0.0);

    const auto one_shot = semigroup_apply(m, phi, 2.0, 1e-3);
    const auto two_step = semigroup_apply(m, semigroup_apply(m, phi, 1.0, 1e-3), 1.0, 1e-3);
    CHECK(segment_sub(one_shot, two_step).norm() < 1e-6);
}

TEST_CASE("semigroup law on random segments") {
    const auto m = scalar_model(-0.4, -0.1, 1.0, tanh_nl(0.2));
    Rng rng(91);
    const double fractions[] = {0.25, 0.5, 1.0};
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        auto phi = random_segment(1.0, 1, 1000, rng, 1.5);
        const double s = fractions[trial % 3];
        const double t = fractions[(trial / 3) % 3];
        const auto lhs = semigroup_apply(m, phi, s + t, 1e-3);
        const auto rhs = semigroup_apply(m, semigroup_apply(m, phi, s, 1e-3), t, 1e-3);
        CHECK(segment_sub(lhs, rhs).norm() < 1e-5);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("convergence order against the symbolic oracle") {
    // solution is polynomial of degree 5 on [4, 5]; the one-step scheme is no
    // longer exact there, so the error scales like h^4
    const auto m = scalar_model(0.0, -1.0, 1.0);
    oracles::SymbolicSteps oracle(-1.0, 1.0, oracles::Polynomial{{1.0}}, 5);
    auto run = [&](double h) {
        const auto phi = make_constant_segment(1.0, 1, static_cast<int>(std::lround(1.0 / h)), 1.0);
        const auto traj = integrate(m, phi, 5.0, h);
        double worst = 0.0;
        for (double t = 4.05; t <= 5.0; t += 0.05) {
            double x;
            traj.state_at(t, {&x, 1});
            worst = std::max(worst, std::abs(x - oracle.eval(t)));
        }
        return worst;
    };
    const double e1 = run(0.05);
    const double e2 = run(0.025);
    CHECK(e1 / e2 >= 8.0);
}

TEST_CASE("residual of the delay ODE is O(h^4)") {
    const auto m = scalar_model(-0.5, -0.2, 1.0);
    auto residual = [&](double h) {
        const int N = static_cast<int>(std::lround(1.0 / h));
        const auto phi = make_constant_segment(1.0, 1, N, 1.0);
        const auto traj = integrate(m, phi, 5.0, h);
        double worst = 0.0;
        for (size_t i = N + 2; i + 2 < traj.times.size(); ++i) {
            const double t = traj.times[i];
            const double near_break = std::abs(t - std::round(t));
            if (near_break < 3.0 * h) continue;  // derivative jumps propagate from t = k tau
            const double d = (-traj.values[i + 2] + 8.0 * traj.values[i + 1] -
                              8.0 * traj.values[i - 1] + traj.values[i - 2]) /
                             (12.0 * h);
            const double rhs = m.A[0] * traj.values[i] + m.b.scalar * traj.values[i - N];
            worst = std::max(worst, std::abs(d - rhs));
        }
        return worst;
    };
    const double r1 = residual(0.02);
    const double r2 = residual(0.01);
    CHECK(r1 / r2 >= 8.0);
    CHECK(r2 < 1e-8);
}

TEST_CASE("determinism: identical inputs give byte-identical trajectories") {
    const auto m = scalar_model(-0.3, -0.15, 1.0, tanh_nl(0.1));
    Rng rng(7);
    const auto phi = random_segment(1.0, 1, 200, rng, 2.0);
    const auto t1 = integrate(m, phi, 3.0, 1.0 / 200.0);
    const auto t2 = integrate(m, phi, 3.0, 1.0 / 200.0);
    REQUIRE(t1.values.size() == t2.values.size());
    CHECK(std::memcmp(t1.values.data(), t2.values.data(),
                      t1.values.size() * sizeof(double)) == 0);
}

TEST_CASE("catalog Lipschitz constants hold on sampled pairs") {
    Rng rng(17);
    for (const auto& f : {tanh_nl(0.3), nonlinearity_from_name("scaled_sin", 0.7, 0.0),
                          nonlinearity_from_name("clipped_cubic", 0.5, 2.0)}) {
        const double L = f.catalog_lipschitz();
        for (int trial = 0; trial < 200; ++trial) {
            const auto a = random_segment(1.0, 1, 8, rng, 3.0);
            const auto b = random_segment(1.0, 1, 8, rng, 3.0);
            std::vector<double> va(1), vb(1), fa(1), fb(1);
            a.value_at(-1.0, va);
            b.value_at(-1.0, vb);
            f.eval(va, fa);
            f.eval(vb, fb);
            const double dphi = segment_sub(a, b).norm();
            CHECK(std::abs(fa[0] - fb[0]) <= L * dphi + 1e-12);
        }
        std::vector<double> zero(1, 0.0), f0(1);
        f.eval(zero, f0);
        CHECK(std::abs(f0[0]) == 0.0);  // c1 = 0 across the catalog
    }
}

TEST_CASE("segment norms and validation") {
    auto s = make_uniform_segment(2.0, 2, 16);
    s.values[5] = -4.0;
    s.values[20] = 3.0;
    CHECK(s.norm(VecNorm::MaxAbs) == 4.0);
    CHECK(s.norm(VecNorm::Euclid) == doctest::Approx(4.0));
    s.validate();

    auto bad = s;
    bad.grid[3] = bad.grid[2];
    CHECK_THROWS_AS(bad.validate(), UsageError);
}

TEST_CASE("sine transform pair is exact for band-limited fields") {
    Rng rng(3);
    const int modes = 12;
    std::vector<double> c(modes);
    for (double& x : c) x = rng.uniform(-1.0, 1.0);
    const int m = 4 * modes;
    std::vector<double> phys(m - 1);
    for (int j = 1; j < m; ++j) phys[j - 1] = sine::synth(c, M_PI * j / m);
    const auto back = sine::forward(phys, modes);
    for (int k = 0; k < modes; ++k)
        CHECK(back[k] == doctest::Approx(c[k]).epsilon(1e-12));

    // discrete Parseval: (pi/m) sum u_j^2 = (pi/2) sum c_k^2
    double s = 0.0;
    for (double u : phys) s += u * u;
    const double lhs = std::sqrt(M_PI / m * s);
    CHECK(lhs == doctest::Approx(sine::field_l2_norm(c)).epsilon(1e-10));
}
