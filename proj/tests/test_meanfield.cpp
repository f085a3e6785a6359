#include "doctest.h"

#include <cmath>
#include <random>

#include "rydecay/meanfield.hpp"

using namespace rydecay;

namespace {

MeanFieldParams bistable_point() {
    MeanFieldParams p;
    p.Omega = 2.5;
    p.Delta = -10.2;
    return p;
}

// Point on the Bloch sphere of a single site, written as (n, s_x, s_y).
MeanFieldState bloch(double theta, double phi) {
    return {0.5 * (1 - std::cos(theta)), std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi)};
}

}  // namespace

TEST_CASE("mean-field right-hand side") {
    MeanFieldParams p;
    const auto zero = mf_rhs({0, 0, 0}, p);
    CHECK(zero.n == 0.0);
    CHECK(zero.s_x == 0.0);
    CHECK(zero.s_y == 0.0);

    p.Omega = 1.3;
    CHECK(mf_rhs({0, 0, 0}, p).s_y == doctest::Approx(2.6));

    MeanFieldParams loss;
    loss.V = 0.0;
    loss.gamma = 0.8;
    loss.d = 2;
    const MeanFieldState s{0.3, 0.4, -0.2};
    const auto r = mf_rhs(s, loss);
    const double g = 0.4 * (4 * 2 * 0.3 + 1);
    CHECK(r.n == doctest::Approx(-0.24));
    CHECK(r.s_x == doctest::Approx(-g * 0.4));
    CHECK(r.s_y == doctest::Approx(g * 0.2));

    loss.model = DecayModel::single;
    const auto rs = mf_rhs(s, loss);
    CHECK(rs.s_x == doctest::Approx(-0.4 * 0.4));

    // the two conventions differ only in the sign of the detuning term
    MeanFieldParams a = bistable_point(), b = bistable_point();
    a.sign = SignConvention::as_printed;
    const auto ra = mf_rhs(s, a), rb = mf_rhs(s, b);
    CHECK(ra.n == rb.n);
    CHECK(ra.s_x == rb.s_x);
    CHECK(rb.s_y - ra.s_y == doctest::Approx(2 * b.Delta * s.s_x));
}

TEST_CASE("analytic Jacobian matches finite differences") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (auto model : {DecayModel::single, DecayModel::collective}) {
        MeanFieldParams p = bistable_point();
        p.model = model;
        p.d = 2;
        for (int trial = 0; trial < 10; ++trial) {
            const MeanFieldState s{0.5 + 0.5 * u(rng), u(rng), u(rng)};
            const auto jac = mf_jacobian(s, p);
            for (int c = 0; c < 3; ++c) {
                Eigen::Vector3d e = Eigen::Vector3d::Zero();
                e[c] = 1e-6;
                const Eigen::Vector3d fd =
                    (mf_rhs(MeanFieldState::from(s.vec() + e), p).vec() - mf_rhs(MeanFieldState::from(s.vec() - e), p).vec()) /
                    2e-6;
                CHECK((fd - jac.col(c)).cwiseAbs().maxCoeff() < 1e-6);
            }
        }
    }
}

TEST_CASE("product-state oracle fixes the detuning sign") {
    MeanFieldParams p;
    p.Delta = -3.1;
    p.Omega = 1.7;
    const auto vacuum = mf_oracle_check(6, p, {0, 0, 0});
    CHECK(vacuum.max_deviation() < 1e-9);

    // n = 0.3, s_x = 0.4 with s_y chosen to put the state on the Bloch sphere
    const double sy = std::sqrt(1 - 0.16 - std::pow(1 - 2 * 0.3, 2));
    const MeanFieldState generic{0.3, 0.4, sy};
    CHECK(mf_oracle_check(6, p, generic).max_deviation() < 1e-9);
    p.sign = SignConvention::as_printed;
    CHECK(mf_oracle_check(6, p, generic).max_deviation() > 1e-3);

    std::vector<MeanFieldState> states{generic, bloch(2.0, 0.7), bloch(0.4, -2.0)};
    const auto found = determine_sign_convention(6, p, states);
    REQUIRE(found.has_value());
    CHECK(*found == SignConvention::oracle_verified);

    // single-atom decay: the factor (4dn + 1) collapses to 1
    MeanFieldParams s;
    s.Delta = 0.8;
    s.Omega = 0.6;
    s.model = DecayModel::single;
    CHECK(mf_oracle_check(5, s, generic).max_deviation() < 1e-9);
    MeanFieldParams wrong = s;
    wrong.model = DecayModel::collective;
    const auto mismatch = mf_oracle_check(5, s, generic);
    CHECK(std::abs(mf_rhs(generic, wrong).s_x - mismatch.exact[1]) > 1e-3);

    CHECK_THROWS(mf_oracle_check(6, p, {0.9, 0.9, 0.9}));
}

TEST_CASE("fixed points") {
    MeanFieldParams idle;
    const auto fp0 = find_fixed_points(idle);
    REQUIRE(fp0.size() == 1);
    CHECK(fp0[0].stable);
    CHECK(fp0[0].state.vec().norm() < 1e-12);

    const auto bi = find_fixed_points(bistable_point());
    int stable = 0;
    for (const auto& fp : bi) {
        CHECK(mf_rhs(fp.state, bistable_point()).vec().norm() < 1e-10);
        stable += fp.stable;
    }
    CHECK(bi.size() == 3);
    CHECK(stable == 2);

    MeanFieldParams positive = bistable_point();
    positive.Delta = 5.0;
    const auto mono = find_fixed_points(positive);
    REQUIRE(mono.size() == 1);
    CHECK(mono[0].stable);

    // roots of the cubic are exactly the densities of the fixed points
    const auto c = fixed_point_cubic(bistable_point());
    for (const auto& fp : bi) {
        const double n = fp.state.n;
        CHECK(std::abs(c[0] + n * (c[1] + n * (c[2] + n * c[3]))) < 1e-9 * std::abs(c[3]));
    }

    // the Newton grid alone finds the same roots
    FixedPointOptions grid_only;
    grid_only.polynomial_seeds = false;
    const auto bi_grid = find_fixed_points(bistable_point(), grid_only);
    REQUIRE(bi_grid.size() == bi.size());
    for (std::size_t i = 0; i < bi.size(); ++i)
        CHECK((bi_grid[i].state.vec() - bi[i].state.vec()).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("stability agrees with forward integration") {
    const auto p = bistable_point();
    const auto fps = find_fixed_points(p);
    std::mt19937_64 rng(12);
    std::normal_distribution<double> g;
    for (const auto& fp : fps) {
        const auto stay = integrate_mf(fp.state, p, 5.0, 1e-3, 5000);
        CHECK((stay.states.back().vec() - fp.state.vec()).cwiseAbs().maxCoeff() < 1e-9 + 1e-3 * !fp.stable);
        Eigen::Vector3d kick(g(rng), g(rng), g(rng));
        kick *= 1e-4 / kick.norm();
        const auto moved = integrate_mf(MeanFieldState::from(fp.state.vec() + kick), p, 40.0, 1e-3, 40000);
        const double dist = (moved.states.back().vec() - fp.state.vec()).norm();
        if (fp.stable)
            CHECK(dist < 1e-6);
        else
            CHECK(dist > 1e-2);
    }
}

TEST_CASE("forward integration") {
    MeanFieldParams idle;
    const auto decayed = integrate_mf({0.7, 0.2, -0.5}, idle, 40.0, 1e-3, 1000);
    CHECK(decayed.states.back().vec().norm() < 1e-9);
    CHECK(decayed.times.back() == doctest::Approx(40.0));

    const auto p = bistable_point();
    const auto stable = [&] {
        std::vector<FixedPoint> out;
        for (const auto& fp : find_fixed_points(p))
            if (fp.stable) out.push_back(fp);
        return out;
    }();
    REQUIRE(stable.size() == 2);
    const auto low = integrate_mf({0, 0, 0}, p, 200.0, 1e-3, 200000).states.back();
    const auto high = integrate_mf({1, 0, 0}, p, 200.0, 1e-3, 200000).states.back();
    CHECK((low.vec() - stable[0].state.vec()).norm() < 1e-6);
    CHECK((high.vec() - stable[1].state.vec()).norm() < 1e-6);

    MeanFieldParams wild;
    wild.Omega = 1e3;
    CHECK_THROWS(integrate_mf({0, 0, 0}, wild, 10.0, 0.1));
}

TEST_CASE("dimension is not a rescaling of the interaction") {
    MeanFieldParams a, b;
    a.d = 1;
    a.V = 10;
    b.d = 2;
    b.V = 5;
    const MeanFieldState s{0.4, 0.3, 0.2};
    CHECK(mf_rhs(s, a).n == mf_rhs(s, b).n);
    CHECK(std::abs(mf_rhs(s, a).s_x - mf_rhs(s, b).s_x) > 1e-3);
}

TEST_CASE("phase diagram scan") {
    const auto deltas = linspace(-16.0, 4.0, 41);
    for (const auto& c : scan_phase_diagram(deltas, {0.0}, MeanFieldParams{})) CHECK(c.stable_count == 1);

    // the lobe narrows towards small Omega, so start where this grid resolves it
    const auto omegas = linspace(0.5, 5.0, 19);
    const auto cells = scan_phase_diagram(deltas, omegas, MeanFieldParams{});
    REQUIRE(cells.size() == deltas.size() * omegas.size());
    int bistable = 0;
    for (const auto& c : cells) {
        CHECK(c.error.empty());
        CHECK((c.stable_count == 1 || c.stable_count == 2));
        if (c.stable_count == 2) {
            ++bistable;
            CHECK(c.Delta < 0.0);
        }
    }
    CHECK(bistable > 0);
    CHECK(bistable_components(cells, deltas.size(), omegas.size()) == 1);

    const auto crit = locate_critical_points(cells, deltas.size(), omegas.size(), MeanFieldParams{});
    REQUIRE_FALSE(crit.empty());
    for (const auto& cp : crit) {
        CHECK(cp.converged);
        // a triple root: the cubic and its first two derivatives vanish
        MeanFieldParams q;
        q.Delta = cp.Delta;
        q.Omega = cp.Omega;
        const auto c = fixed_point_cubic(q);
        const double scale = std::abs(c[3]);
        CHECK(std::abs(c[0] + cp.n * (c[1] + cp.n * (c[2] + cp.n * c[3]))) < 1e-8 * scale);
        CHECK(std::abs(c[1] + cp.n * (2 * c[2] + 3 * cp.n * c[3])) < 1e-8 * scale);
        CHECK(std::abs(2 * c[2] + 6 * cp.n * c[3]) < 1e-8 * scale);
    }

    const auto threaded = scan_phase_diagram(deltas, omegas, MeanFieldParams{}, {}, 2);
    for (std::size_t i = 0; i < cells.size(); ++i) CHECK(threaded[i].stable_count == cells[i].stable_count);
}

TEST_CASE("connected components use 8-connectivity") {
    std::vector<PhaseDiagramCell> cells(9);
    for (auto& c : cells) c.stable_count = 1;
    cells[0].stable_count = 2;
    cells[4].stable_count = 2;
    CHECK(bistable_components(cells, 3, 3) == 1);
    cells[4].stable_count = 1;
    cells[8].stable_count = 2;
    CHECK(bistable_components(cells, 3, 3) == 2);
}
