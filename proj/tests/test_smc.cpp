#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "formctl/cli_io.hpp"
#include "formctl/sim_engine.hpp"
#include "formctl/smc.hpp"

using namespace formctl;

namespace {

GroupPartition part(std::vector<int> sizes) {
    GroupPartition p;
    p.group_sizes = std::move(sizes);
    return p;
}

ShapeCoordinates shape_of(const CbtTransform& tf, const Eigen::VectorXd& stacked) {
    return tf.split(stacked);
}

} // namespace

TEST_CASE("gain accessors and validation") {
    ControllerGains g;
    CHECK(g.reaching_magnitude(Block::Centroid) == doctest::Approx(1.0));
    CHECK(g.reaching_magnitude(Block::Inter) == doctest::Approx(10.0));
    CHECK(g.reaching_magnitude(Block::Intra) == doctest::Approx(100.0));
    CHECK(g.reaching_magnitude(Block::Intra) / g.reaching_magnitude(Block::Centroid) ==
          doctest::Approx(1.0 / (g.eps1 * g.eps2)));

    g.eps1 = 1.5;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = ControllerGains{};
    g.slope_inter = 0.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
    g = ControllerGains{};
    g.boundary_layer = -1.0;
    CHECK_THROWS_AS(g.validate(), ConfigError);
}

TEST_CASE("switching function") {
    CHECK(switching(0.0, 0.0) == 0.0);
    CHECK(switching(3.0, 0.0) == 1.0);
    CHECK(switching(-0.5, 0.0) == -1.0);
    CHECK(switching(0.005, 0.01) == doctest::Approx(0.5));
    CHECK(switching(0.5, 0.01) == 1.0);
    CHECK(switching(-0.5, 0.01) == -1.0);
}

TEST_CASE("centroid trajectory derivatives") {
    CentroidTrajectory tr{0.0, 0.0, 1.0, 30.0, 0.1};
    CHECK_NOTHROW(tr.verify_derivatives());
    const double t = 3.4;
    CHECK(tr.position(t)[0] == doctest::Approx(t));
    CHECK(tr.position(t)[1] == doctest::Approx(30.0 * std::sin(0.1 * t)));
    CHECK(tr.velocity(t)[0] == doctest::Approx(1.0));
    CHECK(tr.velocity(t)[1] == doctest::Approx(3.0 * std::cos(0.1 * t)));
    CHECK(tr.acceleration(t)[0] == doctest::Approx(0.0));
    CHECK(tr.acceleration(t)[1] == doctest::Approx(-0.3 * std::sin(0.1 * t)));
}

TEST_CASE("sliding surfaces") {
    const CbtTransform tf(part({3, 3, 3}));
    ControllerGains g;

    const ShapeCoordinates zero = shape_of(tf, Eigen::VectorXd::Zero(18));
    const SlidingState s0 = sliding_surfaces(zero, zero, g);
    CHECK(s0.stacked().cwiseAbs().maxCoeff() == 0.0);

    Eigen::VectorXd err = Eigen::VectorXd::Zero(18);
    err[16] = 1.0;
    err[17] = 2.0;
    const SlidingState s1 = sliding_surfaces(shape_of(tf, err), zero, g);
    CHECK(s1.centroid[0] == doctest::Approx(1.0));
    CHECK(s1.centroid[1] == doctest::Approx(2.0));

    // on the surface: error rate = -slope * error
    const SlidingState s2 = sliding_surfaces(shape_of(tf, err), shape_of(tf, -err), g);
    CHECK(s2.stacked().cwiseAbs().maxCoeff() < 1e-14);

    // potential augmentation adds blockwise
    Eigen::VectorXd pot = Eigen::VectorXd::Constant(18, 0.25);
    const ShapeCoordinates pots = shape_of(tf, pot);
    const SlidingState s3 = sliding_surfaces(zero, zero, g, &pots);
    CHECK((s3.stacked() - pot).cwiseAbs().maxCoeff() < 1e-14);

    CHECK(s1.lyapunov(Block::Centroid) == doctest::Approx(0.5 * (1.0 + 4.0)));
}

TEST_CASE("reaching control magnitudes") {
    ControllerGains g;
    g.boundary_layer = 0.0;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(4);
    CHECK(reaching_control(Block::Intra, s, g).cwiseAbs().maxCoeff() == 0.0);
    s << 0.2, -0.3, 0.0, 5.0;
    const Eigen::VectorXd u = reaching_control(Block::Intra, s, g);
    CHECK(u[0] == doctest::Approx(-100.0));
    CHECK(u[1] == doctest::Approx(100.0));
    CHECK(u[2] == 0.0);
    CHECK(u[3] == doctest::Approx(-100.0));
    const Eigen::VectorXd uc = reaching_control(Block::Centroid, s, g);
    CHECK(uc[0] == doctest::Approx(-1.0));
}

TEST_CASE("equivalent control formula") {
    ControllerGains g;
    const Eigen::VectorXd zero2 = Eigen::VectorXd::Zero(2);
    CHECK(equivalent_control(Block::Centroid, g, zero2, zero2, zero2, zero2)
              .cwiseAbs()
              .maxCoeff() == 0.0);

    Eigen::VectorXd err_rate(2), pzd(2), r(2), zdd(2);
    err_rate << 1.0, -2.0;
    pzd << 0.5, 0.5;
    r << -0.1, 0.2;
    zdd << 3.0, 0.0;
    const Eigen::VectorXd u =
        equivalent_control(Block::Centroid, g, err_rate, pzd, r, zdd);
    CHECK(u[0] == doctest::Approx(-1.0 - 0.5 + 0.1 + 3.0));
    CHECK(u[1] == doctest::Approx(2.0 - 0.5 - 0.2 + 0.0));

    // matrix overload agrees with the preformed-product overload
    Eigen::MatrixXd p_block(2, 4);
    p_block << 1, 0, 2, 0, 0, 1, 0, 2;
    Eigen::VectorXd z_dot(4);
    z_dot << 0.1, 0.2, 0.3, 0.4;
    const Eigen::VectorXd u_mat =
        equivalent_control(Block::Centroid, g, err_rate, p_block, z_dot, r, zdd);
    const Eigen::VectorXd u_vec =
        equivalent_control(Block::Centroid, g, err_rate, p_block * z_dot, r, zdd);
    CHECK((u_mat - u_vec).cwiseAbs().maxCoeff() < 1e-14);

    // potential rate adds on
    Eigen::VectorXd pr(2);
    pr << 7.0, -7.0;
    const Eigen::VectorXd u_pot =
        equivalent_control(Block::Centroid, g, err_rate, pzd, r, zdd, &pr);
    CHECK((u_pot - u - pr).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("desired trajectory from formation basis") {
    const CbtTransform tf(part({3, 3, 3}));
    CentroidTrajectory ctr{0.0, 0.0, 1.0, 30.0, 0.1};
    const DesiredTrajectory des =
        DesiredTrajectory::from_basis(tf, triangle_formation_basis(20.0, 7.0), ctr);
    CHECK(des.intra.head<2>().norm() == doctest::Approx(7.0 / std::sqrt(2.0)));
    CHECK(des.inter.head<2>().norm() == doctest::Approx(20.0 / std::sqrt(2.0)));
    const double t = 2.5;
    const Eigen::VectorXd zp = des.stacked_position(t);
    CHECK((zp.head(12) - des.intra).cwiseAbs().maxCoeff() == 0.0);
    CHECK(zp[16] == doctest::Approx(t));
    const Eigen::VectorXd zv = des.stacked_velocity(t);
    CHECK(zv.head(16).cwiseAbs().maxCoeff() == 0.0); // constant shape targets
    CHECK(zv[16] == doctest::Approx(1.0));
    const Eigen::VectorXd za = des.stacked_acceleration(t);
    CHECK(za[17] == doctest::Approx(-0.3 * std::sin(0.1 * t)));
}

TEST_CASE("settling time bounds") {
    ControllerGains g;
    CHECK(settling_time_bound(Block::Centroid, 0.0, g) == 0.0);
    CHECK(settling_time_bound(Block::Centroid, 1.0, g) == doctest::Approx(2.0));
    CHECK(settling_time_bound(Block::Inter, 1.0, g) == doctest::Approx(2.0 * 0.1));
    CHECK(settling_time_bound(Block::Intra, 1.0, g) == doctest::Approx(2.0 * 0.01));
    CHECK(settling_time_bound(Block::Intra, 4.0, g) /
              settling_time_bound(Block::Centroid, 4.0, g) ==
          doctest::Approx(g.eps1 * g.eps2));
}

TEST_CASE("torque recovery round trip") {
    const CbtTransform tf(part({3, 3, 3}));
    const int n = 9;
    std::mt19937_64 rng(21);
    auto rnd = [&] { return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0; };

    Eigen::MatrixXd input = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i)
        input.block<2, 2>(2 * i, 2 * i) = eval_matrix_b(rnd() * 3.0, RobotParams{});

    Eigen::VectorXd u_s(12), u_r(4), f_c(2);
    for (auto* v : {&u_s, &u_r, &f_c})
        for (Eigen::Index k = 0; k < v->size(); ++k) (*v)[k] = 5.0 * rnd();

    const std::vector<TorqueInput> torques =
        compose_and_recover_torques(u_s, u_r, f_c, tf, input);
    REQUIRE(torques.size() == 9);
    Eigen::VectorXd u(2 * n);
    for (int i = 0; i < n; ++i) {
        u[2 * i] = torques[static_cast<std::size_t>(i)].tau_right;
        u[2 * i + 1] = torques[static_cast<std::size_t>(i)].tau_left;
    }
    Eigen::VectorXd f(2 * n);
    f << u_s, u_r, f_c;
    CHECK((tf.apply(input * u) - f).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("singular input block reports the robot index") {
    const CbtTransform tf(part({2}));
    Eigen::MatrixXd input = Eigen::MatrixXd::Zero(4, 4);
    RobotParams p;
    input.block<2, 2>(0, 0) = eval_matrix_b(0.3, p);
    // robot 1: d = 0 makes the block singular
    p.com_offset = 0.0;
    input.block<2, 2>(2, 2) = eval_matrix_b(0.3, p);
    const Eigen::VectorXd u_s = Eigen::VectorXd::Ones(2);
    const Eigen::VectorXd none;
    const Eigen::VectorXd f_c = Eigen::VectorXd::Ones(2);
    try {
        compose_and_recover_torques(u_s, none, f_c, tf, input);
        FAIL("expected NumericalError");
    } catch (const NumericalError& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("equivalent control keeps the surface stationary over a step") {
    // Closed loop with a tiny reaching gain: ds/dt is dominated by the held
    // torque approximation, so |s| moves O(h) per step at worst.
    ScenarioConfig cfg = preset_paper_scenario();
    cfg.gains.reach_intra = cfg.gains.reach_inter = cfg.gains.reach_centroid = 1e-9;
    cfg.gains.boundary_layer = 0.0;
    cfg.duration = 0.01;
    cfg.step = 1e-4;
    cfg.initial.radius = 0.0; // deterministic, no jitter
    const SimResult res = run_scenario(cfg);
    const double s0 = res.sliding.row(0).cwiseAbs().maxCoeff();
    for (Eigen::Index k = 1; k < res.records(); ++k) {
        const double sk = res.sliding.row(k).cwiseAbs().maxCoeff();
        CHECK(std::abs(sk - s0) < 0.05 * std::max(1.0, s0));
    }
}
