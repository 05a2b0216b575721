// End-to-end acceptance suite. Each test prints one PASS/FAIL line so the
// overall gate can be read off the log directly.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "formctl/cli_io.hpp"
#include "formctl/sim_engine.hpp"

using namespace formctl;
namespace fs = std::filesystem;

namespace {

void verdict(int index, const char* name, bool ok) {
    std::printf("ACCEPTANCE %d %-28s %s\n", index, name, ok ? "PASS" : "FAIL");
    std::fflush(stdout);
    CHECK_MESSAGE(ok, name);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
}

} // namespace

TEST_CASE("three time scales on the nine-robot scenario") {
    ScenarioConfig cfg = preset_paper_scenario();
    cfg.gains.boundary_layer = 0.0; // pure switching
    cfg.integrator = Integrator::SemiImplicitEuler;
    cfg.step = 1e-4;
    cfg.record_stride = 10;
    const SimResult res = run_scenario(cfg);
    const ConvergenceReport rep = detect_convergence(res, cfg);

    bool ok = rep.intra.reach_time && rep.inter.reach_time && rep.centroid.reach_time;
    if (ok) {
        const double ts = *rep.intra.reach_time;
        const double tr = *rep.inter.reach_time;
        const double tc = *rep.centroid.reach_time;
        std::printf("  reach times: intra %.3f s, inter %.3f s, centroid %.3f s\n", ts,
                    tr, tc);
        ok = ts >= 0.02 && ts <= 0.5 && tr >= 0.2 && tr <= 5.0 && tc >= 2.0 &&
             tc <= 20.0 && ts < tr && tr < tc;
        ok = ok && rep.ratio_inter_intra && *rep.ratio_inter_intra >= 3.0 &&
             *rep.ratio_inter_intra <= 30.0 && rep.ratio_centroid_inter &&
             *rep.ratio_centroid_inter >= 3.0 && *rep.ratio_centroid_inter <= 30.0;
    }
    verdict(1, "time-scale separation", ok);
}

TEST_CASE("surface reach times respect the settling bounds") {
    bool ok = true;
    for (std::uint64_t seed = 1; seed <= 20 && ok; ++seed) {
        ScenarioConfig cfg = preset_paper_scenario();
        cfg.gains.boundary_layer = 0.0;
        cfg.integrator = Integrator::SemiImplicitEuler;
        cfg.step = 2e-4;
        cfg.record_stride = 5;
        cfg.initial.radius = 5.0;
        cfg.seed = seed;
        const SimResult res = run_scenario(cfg);
        const ConvergenceReport rep = detect_convergence(res, cfg);
        for (const BlockTiming* bt : {&rep.intra, &rep.inter, &rep.centroid}) {
            if (!bt->reach_time || *bt->reach_time > bt->bound + res.step + res.record_dt)
                ok = false;
        }
    }
    verdict(2, "finite-time reach bounds", ok);
}

TEST_CASE("physical and transformed domains stay equivalent") {
    const double dev = domain_equivalence_audit(preset_paper_scenario(), 1000);
    std::printf("  max domain deviation: %.3e\n", dev);
    verdict(3, "domain equivalence", dev < 1e-6);
}

TEST_CASE("transform properties over all small partitions") {
    bool ok = true;
    std::mt19937_64 rng(99);
    std::vector<std::vector<int>> partitions;
    std::vector<int> current;
    auto enumerate = [&](auto&& self, int m_left) -> void {
        if (!current.empty()) partitions.push_back(current);
        if (m_left == 0) return;
        for (int s = 2; s <= 6; ++s) {
            current.push_back(s);
            self(self, m_left - 1);
            current.pop_back();
        }
    };
    enumerate(enumerate, 5);

    for (const auto& sizes : partitions) {
        GroupPartition part;
        part.group_sizes = sizes;
        const CbtTransform tf(part);
        const int n = tf.robot_count();
        const int m = tf.group_count();

        const Eigen::MatrixXd& phi = tf.coefficients();
        if ((phi * tf.inverse_coefficients() - Eigen::MatrixXd::Identity(n, n))
                .cwiseAbs()
                .maxCoeff() >= 1e-10)
            ok = false;
        // zero row sums for shape rows, centroid row 1/n
        for (int rrow = 0; rrow < n - 1; ++rrow)
            if (std::abs(phi.row(rrow).sum()) > 1e-12) ok = false;
        if ((phi.row(n - 1) - Eigen::RowVectorXd::Constant(n, 1.0 / n)).cwiseAbs().maxCoeff() >
            1e-14)
            ok = false;

        Eigen::VectorXd x(2 * n);
        for (Eigen::Index i = 0; i < x.size(); ++i) x[i] = uniform(rng, -10, 10);
        const ShapeCoordinates z = tf.to_shape(x);
        Eigen::VectorXd xt = x;
        const Eigen::Vector2d t(2.5, -4.0);
        for (int i = 0; i < n; ++i) xt.segment<2>(2 * i) += t;
        const ShapeCoordinates zt = tf.to_shape(xt);
        if ((zt.intra - z.intra).cwiseAbs().maxCoeff() > 1e-12) ok = false;
        if (m > 1 && (zt.inter - z.inter).cwiseAbs().maxCoeff() > 1e-12) ok = false;
    }

    // three-robot rows equal the published two- and three-body instances exactly
    const Eigen::MatrixXd r3 = jacobi_rows(3);
    ok = ok && r3(0, 0) == -1.0 / std::sqrt(2.0) && r3(0, 1) == 1.0 / std::sqrt(2.0) &&
         r3(0, 2) == 0.0 && r3(1, 0) == -0.5 && r3(1, 1) == -0.5 && r3(1, 2) == 1.0;
    std::printf("  partitions checked: %zu\n", partitions.size());
    verdict(4, "transform property suite", ok);
}

TEST_CASE("input-matrix determinant identity") {
    std::mt19937_64 rng(7);
    bool ok = true;
    for (int k = 0; k < 100; ++k) {
        RobotParams p;
        p.mass = uniform(rng, 0.5, 5.0);
        p.wheel_radius = uniform(rng, 0.05, 0.5);
        p.wheel_separation = uniform(rng, 0.2, 1.0);
        p.com_offset = uniform(rng, 0.02, 0.4) * (k % 2 ? 1.0 : -1.0);
        p.moment_of_inertia = uniform(rng, 0.5, 3.0);
        const double th = uniform(rng, -6.0, 6.0);
        const double expected = -2.0 * p.com_offset * p.wheel_separation /
                                (p.mass * p.j_eff() * p.wheel_radius * p.wheel_radius);
        const double got = eval_matrix_b(th, p).determinant();
        if (std::abs(got - expected) > 1e-10 * std::max(1.0, std::abs(expected)))
            ok = false;
    }
    verdict(5, "determinant identity", ok);
}

TEST_CASE("collision avoidance on the head-on scenario") {
    const ScenarioConfig base = preset_headon_scenario();
    const SimResult off = run_scenario(base);
    const double baseline = off.min_distance.minCoeff();

    ScenarioConfig on = base;
    on.collision_enabled = true;
    const SimResult res = run_scenario(on);
    const ConvergenceReport rep = detect_convergence(res, on);

    // first interaction: any pair inside the sensing radius
    Eigen::Index first = res.records();
    for (Eigen::Index k = 0; k < res.records(); ++k)
        if (res.min_distance[k] < on.potential.sensing_radius) {
            first = k;
            break;
        }
    bool ok = baseline < 0.3 && first < res.records();
    double worst_after = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = first; k < res.records() && ok; ++k)
        worst_after = std::min(worst_after, res.min_distance[k]);
    ok = ok && worst_after > 2.0 * baseline;
    const Eigen::VectorXd final_err =
        res.error_norms.row(res.records() - 1).transpose();
    ok = ok && final_err.maxCoeff() < on.conv_tol;
    std::printf("  baseline min %.3f m, avoidance min %.3f m, final error %.4f\n",
                baseline, worst_after, final_err.maxCoeff());
    (void)rep;
    verdict(6, "collision avoidance", ok);
}

TEST_CASE("analytic potential rate agrees with finite differences") {
    GroupPartition part;
    part.group_sizes = {2, 2};
    const CbtTransform tf(part);
    PotentialParams pp;
    std::mt19937_64 rng(55);
    bool ok = true;
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<Eigen::Vector2d> pos(4), vel(4);
        for (int i = 0; i < 4; ++i) {
            pos[i] = {uniform(rng, -2, 2), uniform(rng, -2, 2)};
            vel[i] = {uniform(rng, -1, 1), uniform(rng, -1, 1)};
        }
        const Eigen::VectorXd analytic = potential_rate(pos, vel, tf, pp).stacked();
        const double tau = 1e-6;
        auto at = [&](double dt) {
            std::vector<Eigen::Vector2d> p2(4);
            for (int i = 0; i < 4; ++i) p2[i] = pos[i] + dt * vel[i];
            return transformed_potential(stacked_gradient(p2, pp), tf).stacked();
        };
        const Eigen::VectorXd fd = (at(tau) - at(-tau)) / (2.0 * tau);
        if ((analytic - fd).norm() > 1e-6 * std::max(1.0, fd.norm())) ok = false;
    }
    verdict(7, "potential-rate gradient", ok);
}

TEST_CASE("seeded runs are byte-identical") {
    ScenarioConfig cfg = preset_paper_scenario();
    cfg.duration = 2.0;
    const fs::path dir_a = fs::temp_directory_path() / "formctl_acc_a";
    const fs::path dir_b = fs::temp_directory_path() / "formctl_acc_b";
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    for (const fs::path& dir : {dir_a, dir_b}) {
        const SimResult res = run_scenario(cfg);
        write_outputs(res, detect_convergence(res, cfg), cfg, dir);
    }
    bool ok = true;
    for (const char* name : {"trajectory.csv", "shape.csv", "mindist.csv", "report.json"})
        if (slurp(dir_a / name) != slurp(dir_b / name)) ok = false;
    fs::remove_all(dir_a);
    fs::remove_all(dir_b);
    verdict(8, "determinism", ok);
}
