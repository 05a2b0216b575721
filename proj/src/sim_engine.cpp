#include "formctl/sim_engine.hpp"

#include <cmath>
#include <random>
#include <string>

namespace formctl {

namespace {

// Uniform draw in [0, 1) from explicit engine output; keeps the stream
// identical across standard library implementations.
double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

Eigen::Vector2d uniform_disk(std::mt19937_64& rng, double radius) {
    const double ang = 2.0 * M_PI * uniform01(rng);
    const double rad = radius * std::sqrt(uniform01(rng));
    return {rad * std::cos(ang), rad * std::sin(ang)};
}

std::vector<Eigen::Vector2d> unstack(const Eigen::VectorXd& stacked) {
    std::vector<Eigen::Vector2d> out(static_cast<std::size_t>(stacked.size() / 2));
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = stacked.segment<2>(static_cast<Eigen::Index>(2 * i));
    return out;
}

double min_pairwise_distance(const Eigen::VectorXd& positions) {
    const Eigen::Index n = positions.size() / 2;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            best = std::min(best,
                            (positions.segment<2>(2 * i) - positions.segment<2>(2 * j)).norm());
    return best;
}

struct ControlOutput {
    std::vector<TorqueInput> torques;
    SlidingState sliding;
    Eigen::VectorXd shape;      ///< Z
    Eigen::VectorXd shape_rate; ///< Z_dot
    Eigen::VectorXd error;      ///< Z_e
    double potential_rate_norm = 0.0;
};

// One evaluation of the full control pipeline at the current state.
ControlOutput evaluate_control(const SimState& state, double t, const CbtTransform& cbt,
                               const DesiredTrajectory& desired, const ScenarioConfig& cfg) {
    const int n = cbt.robot_count();
    ControlOutput out;
    out.shape = cbt.apply(state.positions);
    out.shape_rate = cbt.apply(state.velocities);
    out.error = out.shape - desired.stacked_position(t);
    const Eigen::VectorXd error_rate = out.shape_rate - desired.stacked_velocity(t);

    const ShapeCoordinates err = cbt.split(out.error);
    const ShapeCoordinates err_rate = cbt.split(error_rate);

    std::optional<ShapeCoordinates> pot;
    std::optional<ShapeCoordinates> pot_rate;
    if (cfg.collision_enabled) {
        const auto pos = unstack(state.positions);
        const auto vel = unstack(state.velocities);
        pot = transformed_potential(stacked_gradient(pos, cfg.potential), cbt);
        pot_rate = potential_rate(pos, vel, cbt, cfg.potential);
        out.potential_rate_norm = pot_rate->stacked().norm();
    }

    out.sliding = sliding_surfaces(err, err_rate, cfg.gains, pot ? &*pot : nullptr);

    // P_block Z_dot rows come from Phi (A X_dot); R from Phi C. The input
    // matrix blocks are needed for torque recovery.
    Eigen::VectorXd a_xdot(2 * n);
    Eigen::VectorXd drift(2 * n);
    Eigen::MatrixXd input = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    for (int i = 0; i < n; ++i) {
        const auto& p = cfg.robots[static_cast<std::size_t>(i)];
        const Eigen::Matrix2d a = eval_matrix_a(state.headings[i], state.heading_rates[i]);
        a_xdot.segment<2>(2 * i) = a * state.velocities.segment<2>(2 * i);
        drift.segment<2>(2 * i) =
            eval_vector_c(state.headings[i], state.heading_rates[i], p);
        input.block<2, 2>(2 * i, 2 * i) = eval_matrix_b(state.headings[i], p);
    }
    const ShapeCoordinates p_zdot = cbt.split(cbt.apply(a_xdot));
    const ShapeCoordinates r = cbt.split(cbt.apply(drift));
    const Eigen::VectorXd desired_accel = desired.stacked_acceleration(t);
    const ShapeCoordinates zdd = cbt.split(desired_accel);

    const Eigen::VectorXd u_intra =
        equivalent_control(Block::Intra, cfg.gains, err_rate.intra, p_zdot.intra, r.intra,
                           zdd.intra, pot_rate ? &pot_rate->intra : nullptr) +
        reaching_control(Block::Intra, out.sliding.intra, cfg.gains);
    const Eigen::VectorXd u_inter =
        equivalent_control(Block::Inter, cfg.gains, err_rate.inter, p_zdot.inter, r.inter,
                           zdd.inter, pot_rate ? &pot_rate->inter : nullptr) +
        reaching_control(Block::Inter, out.sliding.inter, cfg.gains);
    Eigen::VectorXd ctr_pot_rate;
    if (pot_rate) ctr_pot_rate = pot_rate->centroid;
    const Eigen::VectorXd f_c =
        equivalent_control(Block::Centroid, cfg.gains, Eigen::VectorXd(err_rate.centroid),
                           Eigen::VectorXd(p_zdot.centroid), Eigen::VectorXd(r.centroid),
                           Eigen::VectorXd(zdd.centroid),
                           pot_rate ? &ctr_pot_rate : nullptr) +
        reaching_control(Block::Centroid, Eigen::VectorXd(out.sliding.centroid), cfg.gains);

    out.torques = compose_and_recover_torques(u_intra, u_inter, f_c, cbt, input);
    return out;
}

// Open-loop accelerations with torques held.
void eval_derivatives(const Eigen::VectorXd& velocities, const Eigen::VectorXd& headings,
                      const Eigen::VectorXd& heading_rates,
                      const std::vector<TorqueInput>& torques,
                      const std::vector<RobotParams>& params, Eigen::VectorXd& accel,
                      Eigen::VectorXd& heading_accel) {
    const int n = static_cast<int>(params.size());
    accel.resize(2 * n);
    heading_accel.resize(n);
    for (int i = 0; i < n; ++i) {
        RobotState rs;
        rs.position.setZero(); // positions do not enter the dynamics
        rs.velocity = velocities.segment<2>(2 * i);
        rs.heading = headings[i];
        rs.heading_rate = heading_rates[i];
        const RobotAccel a = robot_accel(rs, torques[static_cast<std::size_t>(i)],
                                         params[static_cast<std::size_t>(i)]);
        accel.segment<2>(2 * i) = a.linear;
        heading_accel[i] = a.angular;
    }
}

std::optional<double> sustained_crossing(const std::vector<double>& time,
                                         const Eigen::VectorXd& series, double tol,
                                         double hold) {
    const auto count = static_cast<Eigen::Index>(time.size());
    const double t_end = time.empty() ? 0.0 : time.back();
    Eigen::Index i = 0;
    while (i < count) {
        if (series[i] < tol) {
            Eigen::Index j = i;
            while (j < count && series[j] < tol) ++j;
            if (j == count || time[static_cast<std::size_t>(j - 1)] -
                                      time[static_cast<std::size_t>(i)] >= hold)
                return time[static_cast<std::size_t>(i)];
            // also accept a run that lasts to the end of the series
            if (time[static_cast<std::size_t>(j - 1)] >= t_end - 1e-12)
                return time[static_cast<std::size_t>(i)];
            i = j;
        } else {
            ++i;
        }
    }
    return std::nullopt;
}

} // namespace

void ScenarioConfig::validate() const {
    partition.validate();
    const int n = partition.total();
    if (static_cast<int>(robots.size()) != n)
        throw ConfigError("config: expected " + std::to_string(n) + " robot parameter sets, "
                          "got " + std::to_string(robots.size()));
    for (int i = 0; i < n; ++i) robots[static_cast<std::size_t>(i)].validate(i);
    gains.validate();
    potential.validate();
    if (formation_basis.size() != 2 * n)
        throw ConfigError("config: formation basis must have length 2n = " +
                          std::to_string(2 * n));
    if (!(step > 0.0))
        throw ConfigError("config: integrator step must be positive");
    if (!(duration > step))
        throw ConfigError("config: duration must exceed the integrator step");
    if (!(conv_tol > 0.0))
        throw ConfigError("config: convergence tolerance must be positive");
    if (conv_hold < 0.0)
        throw ConfigError("config: convergence hold time must be nonnegative");
    if (record_stride < 1)
        throw ConfigError("config: record_stride must be at least 1");
    if (initial.mode == InitialConditions::Mode::Explicit &&
        initial.positions.size() != 2 * n)
        throw ConfigError("config: explicit initial positions must have length 2n");
    if (initial.mode == InitialConditions::Mode::BasisPlusOffset &&
        !initial.group_offsets.empty() &&
        static_cast<int>(initial.group_offsets.size()) != partition.group_count())
        throw ConfigError("config: group_offsets must have one entry per group");
    if (initial.radius < 0.0)
        throw ConfigError("config: initial-condition radius must be nonnegative");
    trajectory.verify_derivatives();
}

Eigen::VectorXd resolve_initial_positions(const ScenarioConfig& config) {
    const int n = config.robot_count();
    std::mt19937_64 rng(config.seed);
    switch (config.initial.mode) {
    case InitialConditions::Mode::Explicit:
        return config.initial.positions;
    case InitialConditions::Mode::BasisPlusOffset: {
        Eigen::VectorXd pos = config.formation_basis;
        for (int g = 0; g < config.partition.group_count(); ++g) {
            Eigen::Vector2d goff = Eigen::Vector2d::Zero();
            if (!config.initial.group_offsets.empty())
                goff = config.initial.group_offsets[static_cast<std::size_t>(g)];
            const int base = config.partition.group_offset(g);
            for (int j = 0; j < config.partition.group_sizes[static_cast<std::size_t>(g)];
                 ++j) {
                const int i = base + j;
                Eigen::Vector2d p = pos.segment<2>(2 * i);
                p += config.initial.offset + goff;
                if (config.initial.radius > 0.0)
                    p += uniform_disk(rng, config.initial.radius);
                pos.segment<2>(2 * i) = p;
            }
        }
        return pos;
    }
    case InitialConditions::Mode::Random: {
        Eigen::VectorXd pos(2 * n);
        for (int i = 0; i < n; ++i)
            pos.segment<2>(2 * i) = config.initial.offset + uniform_disk(rng,
                                                                         config.initial.radius);
        return pos;
    }
    }
    throw ConfigError("config: unknown initial-condition mode");
}

SimState integrate_step(const SimState& state, const std::vector<TorqueInput>& torques,
                        const std::vector<RobotParams>& params, double h,
                        Integrator scheme) {
    Eigen::VectorXd accel, hacc;
    SimState next = state;
    if (scheme == Integrator::SemiImplicitEuler) {
        eval_derivatives(state.velocities, state.headings, state.heading_rates, torques,
                         params, accel, hacc);
        next.velocities += h * accel;
        next.positions += h * next.velocities;
        next.heading_rates += h * hacc;
        next.headings += h * next.heading_rates;
        return next;
    }
    // RK4 over (X, V, theta, theta_dot) with torques held.
    struct Deriv {
        Eigen::VectorXd dx, dv, dth, dw;
    };
    auto rhs = [&](const SimState& s) {
        Deriv d;
        eval_derivatives(s.velocities, s.headings, s.heading_rates, torques, params, d.dv,
                         d.dw);
        d.dx = s.velocities;
        d.dth = s.heading_rates;
        return d;
    };
    auto advance = [&](const SimState& s, const Deriv& d, double dt) {
        SimState r = s;
        r.positions += dt * d.dx;
        r.velocities += dt * d.dv;
        r.headings += dt * d.dth;
        r.heading_rates += dt * d.dw;
        return r;
    };
    const Deriv k1 = rhs(state);
    const Deriv k2 = rhs(advance(state, k1, h / 2));
    const Deriv k3 = rhs(advance(state, k2, h / 2));
    const Deriv k4 = rhs(advance(state, k3, h));
    next.positions += h / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
    next.velocities += h / 6.0 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
    next.headings += h / 6.0 * (k1.dth + 2 * k2.dth + 2 * k3.dth + k4.dth);
    next.heading_rates += h / 6.0 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
    return next;
}

SimResult run_scenario(const ScenarioConfig& config) {
    config.validate();
    if (config.collision_enabled && !config.allow_gain_violation) {
        const GainConditionReport gc = check_gain_condition(config.gains, config.potential);
        if (!gc.all_ok())
            throw ConfigError("collision mode refused: reachability gain condition "
                              "delta > F_bar + gamma violated (set allow_gain_violation "
                              "to override)");
    }

    const CbtTransform cbt(config.partition);
    const DesiredTrajectory desired =
        DesiredTrajectory::from_basis(cbt, config.formation_basis, config.trajectory);

    const int n = config.robot_count();
    SimState state;
    state.positions = resolve_initial_positions(config);
    state.velocities = Eigen::VectorXd::Zero(2 * n);
    state.headings = Eigen::VectorXd::Zero(n);
    state.heading_rates = Eigen::VectorXd::Zero(n);

    const auto steps = static_cast<Eigen::Index>(std::llround(config.duration / config.step));
    const Eigen::Index records = steps / config.record_stride + 1;

    SimResult result;
    result.step = config.step;
    result.record_dt = config.step * config.record_stride;
    result.time.reserve(static_cast<std::size_t>(records));
    result.positions.resize(records, 2 * n);
    result.velocities.resize(records, 2 * n);
    result.headings.resize(records, n);
    result.heading_rates.resize(records, n);
    result.shape.resize(records, 2 * n);
    result.shape_rate.resize(records, 2 * n);
    result.sliding.resize(records, 2 * n);
    result.torques.resize(records, 2 * n);
    result.min_distance.resize(records);
    result.error_norms.resize(records, 3);

    Eigen::Index rec = 0;
    for (Eigen::Index k = 0; k <= steps; ++k) {
        const double t = static_cast<double>(k) * config.step;
        if (!state.positions.allFinite() || !state.velocities.allFinite())
            throw NumericalError("simulation diverged at step " + std::to_string(k));
        const ControlOutput ctl = evaluate_control(state, t, cbt, desired, config);
        result.max_potential_rate =
            std::max(result.max_potential_rate, ctl.potential_rate_norm);
        if (k % config.record_stride == 0 && rec < records) {
            result.time.push_back(t);
            result.positions.row(rec) = state.positions.transpose();
            result.velocities.row(rec) = state.velocities.transpose();
            result.headings.row(rec) = state.headings.transpose();
            result.heading_rates.row(rec) = state.heading_rates.transpose();
            result.shape.row(rec) = ctl.shape.transpose();
            result.shape_rate.row(rec) = ctl.shape_rate.transpose();
            result.sliding.row(rec) = ctl.sliding.stacked().transpose();
            for (int i = 0; i < n; ++i) {
                result.torques(rec, 2 * i) = ctl.torques[static_cast<std::size_t>(i)].tau_right;
                result.torques(rec, 2 * i + 1) =
                    ctl.torques[static_cast<std::size_t>(i)].tau_left;
            }
            result.min_distance[rec] = min_pairwise_distance(state.positions);
            const ShapeCoordinates err = cbt.split(ctl.error);
            result.error_norms(rec, 0) = err.intra.norm();
            result.error_norms(rec, 1) = err.inter.norm();
            result.error_norms(rec, 2) = err.centroid.norm();
            ++rec;
        }
        if (k < steps)
            state = integrate_step(state, ctl.torques, config.robots, config.step,
                                   config.integrator);
    }
    return result;
}

ConvergenceReport detect_convergence(const SimResult& result, const ScenarioConfig& config) {
    const CbtTransform cbt(config.partition);
    const int ns = cbt.intra_dim();
    const int nr = cbt.inter_dim();
    const Eigen::Index records = result.records();
    if (records == 0) throw ConfigError("detect_convergence: empty result");

    ConvergenceReport rep;
    rep.tolerance = config.conv_tol;
    rep.hold = config.conv_hold;
    rep.max_potential_rate = result.max_potential_rate;
    rep.min_distance = result.min_distance.minCoeff();

    Eigen::VectorXd s_intra(records), s_inter(records), s_ctr(records);
    for (Eigen::Index k = 0; k < records; ++k) {
        s_intra[k] = result.sliding.row(k).head(ns).cwiseAbs().maxCoeff();
        s_inter[k] = result.sliding.row(k).segment(ns, nr).cwiseAbs().maxCoeff();
        s_ctr[k] = result.sliding.row(k).tail(2).cwiseAbs().maxCoeff();
    }

    auto fill = [&](BlockTiming& bt, Block b, const Eigen::VectorXd& s_norm,
                    const Eigen::VectorXd& e_norm, const Eigen::VectorXd& s0) {
        bt.initial_lyapunov = 0.5 * s0.squaredNorm();
        bt.bound = settling_time_bound(b, bt.initial_lyapunov, config.gains);
        bt.reach_time = sustained_crossing(result.time, s_norm, config.conv_tol,
                                           config.conv_hold);
        bt.error_conv_time = sustained_crossing(result.time, e_norm, config.conv_tol,
                                                config.conv_hold);
        bt.within_bound = bt.reach_time.has_value() &&
                          *bt.reach_time <= bt.bound + result.step + result.record_dt;
    };
    const Eigen::VectorXd sliding0 = result.sliding.row(0).transpose();
    fill(rep.intra, Block::Intra, s_intra, result.error_norms.col(0), sliding0.head(ns));
    fill(rep.inter, Block::Inter, s_inter, result.error_norms.col(1),
         sliding0.segment(ns, nr));
    fill(rep.centroid, Block::Centroid, s_ctr, result.error_norms.col(2), sliding0.tail(2));

    if (rep.intra.reach_time && rep.inter.reach_time && *rep.intra.reach_time > 0.0)
        rep.ratio_inter_intra = *rep.inter.reach_time / *rep.intra.reach_time;
    if (rep.inter.reach_time && rep.centroid.reach_time && *rep.inter.reach_time > 0.0)
        rep.ratio_centroid_inter = *rep.centroid.reach_time / *rep.inter.reach_time;
    return rep;
}

double domain_equivalence_audit(const ScenarioConfig& config, int steps) {
    config.validate();
    const CbtTransform cbt(config.partition);
    const DesiredTrajectory desired =
        DesiredTrajectory::from_basis(cbt, config.formation_basis, config.trajectory);
    const int n = config.robot_count();

    SimState phys;
    phys.positions = resolve_initial_positions(config);
    phys.velocities = Eigen::VectorXd::Zero(2 * n);
    phys.headings = Eigen::VectorXd::Zero(n);
    phys.heading_rates = Eigen::VectorXd::Zero(n);

    // Transformed-domain copy: Z, Z_dot plus its own heading states. Both
    // sides share the per-step torques from the physical controller.
    SimState trans;
    trans.positions = cbt.apply(phys.positions);
    trans.velocities = cbt.apply(phys.velocities);
    trans.headings = phys.headings;
    trans.heading_rates = phys.heading_rates;

    double max_dev = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double t = k * config.step;
        const ControlOutput ctl = evaluate_control(phys, t, cbt, desired, config);
        phys = integrate_step(phys, ctl.torques, config.robots, config.step,
                              config.integrator);

        // Transformed RHS: Z_ddot = Phi A Phi^{-1} Z_dot + Phi (B U + C),
        // integrated with the same scheme and held torques.
        auto rhs = [&](const SimState& s, Eigen::VectorXd& acc, Eigen::VectorXd& hacc) {
            Eigen::VectorXd x_dot = cbt.apply_inverse(s.velocities);
            Eigen::VectorXd phys_acc(2 * n);
            hacc.resize(n);
            for (int i = 0; i < n; ++i) {
                RobotState rs;
                rs.velocity = x_dot.segment<2>(2 * i);
                rs.heading = s.headings[i];
                rs.heading_rate = s.heading_rates[i];
                const RobotAccel a = robot_accel(rs, ctl.torques[static_cast<std::size_t>(i)],
                                                 config.robots[static_cast<std::size_t>(i)]);
                phys_acc.segment<2>(2 * i) = a.linear;
                hacc[i] = a.angular;
            }
            acc = cbt.apply(phys_acc);
        };
        if (config.integrator == Integrator::SemiImplicitEuler) {
            Eigen::VectorXd acc, hacc;
            rhs(trans, acc, hacc);
            trans.velocities += config.step * acc;
            trans.positions += config.step * trans.velocities;
            trans.heading_rates += config.step * hacc;
            trans.headings += config.step * trans.heading_rates;
        } else {
            struct D { Eigen::VectorXd dx, dv, dth, dw; };
            auto deriv = [&](const SimState& s) {
                D d;
                rhs(s, d.dv, d.dw);
                d.dx = s.velocities;
                d.dth = s.heading_rates;
                return d;
            };
            auto adv = [&](const SimState& s, const D& d, double dt) {
                SimState r = s;
                r.positions += dt * d.dx;
                r.velocities += dt * d.dv;
                r.headings += dt * d.dth;
                r.heading_rates += dt * d.dw;
                return r;
            };
            const double h = config.step;
            const D k1 = deriv(trans);
            const D k2 = deriv(adv(trans, k1, h / 2));
            const D k3 = deriv(adv(trans, k2, h / 2));
            const D k4 = deriv(adv(trans, k3, h));
            trans.positions += h / 6.0 * (k1.dx + 2 * k2.dx + 2 * k3.dx + k4.dx);
            trans.velocities += h / 6.0 * (k1.dv + 2 * k2.dv + 2 * k3.dv + k4.dv);
            trans.headings += h / 6.0 * (k1.dth + 2 * k2.dth + 2 * k3.dth + k4.dth);
            trans.heading_rates += h / 6.0 * (k1.dw + 2 * k2.dw + 2 * k3.dw + k4.dw);
        }
        max_dev = std::max(max_dev, (cbt.apply(phys.positions) - trans.positions)
                                        .cwiseAbs()
                                        .maxCoeff());
    }
    return max_dev;
}

} // namespace formctl
