#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "formctl/cbt.hpp"
#include "formctl/collision.hpp"
#include "formctl/common.hpp"
#include "formctl/smc.hpp"
#include "formctl/wmr_dynamics.hpp"

namespace formctl {

enum class Integrator { Rk4, SemiImplicitEuler };

/// How initial robot positions are produced. All randomness is drawn from
/// the scenario seed so runs are reproducible.
struct InitialConditions {
    enum class Mode { Explicit, BasisPlusOffset, Random };
    Mode mode = Mode::BasisPlusOffset;
    /// Explicit stacked positions (mode Explicit).
    Eigen::VectorXd positions;
    /// Global translation of the basis (modes BasisPlusOffset, Random).
    Eigen::Vector2d offset = Eigen::Vector2d::Zero();
    /// Optional per-group translations (mode BasisPlusOffset).
    std::vector<Eigen::Vector2d> group_offsets;
    /// Per-robot uniform-disk jitter radius (BasisPlusOffset) or scatter
    /// radius (Random).
    double radius = 0.0;
};

struct ScenarioConfig {
    GroupPartition partition;
    std::vector<RobotParams> robots;
    InitialConditions initial;
    Eigen::VectorXd formation_basis; ///< length 2n
    CentroidTrajectory trajectory;
    ControllerGains gains;
    PotentialParams potential;
    bool collision_enabled = false;
    /// Run collision mode even if the reachability gain condition fails.
    bool allow_gain_violation = false;
    Integrator integrator = Integrator::Rk4;
    double step = 1e-3;          ///< h [s]
    double duration = 20.0;      ///< T [s]
    double conv_tol = 0.05;      ///< sustained-convergence tolerance [m]
    double conv_hold = 0.5;      ///< time the series must stay below tol [s]
    int record_stride = 1;       ///< keep every k-th step in the result
    std::uint64_t seed = 0;

    int robot_count() const { return partition.total(); }
    void validate() const;
};

/// Recorded time series of one closed-loop run. All matrices are
/// record-major: row k belongs to time[k].
struct SimResult {
    std::vector<double> time;
    Eigen::MatrixXd positions;      ///< 2n columns
    Eigen::MatrixXd velocities;     ///< 2n columns
    Eigen::MatrixXd headings;       ///< n columns
    Eigen::MatrixXd heading_rates;  ///< n columns
    Eigen::MatrixXd shape;          ///< Z, 2n columns
    Eigen::MatrixXd shape_rate;     ///< Z_dot, 2n columns
    Eigen::MatrixXd sliding;        ///< [s_s; s_r; s_c], 2n columns
    Eigen::MatrixXd torques;        ///< [tau_r, tau_l] per robot, 2n columns
    Eigen::VectorXd min_distance;   ///< min pairwise distance per record
    Eigen::MatrixXd error_norms;    ///< columns: intra, inter, centroid
    double max_potential_rate = 0.0; ///< max ||dF_pot/dt|| observed
    double step = 0.0;               ///< integration step of the run
    double record_dt = 0.0;          ///< time between consecutive records

    Eigen::Index records() const { return static_cast<Eigen::Index>(time.size()); }
};

struct BlockTiming {
    std::optional<double> reach_time;       ///< sliding inf-norm sustained below tol
    std::optional<double> error_conv_time;  ///< error 2-norm sustained below tol
    double bound = 0.0;                     ///< Lyapunov settling-time bound
    double initial_lyapunov = 0.0;
    bool within_bound = false;              ///< reach_time <= bound + one step
};

struct ConvergenceReport {
    BlockTiming intra;
    BlockTiming inter;
    BlockTiming centroid;
    std::optional<double> ratio_inter_intra;
    std::optional<double> ratio_centroid_inter;
    double tolerance = 0.0;
    double hold = 0.0;
    double max_potential_rate = 0.0;
    double min_distance = 0.0; ///< min pairwise distance over the run
};

/// Resolved initial stacked positions for a config (deterministic in seed).
Eigen::VectorXd resolve_initial_positions(const ScenarioConfig& config);

/// Closed-loop run: per step evaluate A, B, C, transform, surfaces,
/// equivalent + reaching controls, recover torques, integrate. Torques are
/// held constant across a step. Throws NumericalError (with the step index)
/// if the state diverges, or ConfigError up front. Refuses collision mode
/// when the gain condition fails unless allow_gain_violation is set.
SimResult run_scenario(const ScenarioConfig& config);

/// Full multi-robot integration state.
struct SimState {
    Eigen::VectorXd positions;     ///< 2n
    Eigen::VectorXd velocities;    ///< 2n
    Eigen::VectorXd headings;      ///< n
    Eigen::VectorXd heading_rates; ///< n
};

/// Advances the open-loop robot dynamics by one step with torques held.
SimState integrate_step(const SimState& state, const std::vector<TorqueInput>& torques,
                        const std::vector<RobotParams>& params, double h,
                        Integrator scheme);

/// First sustained crossing times per block, ratios, and the Theorem-style
/// settling bounds computed from the initial sliding values.
ConvergenceReport detect_convergence(const SimResult& result, const ScenarioConfig& config);

/// Integrates the physical and the transformed-domain dynamics side by side
/// with shared torques and returns the maximum ||Phi X - Z|| deviation.
double domain_equivalence_audit(const ScenarioConfig& config, int steps);

} // namespace formctl
