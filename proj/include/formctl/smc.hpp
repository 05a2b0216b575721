#pragma once

#include <Eigen/Dense>
#include <vector>

#include "formctl/cbt.hpp"
#include "formctl/common.hpp"
#include "formctl/wmr_dynamics.hpp"

namespace formctl {

/// The three control subsystems, fastest to slowest.
enum class Block { Intra, Inter, Centroid };

/// Gains of the three sliding-mode laws. The perturbation scalars divide
/// the reaching gains (inter by eps1, intra by eps1*eps2) so the subsystems
/// reach their surfaces on stretched time scales.
struct ControllerGains {
    double slope_intra = 1.0;    ///< s [1/s]
    double slope_inter = 1.0;    ///< r [1/s]
    double slope_centroid = 1.0; ///< c [1/s]
    double reach_intra = 1.0;    ///< delta_s
    double reach_inter = 1.0;    ///< delta_r
    double reach_centroid = 1.0; ///< delta_c
    double eps1 = 0.1;
    double eps2 = 0.1;
    /// Boundary-layer half width; 0 selects pure sgn.
    double boundary_layer = 1e-3;
    /// Collision-mode reachability margins gamma.
    double margin_intra = 0.3;
    double margin_inter = 0.3;
    double margin_centroid = 0.3;

    double slope(Block b) const;
    double reach_gain(Block b) const;
    double margin(Block b) const;
    /// Effective reaching magnitude: delta, delta/eps1, delta/(eps1 eps2).
    double reaching_magnitude(Block b) const;
    void validate() const;
};

/// Desired centroid trajectory z_cd(t) = (x0 + vx t, y0 + A sin(w t)) with
/// analytic first and second derivatives.
struct CentroidTrajectory {
    double x0 = 0.0;
    double y0 = 0.0;
    double speed_x = 0.0;
    double amplitude = 0.0;
    double omega = 0.0;

    Eigen::Vector2d position(double t) const;
    Eigen::Vector2d velocity(double t) const;
    Eigen::Vector2d acceleration(double t) const;
    /// Cross-checks the analytic derivatives against central finite
    /// differences at a few sample times; throws ConfigError on mismatch.
    void verify_derivatives(double rel_tol = 1e-6) const;
};

/// Desired shape coordinates: constant intra/inter shape vectors plus the
/// centroid trajectory. Built from a formation basis via the transform
/// (centroid row replaced by the trajectory).
struct DesiredTrajectory {
    Eigen::VectorXd intra; ///< Z_sd
    Eigen::VectorXd inter; ///< Z_rd
    CentroidTrajectory centroid;

    static DesiredTrajectory from_basis(const CbtTransform& transform,
                                        const Eigen::VectorXd& basis,
                                        const CentroidTrajectory& centroid);

    Eigen::VectorXd stacked_position(double t) const;
    Eigen::VectorXd stacked_velocity(double t) const;
    Eigen::VectorXd stacked_acceleration(double t) const;
};

/// Per-block sliding variables and their Lyapunov values V = 0.5 s^T s.
struct SlidingState {
    Eigen::VectorXd intra;
    Eigen::VectorXd inter;
    Eigen::Vector2d centroid;

    double lyapunov(Block b) const;
    Eigen::VectorXd block(Block b) const;
    Eigen::VectorXd stacked() const;
};

/// sgn with sgn(0) = 0, or the boundary-layer saturation when width > 0.
double switching(double s, double boundary_layer);

/// s_s = s Z_se + Z_se_dot, s_r = r Z_re + Z_re_dot, s_c = c z_ce + z_ce_dot,
/// each optionally augmented by the transformed potential blocks.
SlidingState sliding_surfaces(const ShapeCoordinates& shape_error,
                              const ShapeCoordinates& shape_error_rate,
                              const ControllerGains& gains,
                              const ShapeCoordinates* transformed_potential = nullptr);

/// Equivalent control for one block:
/// -(slope) Z_e_dot - P_block Z_dot - R_block + Z_d_ddot (+ dF_pot/dt).
/// `p_block_times_zdot` is the already-formed product P_block * Z_dot.
Eigen::VectorXd equivalent_control(Block block, const ControllerGains& gains,
                                   const Eigen::VectorXd& error_rate,
                                   const Eigen::VectorXd& p_block_times_zdot,
                                   const Eigen::VectorXd& r_block,
                                   const Eigen::VectorXd& desired_accel,
                                   const Eigen::VectorXd* potential_rate = nullptr);

/// Matrix-form overload matching Eq-level usage in tests.
Eigen::VectorXd equivalent_control(Block block, const ControllerGains& gains,
                                   const Eigen::VectorXd& error_rate,
                                   const Eigen::MatrixXd& p_block,
                                   const Eigen::VectorXd& z_dot,
                                   const Eigen::VectorXd& r_block,
                                   const Eigen::VectorXd& desired_accel,
                                   const Eigen::VectorXd* potential_rate = nullptr);

/// Discontinuous reaching term -reaching_magnitude(block) * sgn(s),
/// componentwise, with optional boundary-layer saturation.
Eigen::VectorXd reaching_control(Block block, const Eigen::VectorXd& sliding,
                                 const ControllerGains& gains);

/// Inverts F = Phi B U for the physical wheel torques given the stacked
/// transformed-domain control [u_s; u_r; f_c]. Throws NumericalError with
/// the robot index if a per-robot input block is numerically singular.
std::vector<TorqueInput> compose_and_recover_torques(const Eigen::VectorXd& intra_control,
                                                     const Eigen::VectorXd& inter_control,
                                                     const Eigen::VectorXd& centroid_control,
                                                     const CbtTransform& transform,
                                                     const Eigen::MatrixXd& input_matrix);

/// Finite-time bound on surface reach: centroid 2 sqrt(V0)/delta_c, inter
/// 2 eps1 sqrt(V0)/delta_r, intra 2 eps1 eps2 sqrt(V0)/delta_s.
double settling_time_bound(Block block, double lyapunov0, const ControllerGains& gains);

} // namespace formctl
