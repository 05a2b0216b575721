#pragma once

#include <Eigen/Dense>
#include <vector>

#include "formctl/common.hpp"

namespace formctl {

/// Physical constants of one differential-drive wheeled mobile robot.
struct RobotParams {
    double mass = 1.0;              ///< m [kg]
    double moment_of_inertia = 1.0; ///< I [kg m^2]
    double wheel_separation = 0.4;  ///< R, distance between wheels [m]
    double wheel_radius = 0.1;      ///< r [m]
    double com_offset = 0.1;        ///< d, wheel axis to center of mass [m]

    /// Effective inertia J = I - m d^2.
    double j_eff() const { return moment_of_inertia - mass * com_offset * com_offset; }

    /// Throws ConfigError if any constant is out of range. com_offset must be
    /// nonzero: det B = -2dR/(mJr^2) and torque recovery needs B invertible.
    void validate(int robot_index = -1) const;
};

/// Planar kinematic state of one robot.
struct RobotState {
    Eigen::Vector2d position = Eigen::Vector2d::Zero();
    Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
    double heading = 0.0;      ///< theta [rad]
    double heading_rate = 0.0; ///< theta_dot [rad/s]
};

/// Right/left wheel torques.
struct TorqueInput {
    double tau_right = 0.0;
    double tau_left = 0.0;
};

/// Stacked n-robot system with block-diagonal coefficient matrices.
struct AugmentedSystem {
    Eigen::VectorXd positions;  ///< X in R^{2n}
    Eigen::VectorXd velocities; ///< X_dot in R^{2n}
    Eigen::MatrixXd coriolis;   ///< block-diagonal A in R^{2n x 2n}
    Eigen::MatrixXd input;      ///< block-diagonal B in R^{2n x 2n}
    Eigen::VectorXd drift;      ///< stacked C in R^{2n}
    Eigen::VectorXd torques;    ///< stacked U in R^{2n}

    /// X_ddot = A X_dot + B U + C evaluated from the stored blocks.
    Eigen::VectorXd accelerations() const {
        return coriolis * velocities + input * torques + drift;
    }
};

/// Velocity-coupling matrix A(theta, theta_dot); linear in theta_dot, trace 0.
Eigen::Matrix2d eval_matrix_a(double heading, double heading_rate);

/// Torque input matrix B(theta). det B = -2dR/(mJr^2) for every heading.
Eigen::Matrix2d eval_matrix_b(double heading, const RobotParams& params);

/// Centripetal drift C(theta, theta_dot); norm is d*theta_dot^2.
Eigen::Vector2d eval_vector_c(double heading, double heading_rate, const RobotParams& params);

/// Single-robot accelerations: p_ddot = A p_dot + B u + C and
/// theta_ddot = (R / (J r)) (tau_r - tau_l).
struct RobotAccel {
    Eigen::Vector2d linear;
    double angular;
};
RobotAccel robot_accel(const RobotState& state, const TorqueInput& u, const RobotParams& params);

/// Stacks n robots into the block-diagonal augmented form.
/// Throws ConfigError on list length mismatch or empty input.
AugmentedSystem assemble_augmented(const std::vector<RobotState>& states,
                                   const std::vector<RobotParams>& params,
                                   const std::vector<TorqueInput>& torques);

} // namespace formctl
