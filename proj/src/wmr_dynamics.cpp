#include "formctl/wmr_dynamics.hpp"

#include <cmath>
#include <string>

namespace formctl {

namespace {
std::string robot_tag(int idx) {
    return idx >= 0 ? " (robot " + std::to_string(idx) + ")" : "";
}
} // namespace

void RobotParams::validate(int robot_index) const {
    if (!(mass > 0.0))
        throw ConfigError("robot mass must be positive" + robot_tag(robot_index));
    if (!(moment_of_inertia > 0.0))
        throw ConfigError("robot moment_of_inertia must be positive" + robot_tag(robot_index));
    if (!(wheel_separation > 0.0))
        throw ConfigError("robot wheel_separation must be positive" + robot_tag(robot_index));
    if (!(wheel_radius > 0.0))
        throw ConfigError("robot wheel_radius must be positive" + robot_tag(robot_index));
    if (std::abs(j_eff()) < 1e-9 * moment_of_inertia)
        throw ConfigError("robot effective inertia I - m d^2 must be nonzero" +
                          robot_tag(robot_index));
    if (com_offset == 0.0)
        throw ConfigError("robot com_offset must be nonzero: the torque input matrix "
                          "is singular at d = 0" + robot_tag(robot_index));
}

Eigen::Matrix2d eval_matrix_a(double heading, double heading_rate) {
    const double s = std::sin(heading);
    const double c = std::cos(heading);
    Eigen::Matrix2d a;
    a << -s * c * heading_rate, -s * s * heading_rate,
          c * c * heading_rate,  s * c * heading_rate;
    return a;
}

Eigen::Matrix2d eval_matrix_b(double heading, const RobotParams& params) {
    const double s = std::sin(heading);
    const double c = std::cos(heading);
    const double mr = params.mass * params.wheel_radius;
    const double dRJr = params.com_offset * params.wheel_separation /
                        (params.j_eff() * params.wheel_radius);
    Eigen::Matrix2d b;
    b << c / mr - dRJr * s, c / mr + dRJr * s,
         s / mr + dRJr * c, s / mr - dRJr * c;
    return b;
}

Eigen::Vector2d eval_vector_c(double heading, double heading_rate, const RobotParams& params) {
    const double w2 = heading_rate * heading_rate;
    return {-params.com_offset * w2 * std::cos(heading),
            -params.com_offset * w2 * std::sin(heading)};
}

RobotAccel robot_accel(const RobotState& state, const TorqueInput& u, const RobotParams& params) {
    const Eigen::Matrix2d a = eval_matrix_a(state.heading, state.heading_rate);
    const Eigen::Matrix2d b = eval_matrix_b(state.heading, params);
    const Eigen::Vector2d c = eval_vector_c(state.heading, state.heading_rate, params);
    RobotAccel out;
    out.linear = a * state.velocity + b * Eigen::Vector2d(u.tau_right, u.tau_left) + c;
    out.angular = params.wheel_separation / (params.j_eff() * params.wheel_radius) *
                  (u.tau_right - u.tau_left);
    return out;
}

AugmentedSystem assemble_augmented(const std::vector<RobotState>& states,
                                   const std::vector<RobotParams>& params,
                                   const std::vector<TorqueInput>& torques) {
    const auto n = states.size();
    if (n == 0 || params.size() != n || torques.size() != n)
        throw ConfigError("assemble_augmented: states/params/torques must have equal "
                          "nonzero length");
    AugmentedSystem sys;
    const auto dim = static_cast<Eigen::Index>(2 * n);
    sys.positions.resize(dim);
    sys.velocities.resize(dim);
    sys.coriolis = Eigen::MatrixXd::Zero(dim, dim);
    sys.input = Eigen::MatrixXd::Zero(dim, dim);
    sys.drift.resize(dim);
    sys.torques.resize(dim);
    for (std::size_t i = 0; i < n; ++i) {
        const auto r = static_cast<Eigen::Index>(2 * i);
        sys.positions.segment<2>(r) = states[i].position;
        sys.velocities.segment<2>(r) = states[i].velocity;
        sys.coriolis.block<2, 2>(r, r) = eval_matrix_a(states[i].heading, states[i].heading_rate);
        sys.input.block<2, 2>(r, r) = eval_matrix_b(states[i].heading, params[i]);
        sys.drift.segment<2>(r) = eval_vector_c(states[i].heading, states[i].heading_rate,
                                                params[i]);
        sys.torques[r] = torques[i].tau_right;
        sys.torques[r + 1] = torques[i].tau_left;
    }
    return sys;
}

} // namespace formctl
