#include "formctl/smc.hpp"

#include <cmath>
#include <string>

namespace formctl {

double ControllerGains::slope(Block b) const {
    switch (b) {
    case Block::Intra: return slope_intra;
    case Block::Inter: return slope_inter;
    case Block::Centroid: return slope_centroid;
    }
    return 0.0;
}

double ControllerGains::reach_gain(Block b) const {
    switch (b) {
    case Block::Intra: return reach_intra;
    case Block::Inter: return reach_inter;
    case Block::Centroid: return reach_centroid;
    }
    return 0.0;
}

double ControllerGains::margin(Block b) const {
    switch (b) {
    case Block::Intra: return margin_intra;
    case Block::Inter: return margin_inter;
    case Block::Centroid: return margin_centroid;
    }
    return 0.0;
}

double ControllerGains::reaching_magnitude(Block b) const {
    switch (b) {
    case Block::Intra: return reach_intra / (eps1 * eps2);
    case Block::Inter: return reach_inter / eps1;
    case Block::Centroid: return reach_centroid;
    }
    return 0.0;
}

void ControllerGains::validate() const {
    auto positive = [](double v, const char* name) {
        if (!(v > 0.0))
            throw ConfigError(std::string("gains: ") + name + " must be positive");
    };
    positive(slope_intra, "slope_intra");
    positive(slope_inter, "slope_inter");
    positive(slope_centroid, "slope_centroid");
    positive(reach_intra, "reach_intra");
    positive(reach_inter, "reach_inter");
    positive(reach_centroid, "reach_centroid");
    positive(margin_intra, "margin_intra");
    positive(margin_inter, "margin_inter");
    positive(margin_centroid, "margin_centroid");
    if (!(eps1 > 0.0 && eps1 <= 1.0) || !(eps2 > 0.0 && eps2 <= 1.0))
        throw ConfigError("gains: eps1 and eps2 must lie in (0, 1]");
    if (boundary_layer < 0.0)
        throw ConfigError("gains: boundary_layer must be nonnegative");
}

Eigen::Vector2d CentroidTrajectory::position(double t) const {
    return {x0 + speed_x * t, y0 + amplitude * std::sin(omega * t)};
}

Eigen::Vector2d CentroidTrajectory::velocity(double t) const {
    return {speed_x, amplitude * omega * std::cos(omega * t)};
}

Eigen::Vector2d CentroidTrajectory::acceleration(double t) const {
    return {0.0, -amplitude * omega * omega * std::sin(omega * t)};
}

void CentroidTrajectory::verify_derivatives(double rel_tol) const {
    const double eps = 1e-6;
    for (double t : {0.0, 0.37, 2.0, 11.5}) {
        const Eigen::Vector2d v_fd = (position(t + eps) - position(t - eps)) / (2 * eps);
        const Eigen::Vector2d a_fd = (velocity(t + eps) - velocity(t - eps)) / (2 * eps);
        const double scale_v = std::max(1.0, velocity(t).norm());
        const double scale_a = std::max(1.0, acceleration(t).norm());
        if ((v_fd - velocity(t)).norm() > rel_tol * scale_v ||
            (a_fd - acceleration(t)).norm() > rel_tol * scale_a)
            throw ConfigError("trajectory: analytic derivatives disagree with finite "
                              "differences");
    }
}

DesiredTrajectory DesiredTrajectory::from_basis(const CbtTransform& transform,
                                                const Eigen::VectorXd& basis,
                                                const CentroidTrajectory& centroid) {
    if (basis.size() != 2 * transform.robot_count())
        throw ConfigError("formation basis must have length 2n");
    const ShapeCoordinates shape = transform.to_shape(basis);
    DesiredTrajectory out;
    out.intra = shape.intra;
    out.inter = shape.inter;
    out.centroid = centroid;
    out.centroid.verify_derivatives();
    return out;
}

Eigen::VectorXd DesiredTrajectory::stacked_position(double t) const {
    Eigen::VectorXd out(intra.size() + inter.size() + 2);
    out << intra, inter, centroid.position(t);
    return out;
}

Eigen::VectorXd DesiredTrajectory::stacked_velocity(double t) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(intra.size() + inter.size() + 2);
    out.tail<2>() = centroid.velocity(t);
    return out;
}

Eigen::VectorXd DesiredTrajectory::stacked_acceleration(double t) const {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(intra.size() + inter.size() + 2);
    out.tail<2>() = centroid.acceleration(t);
    return out;
}

double SlidingState::lyapunov(Block b) const {
    return 0.5 * block(b).squaredNorm();
}

Eigen::VectorXd SlidingState::block(Block b) const {
    switch (b) {
    case Block::Intra: return intra;
    case Block::Inter: return inter;
    case Block::Centroid: return centroid;
    }
    return intra;
}

Eigen::VectorXd SlidingState::stacked() const {
    Eigen::VectorXd out(intra.size() + inter.size() + 2);
    out << intra, inter, centroid;
    return out;
}

double switching(double s, double boundary_layer) {
    if (boundary_layer > 0.0) {
        const double v = s / boundary_layer;
        return v > 1.0 ? 1.0 : (v < -1.0 ? -1.0 : v);
    }
    return s > 0.0 ? 1.0 : (s < 0.0 ? -1.0 : 0.0);
}

SlidingState sliding_surfaces(const ShapeCoordinates& shape_error,
                              const ShapeCoordinates& shape_error_rate,
                              const ControllerGains& gains,
                              const ShapeCoordinates* transformed_potential) {
    SlidingState s;
    s.intra = gains.slope_intra * shape_error.intra + shape_error_rate.intra;
    s.inter = gains.slope_inter * shape_error.inter + shape_error_rate.inter;
    s.centroid = gains.slope_centroid * shape_error.centroid + shape_error_rate.centroid;
    if (transformed_potential) {
        s.intra += transformed_potential->intra;
        s.inter += transformed_potential->inter;
        s.centroid += transformed_potential->centroid;
    }
    return s;
}

Eigen::VectorXd equivalent_control(Block block, const ControllerGains& gains,
                                   const Eigen::VectorXd& error_rate,
                                   const Eigen::VectorXd& p_block_times_zdot,
                                   const Eigen::VectorXd& r_block,
                                   const Eigen::VectorXd& desired_accel,
                                   const Eigen::VectorXd* potential_rate) {
    Eigen::VectorXd u = -gains.slope(block) * error_rate - p_block_times_zdot - r_block +
                        desired_accel;
    if (potential_rate) u += *potential_rate;
    return u;
}

Eigen::VectorXd equivalent_control(Block block, const ControllerGains& gains,
                                   const Eigen::VectorXd& error_rate,
                                   const Eigen::MatrixXd& p_block,
                                   const Eigen::VectorXd& z_dot,
                                   const Eigen::VectorXd& r_block,
                                   const Eigen::VectorXd& desired_accel,
                                   const Eigen::VectorXd* potential_rate) {
    return equivalent_control(block, gains, error_rate, Eigen::VectorXd(p_block * z_dot),
                              r_block, desired_accel, potential_rate);
}

Eigen::VectorXd reaching_control(Block block, const Eigen::VectorXd& sliding,
                                 const ControllerGains& gains) {
    const double mag = gains.reaching_magnitude(block);
    Eigen::VectorXd out(sliding.size());
    for (Eigen::Index i = 0; i < sliding.size(); ++i)
        out[i] = -mag * switching(sliding[i], gains.boundary_layer);
    return out;
}

std::vector<TorqueInput> compose_and_recover_torques(const Eigen::VectorXd& intra_control,
                                                     const Eigen::VectorXd& inter_control,
                                                     const Eigen::VectorXd& centroid_control,
                                                     const CbtTransform& transform,
                                                     const Eigen::MatrixXd& input_matrix) {
    const int n = transform.robot_count();
    if (intra_control.size() != transform.intra_dim() ||
        inter_control.size() != transform.inter_dim() || centroid_control.size() != 2)
        throw ConfigError("compose_and_recover_torques: block dimension mismatch");
    Eigen::VectorXd f(2 * n);
    f << intra_control, inter_control, centroid_control;
    const Eigen::VectorXd w = transform.apply_inverse(f);
    std::vector<TorqueInput> torques(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        const Eigen::Matrix2d b = input_matrix.block<2, 2>(2 * i, 2 * i);
        const double det = b.determinant();
        if (std::abs(det) < 1e-12)
            throw NumericalError("input matrix numerically singular for robot " +
                                 std::to_string(i));
        const Eigen::Vector2d u = b.inverse() * w.segment<2>(2 * i);
        torques[static_cast<std::size_t>(i)] = {u[0], u[1]};
    }
    return torques;
}

double settling_time_bound(Block block, double lyapunov0, const ControllerGains& gains) {
    if (lyapunov0 < 0.0)
        throw ConfigError("settling_time_bound: negative Lyapunov value");
    const double root = std::sqrt(lyapunov0);
    switch (block) {
    case Block::Centroid: return 2.0 * root / gains.reach_centroid;
    case Block::Inter: return 2.0 * gains.eps1 * root / gains.reach_inter;
    case Block::Intra: return 2.0 * gains.eps1 * gains.eps2 * root / gains.reach_intra;
    }
    return 0.0;
}

} // namespace formctl
