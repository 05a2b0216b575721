#include "formctl/collision.hpp"

#include <cmath>

namespace formctl {

void PotentialParams::validate() const {
    if (!(amplitude > 0.0))
        throw ConfigError("potential: amplitude must be positive");
    if (!(length_scale > 0.0))
        throw ConfigError("potential: length_scale must be positive");
    if (!(sensing_radius > 0.0))
        throw ConfigError("potential: sensing_radius must be positive");
    if (rate_bound_intra < 0.0 || rate_bound_inter < 0.0 || rate_bound_centroid < 0.0)
        throw ConfigError("potential: rate bounds must be nonnegative");
    if (!(probe_speed > 0.0))
        throw ConfigError("potential: probe_speed must be positive");
}

double PotentialParams::rate_bound(Block b) const {
    switch (b) {
    case Block::Intra: return rate_bound_intra;
    case Block::Inter: return rate_bound_inter;
    case Block::Centroid: return rate_bound_centroid;
    }
    return 0.0;
}

double scalar_potential(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j,
                        const PotentialParams& params) {
    const double d2 = (p_i - p_j).squaredNorm();
    return 0.5 * params.length_scale * params.amplitude * std::exp(-d2 / params.length_scale);
}

Eigen::Vector2d pair_repulsion(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j,
                               const PotentialParams& params) {
    const Eigen::Vector2d delta = p_i - p_j;
    return delta * (params.amplitude * std::exp(-delta.squaredNorm() / params.length_scale));
}

double sensing_taper(double distance, const PotentialParams& params) {
    const double lo = 0.9 * params.sensing_radius;
    if (distance <= lo) return 1.0;
    if (distance >= params.sensing_radius) return 0.0;
    const double u = (distance - lo) / (params.sensing_radius - lo);
    return 1.0 - u * u * (3.0 - 2.0 * u);
}

double sensing_taper_derivative(double distance, const PotentialParams& params) {
    const double lo = 0.9 * params.sensing_radius;
    if (distance <= lo || distance >= params.sensing_radius) return 0.0;
    const double w = params.sensing_radius - lo;
    const double u = (distance - lo) / w;
    return -6.0 * u * (1.0 - u) / w;
}

Eigen::Vector2d avoidance_input(const std::vector<Eigen::Vector2d>& positions, int robot,
                                const PotentialParams& params) {
    const int n = static_cast<int>(positions.size());
    if (robot < 0 || robot >= n)
        throw ConfigError("avoidance_input: robot index out of range");
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    for (int j = 0; j < n; ++j) {
        if (j == robot) continue;
        const double dist = (positions[robot] - positions[j]).norm();
        if (dist >= params.sensing_radius) continue;
        sum += sensing_taper(dist, params) *
               pair_repulsion(positions[robot], positions[j], params);
    }
    return sum;
}

Eigen::VectorXd stacked_gradient(const std::vector<Eigen::Vector2d>& positions,
                                 const PotentialParams& params) {
    const int n = static_cast<int>(positions.size());
    Eigen::VectorXd grad(2 * n);
    for (int i = 0; i < n; ++i)
        grad.segment<2>(2 * i) = -avoidance_input(positions, i, params);
    return grad;
}

ShapeCoordinates transformed_potential(const Eigen::VectorXd& grad,
                                       const CbtTransform& transform) {
    return transform.split(transform.apply(grad));
}

Eigen::VectorXd stacked_gradient_rate(const std::vector<Eigen::Vector2d>& positions,
                                      const std::vector<Eigen::Vector2d>& velocities,
                                      const PotentialParams& params) {
    const int n = static_cast<int>(positions.size());
    if (static_cast<int>(velocities.size()) != n)
        throw ConfigError("stacked_gradient_rate: positions/velocities length mismatch");
    Eigen::VectorXd rate = Eigen::VectorXd::Zero(2 * n);
    for (int i = 0; i < n; ++i) {
        Eigen::Vector2d sum = Eigen::Vector2d::Zero();
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            const Eigen::Vector2d delta = positions[i] - positions[j];
            const double dist = delta.norm();
            if (dist >= params.sensing_radius) continue;
            const Eigen::Vector2d delta_dot = velocities[i] - velocities[j];
            const double expo = params.amplitude *
                                std::exp(-delta.squaredNorm() / params.length_scale);
            // d/dt [b e^{-|d|^2/c} d] = b e^{-|d|^2/c} (d_dot - (2/c)(d.d_dot) d)
            const Eigen::Vector2d term_rate =
                expo * (delta_dot - (2.0 / params.length_scale) * delta.dot(delta_dot) * delta);
            const double taper = sensing_taper(dist, params);
            const double dist_rate = dist > 1e-12 ? delta.dot(delta_dot) / dist : 0.0;
            sum += taper * term_rate +
                   sensing_taper_derivative(dist, params) * dist_rate * (expo * delta);
        }
        rate.segment<2>(2 * i) = -sum;
    }
    return rate;
}

ShapeCoordinates potential_rate(const std::vector<Eigen::Vector2d>& positions,
                                const std::vector<Eigen::Vector2d>& velocities,
                                const CbtTransform& transform,
                                const PotentialParams& params) {
    return transform.split(
        transform.apply(stacked_gradient_rate(positions, velocities, params)));
}

double estimate_rate_bound(const PotentialParams& params) {
    // Head-on two-robot approach at probe_speed, distance swept over the
    // sensing range.
    double worst = 0.0;
    const int samples = 400;
    const std::vector<Eigen::Vector2d> vels = {{-params.probe_speed, 0.0}, {0.0, 0.0}};
    for (int k = 0; k <= samples; ++k) {
        const double dist = params.sensing_radius * k / samples;
        const std::vector<Eigen::Vector2d> pos = {{dist, 0.0}, {0.0, 0.0}};
        const Eigen::VectorXd rate = stacked_gradient_rate(pos, vels, params);
        worst = std::max(worst, rate.segment<2>(0).norm());
    }
    return 2.0 * worst;
}

GainConditionReport check_gain_condition(const ControllerGains& gains,
                                         const PotentialParams& params) {
    GainConditionReport rep;
    const double fallback = estimate_rate_bound(params);
    auto bound = [&](Block b) {
        const double configured = params.rate_bound(b);
        return configured > 0.0 ? configured : fallback;
    };
    rep.bound_intra = bound(Block::Intra);
    rep.bound_inter = bound(Block::Inter);
    rep.bound_centroid = bound(Block::Centroid);
    rep.margin_intra = gains.reach_intra - (rep.bound_intra + gains.margin_intra);
    rep.margin_inter = gains.reach_inter - (rep.bound_inter + gains.margin_inter);
    rep.margin_centroid = gains.reach_centroid - (rep.bound_centroid + gains.margin_centroid);
    rep.ok_intra = rep.margin_intra > 0.0;
    rep.ok_inter = rep.margin_inter > 0.0;
    rep.ok_centroid = rep.margin_centroid > 0.0;
    return rep;
}

} // namespace formctl
