#pragma once

#include <Eigen/Dense>
#include <vector>

#include "formctl/cbt.hpp"
#include "formctl/common.hpp"
#include "formctl/smc.hpp"

namespace formctl {

/// Parameters of the pairwise repulsive potential and its sensing cutoff.
struct PotentialParams {
    double amplitude = 5.0;      ///< b
    double length_scale = 2.0;   ///< c [m^2]
    double sensing_radius = 3.0; ///< robots beyond this distance are ignored [m]
    /// Configured bound on ||dF_pot/dt|| per block; 0 means "estimate at setup".
    double rate_bound_intra = 0.0;
    double rate_bound_inter = 0.0;
    double rate_bound_centroid = 0.0;
    /// Relative approach speed used by the numerical rate-bound estimate.
    double probe_speed = 1.0;

    void validate() const;
    double rate_bound(Block b) const;
};

/// Scalar bump whose negative gradient w.r.t. p_i is pair_repulsion:
/// (c/2) b exp(-||p_i - p_j||^2 / c).
double scalar_potential(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j,
                        const PotentialParams& params);

/// Repulsive pair term (p_i - p_j) b exp(-||p_i - p_j||^2 / c). Finite
/// everywhere, odd in the difference. No sensing cutoff.
Eigen::Vector2d pair_repulsion(const Eigen::Vector2d& p_i, const Eigen::Vector2d& p_j,
                               const PotentialParams& params);

/// C1 taper multiplying the pair term near the sensing radius: 1 below
/// 0.9 r_sense, 0 at r_sense.
double sensing_taper(double distance, const PotentialParams& params);
/// d(taper)/d(distance).
double sensing_taper_derivative(double distance, const PotentialParams& params);

/// Repulsive avoidance input on robot i: sum of tapered pair terms over
/// neighbours inside the sensing radius, ascending index order. Points away
/// from the neighbours.
Eigen::Vector2d avoidance_input(const std::vector<Eigen::Vector2d>& positions, int robot,
                                const PotentialParams& params);

/// Stacked potential gradient over all robots: entry i is the gradient of
/// robot i's summed scalar potential, i.e. the negative of avoidance_input.
/// This is the quantity the sliding surfaces are augmented with; the
/// repulsive acceleration of the avoidance mode is its negative.
Eigen::VectorXd stacked_gradient(const std::vector<Eigen::Vector2d>& positions,
                                 const PotentialParams& params);

/// Transforms a stacked gradient into shape coordinates and splits it into
/// (intra, inter, centroid) blocks.
ShapeCoordinates transformed_potential(const Eigen::VectorXd& stacked_gradient,
                                       const CbtTransform& transform);

/// Analytic time derivative of the stacked gradient via the chain rule,
/// including the taper derivative.
Eigen::VectorXd stacked_gradient_rate(const std::vector<Eigen::Vector2d>& positions,
                                      const std::vector<Eigen::Vector2d>& velocities,
                                      const PotentialParams& params);

/// Transformed blocks of d F_pot / dt.
ShapeCoordinates potential_rate(const std::vector<Eigen::Vector2d>& positions,
                                const std::vector<Eigen::Vector2d>& velocities,
                                const CbtTransform& transform,
                                const PotentialParams& params);

/// Numerical estimate of sup ||d/dt pair term|| over a two-robot approach at
/// probe_speed, times safety factor 2. Used when no explicit bound is
/// configured.
double estimate_rate_bound(const PotentialParams& params);

/// Result of the reachability gain condition delta_i > F_bar_i + gamma_i.
struct GainConditionReport {
    double bound_intra = 0.0;
    double bound_inter = 0.0;
    double bound_centroid = 0.0;
    double margin_intra = 0.0; ///< delta_s - (F_bar_s + gamma_s)
    double margin_inter = 0.0;
    double margin_centroid = 0.0;
    bool ok_intra = false;
    bool ok_inter = false;
    bool ok_centroid = false;

    bool all_ok() const { return ok_intra && ok_inter && ok_centroid; }
};

/// Checks delta_i > F_bar_i + gamma_i per block, with F_bar taken from the
/// configured bounds or estimated numerically when zero.
GainConditionReport check_gain_condition(const ControllerGains& gains,
                                         const PotentialParams& params);

} // namespace formctl
