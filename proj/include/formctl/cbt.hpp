#pragma once

#include <Eigen/Dense>
#include <vector>

#include "formctl/common.hpp"

namespace formctl {

/// Partition of n robots into m groups. Every group needs at least two
/// robots so that it carries at least one shape vector.
struct GroupPartition {
    std::vector<int> group_sizes;

    int group_count() const { return static_cast<int>(group_sizes.size()); }
    int total() const;
    /// Index of the first robot of group g.
    int group_offset(int g) const;
    void validate() const;
};

/// Shape coordinates of the whole ensemble: intra-group shape vectors
/// (stacked per group), inter-group shape vectors over group centroids,
/// and the overall centroid.
struct ShapeCoordinates {
    Eigen::VectorXd intra;     ///< Z_s in R^{2(n-m)}
    Eigen::VectorXd inter;     ///< Z_r in R^{2(m-1)}
    Eigen::Vector2d centroid;  ///< z_c in R^2

    Eigen::VectorXd stacked() const;
};

/// Jacobi coefficient rows for one group of k points: row j maps
/// (p_1..p_k) to w_j (p_{j+1} - mean(p_1..p_j)), w_1 = 1/sqrt(2), w_j = 1
/// for j >= 2. Every row sums to zero. Weights are configurable so other
/// shape-vector families can be plugged in; the default reproduces the
/// three- and two-body instances used throughout.
Eigen::MatrixXd jacobi_rows(int group_size, const std::vector<double>& weights = {});

/// The centroid based transformation Phi for a group partition. The n x n
/// coefficient matrix acts on stacked planar positions as Phi (x) I_2.
/// Immutable after construction; the inverse is computed once and cached.
class CbtTransform {
public:
    /// Builds intra rows per group, inter rows over group centroids, and
    /// the centroid row 1/n. Throws ConfigError on an invalid partition and
    /// NumericalError if the matrix is numerically singular (cannot occur
    /// for the Jacobi construction, checked anyway).
    explicit CbtTransform(GroupPartition partition,
                          const std::vector<double>& weights = {});

    const GroupPartition& partition() const { return partition_; }
    int robot_count() const { return n_; }
    int group_count() const { return m_; }

    const Eigen::MatrixXd& coefficients() const { return phi_; }
    const Eigen::MatrixXd& inverse_coefficients() const { return phi_inv_; }

    /// Row ranges of the planar (2n-dimensional) stacked representation.
    int intra_dim() const { return 2 * (n_ - m_); }
    int inter_dim() const { return 2 * (m_ - 1); }
    /// First stacked row of group g's intra block; the block spans
    /// 2*(n_g - 1) rows.
    int intra_group_offset(int g) const;

    /// Applies Phi (x) I_2 to a stacked position vector.
    Eigen::VectorXd apply(const Eigen::VectorXd& stacked) const;
    /// Applies Phi^{-1} (x) I_2.
    Eigen::VectorXd apply_inverse(const Eigen::VectorXd& stacked) const;

    ShapeCoordinates to_shape(const Eigen::VectorXd& positions) const;
    Eigen::VectorXd from_shape(const ShapeCoordinates& shape) const;

    /// Splits a stacked 2n-vector into (intra, inter, centroid) blocks.
    ShapeCoordinates split(const Eigen::VectorXd& stacked) const;

private:
    GroupPartition partition_;
    int n_ = 0;
    int m_ = 0;
    Eigen::MatrixXd phi_;
    Eigen::MatrixXd phi_inv_;
};

/// Transformed dynamics terms of the augmented system:
/// P = Phi A Phi^{-1} and R = Phi C (both in the stacked 2n representation),
/// with rows partitioned into (intra, inter, centroid).
struct TransformedDynamics {
    Eigen::MatrixXd p; ///< 2n x 2n
    Eigen::VectorXd r; ///< 2n
};
TransformedDynamics transform_dynamics(const CbtTransform& transform,
                                       const Eigen::MatrixXd& coriolis,
                                       const Eigen::VectorXd& drift);

} // namespace formctl
