#include "formctl/cbt.hpp"

#include <cmath>
#include <numeric>
#include <string>

namespace formctl {

namespace {
using RowPairs = Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>;

// coeffs (x) I_2 as a dense matrix.
Eigen::MatrixXd kron_identity2(const Eigen::MatrixXd& coeffs) {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(2 * coeffs.rows(), 2 * coeffs.cols());
    for (Eigen::Index i = 0; i < coeffs.rows(); ++i)
        for (Eigen::Index j = 0; j < coeffs.cols(); ++j) {
            out(2 * i, 2 * j) = coeffs(i, j);
            out(2 * i + 1, 2 * j + 1) = coeffs(i, j);
        }
    return out;
}

Eigen::VectorXd apply_coeffs(const Eigen::MatrixXd& coeffs, const Eigen::VectorXd& stacked) {
    const Eigen::Index n = coeffs.cols();
    if (stacked.size() != 2 * n)
        throw ConfigError("CBT: stacked vector has length " + std::to_string(stacked.size()) +
                          ", expected " + std::to_string(2 * n));
    Eigen::Map<const RowPairs> pts(stacked.data(), n, 2);
    RowPairs mapped = coeffs * pts;
    return Eigen::Map<const Eigen::VectorXd>(mapped.data(), 2 * n);
}
} // namespace

int GroupPartition::total() const {
    return std::accumulate(group_sizes.begin(), group_sizes.end(), 0);
}

int GroupPartition::group_offset(int g) const {
    return std::accumulate(group_sizes.begin(), group_sizes.begin() + g, 0);
}

void GroupPartition::validate() const {
    if (group_sizes.empty())
        throw ConfigError("partition: at least one group is required");
    for (std::size_t i = 0; i < group_sizes.size(); ++i)
        if (group_sizes[i] < 2)
            throw ConfigError("partition: group " + std::to_string(i) +
                              " has fewer than 2 robots; a group needs at least one "
                              "shape vector");
}

Eigen::VectorXd ShapeCoordinates::stacked() const {
    Eigen::VectorXd out(intra.size() + inter.size() + 2);
    out << intra, inter, centroid;
    return out;
}

Eigen::MatrixXd jacobi_rows(int group_size, const std::vector<double>& weights) {
    if (group_size < 2)
        throw ConfigError("jacobi_rows: group size must be at least 2");
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(group_size - 1, group_size);
    for (int j = 1; j < group_size; ++j) {
        double w;
        if (!weights.empty()) {
            if (static_cast<int>(weights.size()) < group_size - 1)
                throw ConfigError("jacobi_rows: need at least " +
                                  std::to_string(group_size - 1) + " weights");
            w = weights[j - 1];
        } else {
            w = (j == 1) ? 1.0 / std::sqrt(2.0) : 1.0;
        }
        rows.row(j - 1).head(j).setConstant(-w / j);
        rows(j - 1, j) = w;
    }
    return rows;
}

CbtTransform::CbtTransform(GroupPartition partition, const std::vector<double>& weights)
    : partition_(std::move(partition)) {
    partition_.validate();
    n_ = partition_.total();
    m_ = partition_.group_count();
    phi_ = Eigen::MatrixXd::Zero(n_, n_);

    int row = 0;
    for (int g = 0; g < m_; ++g) {
        const int ng = partition_.group_sizes[g];
        phi_.block(row, partition_.group_offset(g), ng - 1, ng) = jacobi_rows(ng, weights);
        row += ng - 1;
    }
    if (m_ >= 2) {
        // Inter rows: Jacobi rows over group centroids, each centroid
        // coefficient spread as 1/n_g over the group's columns.
        const Eigen::MatrixXd jr = jacobi_rows(m_, weights);
        for (int g = 0; g < m_; ++g) {
            const int ng = partition_.group_sizes[g];
            phi_.block(row, partition_.group_offset(g), m_ - 1, ng) =
                (jr.col(g) / ng).replicate(1, ng);
        }
        row += m_ - 1;
    }
    phi_.row(row).setConstant(1.0 / n_);

    Eigen::FullPivLU<Eigen::MatrixXd> lu(phi_);
    if (!lu.isInvertible())
        throw NumericalError("CBT coefficient matrix is numerically singular");
    phi_inv_ = lu.inverse();
}

int CbtTransform::intra_group_offset(int g) const {
    return 2 * (partition_.group_offset(g) - g);
}

Eigen::VectorXd CbtTransform::apply(const Eigen::VectorXd& stacked) const {
    return apply_coeffs(phi_, stacked);
}

Eigen::VectorXd CbtTransform::apply_inverse(const Eigen::VectorXd& stacked) const {
    return apply_coeffs(phi_inv_, stacked);
}

ShapeCoordinates CbtTransform::split(const Eigen::VectorXd& stacked) const {
    if (stacked.size() != 2 * n_)
        throw ConfigError("CBT split: dimension mismatch");
    ShapeCoordinates out;
    out.intra = stacked.head(intra_dim());
    out.inter = stacked.segment(intra_dim(), inter_dim());
    out.centroid = stacked.tail<2>();
    return out;
}

ShapeCoordinates CbtTransform::to_shape(const Eigen::VectorXd& positions) const {
    return split(apply(positions));
}

Eigen::VectorXd CbtTransform::from_shape(const ShapeCoordinates& shape) const {
    if (shape.intra.size() != intra_dim() || shape.inter.size() != inter_dim())
        throw ConfigError("CBT from_shape: dimension mismatch");
    return apply_inverse(shape.stacked());
}

TransformedDynamics transform_dynamics(const CbtTransform& transform,
                                       const Eigen::MatrixXd& coriolis,
                                       const Eigen::VectorXd& drift) {
    const int n = transform.robot_count();
    if (coriolis.rows() != 2 * n || coriolis.cols() != 2 * n || drift.size() != 2 * n)
        throw ConfigError("transform_dynamics: dimension mismatch");
    const Eigen::MatrixXd kron = kron_identity2(transform.coefficients());
    const Eigen::MatrixXd kron_inv = kron_identity2(transform.inverse_coefficients());
    TransformedDynamics out;
    out.p = kron * coriolis * kron_inv;
    out.r = transform.apply(drift);
    return out;
}

} // namespace formctl
