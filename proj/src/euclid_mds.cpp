#include "flowdist/euclid_mds.hpp"

#include "flowdist/error.hpp"
#include "orientation.hpp"

#include <cmath>

namespace flowdist {

namespace {

void check_weights(const Matrix &distances, const Vector &p) {
    const Index n = distances.rows();
    if (distances.cols() != n || p.size() != n) {
        throw InputError("mds: distance matrix and weights disagree in size");
    }
    if (!distances.allFinite()) {
        throw InputError("mds: infinite distances (disconnected graph?) cannot be embedded");
    }
    if ((p.array() <= 0.0).any() || std::abs(p.sum() - 1.0) > 1e-10) {
        throw InputError("mds: weights must be positive and sum to 1");
    }
}

Eigen::SelfAdjointEigenSolver<Matrix> solve_kernel(const Matrix &kernel) {
    Eigen::SelfAdjointEigenSolver<Matrix> solver(kernel);
    if (solver.info() != Eigen::Success) {
        throw NumericalError("mds: kernel eigensolver failed");
    }
    return solver;
}

} // namespace

Matrix weighted_kernel(const Matrix &distances, const Vector &p) {
    const Index n = distances.rows();
    const Centroid center = centroid_and_inertia(distances, p);
    const Vector root = p.cwiseSqrt();
    Matrix kernel(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            const double scalar = -0.5 * (distances(i, j) - center.distances(i) - center.distances(j));
            kernel(i, j) = root(i) * root(j) * scalar;
        }
    }
    return 0.5 * (kernel + kernel.transpose());
}

Embedding mds(const Matrix &distances, const Vector &p, const Labels &labels) {
    check_weights(distances, p);
    const Index n = distances.rows();
    const Matrix kernel = weighted_kernel(distances, p);
    const auto solver = solve_kernel(kernel);

    Embedding out;
    out.p = p;
    out.labels = labels.empty() ? default_labels(n) : labels;
    out.total_inertia = kernel.trace();
    out.spectrum = solver.eigenvalues().reverse();

    const double top = out.spectrum(0);
    Index kept = 0;
    while (kept < n && top > 0.0 && out.spectrum(kept) > 1e-10 * top) {
        ++kept;
    }
    for (Index b = 0; b < n; ++b) {
        if (out.spectrum(b) < 0.0) {
            out.dropped_negative_mass -= out.spectrum(b);
        }
    }
    out.mu = out.spectrum.head(kept);
    out.coords.resize(n, kept);
    const Vector inv_root = p.cwiseSqrt().cwiseInverse();
    for (Index b = 0; b < kept; ++b) {
        Vector v = solver.eigenvectors().col(n - 1 - b);
        detail::orient(v);
        out.coords.col(b) = std::sqrt(out.mu(b)) * inv_root.cwiseProduct(v);
    }
    return out;
}

EuclideanVerdict is_squared_euclidean(const Matrix &distances, const Vector &p, double tol) {
    check_weights(distances, p);
    const auto solver = solve_kernel(weighted_kernel(distances, p));
    EuclideanVerdict verdict;
    verdict.min_eigenvalue = solver.eigenvalues().minCoeff();
    verdict.max_eigenvalue = solver.eigenvalues().maxCoeff();
    verdict.euclidean = verdict.min_eigenvalue >= -tol * std::max(1.0, verdict.max_eigenvalue);
    return verdict;
}

Centroid centroid_and_inertia(const Matrix &distances, const Vector &q) {
    if (distances.rows() != q.size() || distances.cols() != q.size()) {
        throw InputError("centroid_and_inertia: size mismatch");
    }
    const Vector weighted = distances * q;
    Centroid out;
    out.inertia = 0.5 * q.dot(weighted);
    out.distances = weighted.array() - out.inertia;
    return out;
}

} // namespace flowdist
