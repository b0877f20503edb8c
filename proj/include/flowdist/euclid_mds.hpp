#pragma once

#include "flowdist/graph_distances.hpp"
#include "flowdist/types.hpp"

namespace flowdist {

/// Weighted classical MDS result. Columns of coords follow decreasing mu.
struct Embedding {
    Matrix coords;
    Vector mu;       // retained kernel eigenvalues, all > 0
    Vector spectrum; // every kernel eigenvalue, descending
    Vector p;
    Labels labels;
    double total_inertia = 0.0;
    double dropped_negative_mass = 0.0;

    Index dimensions() const { return mu.size(); }
};

/// Kernel K_ij = sqrt(p_i p_j) B_ij with B = -1/2 H D H', h_ij = delta_ij - p_j.
Matrix weighted_kernel(const Matrix &distances, const Vector &p);

/// Coordinates x_ib = sqrt(mu_b / p_i) v_ib for mu_b > 1e-10 max(mu).
/// Negative eigenvalues are not an error; their mass is reported.
Embedding mds(const Matrix &distances, const Vector &p, const Labels &labels = {});
inline Embedding mds(const DistanceMatrix &distances, const Vector &p) {
    return mds(distances.D, p, distances.labels);
}
inline Embedding mds(const DistanceMatrix &distances) { return mds(distances.D, distances.p, distances.labels); }

struct EuclideanVerdict {
    bool euclidean = false;
    double min_eigenvalue = 0.0;
    double max_eigenvalue = 0.0;
};

/// Euclidean iff min eig(K) >= -tol max(1, max eig(K)).
EuclideanVerdict is_squared_euclidean(const Matrix &distances, const Vector &p, double tol = 1e-9);
inline EuclideanVerdict is_squared_euclidean(const DistanceMatrix &distances, const Vector &p,
                                             double tol = 1e-9) {
    return is_squared_euclidean(distances.D, p, tol);
}

/// Coordinate-free centroid geometry for a signed distribution q (sum q = 1).
struct Centroid {
    Vector distances; // D_iq, squared distance from i to the q-centroid
    double inertia = 0.0; // Delta_q = 1/2 sum_ij q_i q_j D_ij
};

Centroid centroid_and_inertia(const Matrix &distances, const Vector &q);

} // namespace flowdist
