#pragma once

#include "flowdist/exchange.hpp"
#include "flowdist/types.hpp"

#include <cstddef>
#include <limits>
#include <vector>

namespace flowdist {

/// Eigenstructure of the normalized exchange matrix Pi^{-1/2} E Pi^{-1/2}.
///
/// lambda is sorted descending with lambda(0) == 1, U is orthonormal with
/// U.col(0) == sqrt(f), and X holds the raw coordinates x_ia = u_ia / sqrt(f_i)
/// (column 0 is the all-ones vector).
struct SpectralBasis {
    Vector lambda;
    Matrix U;
    Matrix X;
    Vector f;
    Labels labels;

    Index size() const { return lambda.size(); }
};

/// Symmetric eigendecomposition. The trivial eigenvector sqrt(f) is fixed
/// explicitly and the solver runs on its orthogonal complement, so u_0 is
/// exact even on disconnected graphs. Each nontrivial eigenvector is signed
/// so that its largest-magnitude entry (lowest index on ties) is positive.
SpectralBasis decompose(const ExchangeMatrix &exchange);

/// e^s_ij = (e_ij - f_i f_j) / sqrt(f_i f_j).
Matrix standardized(const ExchangeMatrix &exchange);

inline constexpr std::size_t kStationarySteps = std::numeric_limits<std::size_t>::max();

/// t-step exchange matrix Pi P^t. kStationarySteps requests the limit f f',
/// which requires a regular chain.
Matrix t_step(const ExchangeMatrix &exchange, std::size_t steps);

/// lambda_1 < 1 - tol and lambda_{n-1} > -1 + tol.
bool is_regular(const SpectralBasis &basis, double tol = 1e-12);

/// Pairs (i, j) with max_k |e_ik/f_i - e_jk/f_j| <= tol.
std::vector<VertexPair> find_equivalent_pairs(const ExchangeMatrix &exchange, double tol = 1e-9);

/// Pairs with identical transition profiles towards every k != i, j. The
/// input must have a zero diagonal.
std::vector<VertexPair> weakly_equivalent_pairs(const ExchangeMatrix &exchange, double tol = 1e-9);

struct NcutBound {
    double value = 0.0;
    Matrix X0; // (1, x_1, ..., x_{m-1})
};

/// Spectral relaxation of the normalized-cut objective for m groups:
/// 1 + sum_{a=1}^{m-1} lambda_a.
NcutBound ncut_relaxation_bound(const SpectralBasis &basis, Index groups);

} // namespace flowdist
