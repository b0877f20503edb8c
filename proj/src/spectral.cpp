#include "flowdist/spectral.hpp"

#include "flowdist/error.hpp"
#include "orientation.hpp"

#include <algorithm>
#include <cmath>

namespace flowdist {

SpectralBasis decompose(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    const Vector root = exchange.f().cwiseSqrt();

    Matrix normalized(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            normalized(i, j) = exchange(i, j) / (root(i) * root(j));
        }
    }
    const double trivial_residual = (normalized * root - root).cwiseAbs().maxCoeff();
    if (trivial_residual > 1e-8) {
        throw InputError("decompose: sqrt(f) is not an eigenvector for eigenvalue 1 (residual " +
                         std::to_string(trivial_residual) + "); malformed exchange matrix");
    }

    SpectralBasis basis;
    basis.f = exchange.f();
    basis.labels = exchange.labels();
    basis.lambda = Vector::Zero(n);
    basis.U = Matrix::Zero(n, n);
    basis.lambda(0) = 1.0;
    basis.U.col(0) = root;

    if (n > 1) {
        // Orthonormal basis of the complement of sqrt(f) from a Householder
        // reflection; columns 1..n-1 of Q are orthogonal to sqrt(f).
        const Matrix column = root;
        Eigen::HouseholderQR<Matrix> qr(column);
        const Matrix q = qr.householderQ();
        const Matrix complement = q.rightCols(n - 1);
        Matrix reduced = complement.transpose() * normalized * complement;
        reduced = 0.5 * (reduced + reduced.transpose()).eval();

        Eigen::SelfAdjointEigenSolver<Matrix> solver(reduced);
        if (solver.info() != Eigen::Success) {
            throw NumericalError("decompose: symmetric eigensolver failed");
        }
        const Matrix vectors = complement * solver.eigenvectors();
        for (Index a = 1; a < n; ++a) {
            const Index src = n - 1 - a; // solver order is ascending
            basis.lambda(a) = solver.eigenvalues()(src);
            basis.U.col(a) = vectors.col(src);
            detail::orient(basis.U.col(a));
        }
    }
    basis.X = root.cwiseInverse().asDiagonal() * basis.U;
    return basis;
}

Matrix standardized(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    const Vector &f = exchange.f();
    Matrix out(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            out(i, j) = (exchange(i, j) - f(i) * f(j)) / std::sqrt(f(i) * f(j));
        }
    }
    return out;
}

bool is_regular(const SpectralBasis &basis, double tol) {
    const Index n = basis.size();
    if (n == 1) {
        return true;
    }
    return basis.lambda(1) < 1.0 - tol && basis.lambda(n - 1) > -1.0 + tol;
}

Matrix t_step(const ExchangeMatrix &exchange, std::size_t steps) {
    const Vector &f = exchange.f();
    if (steps == kStationarySteps) {
        if (!is_regular(decompose(exchange))) {
            throw InputError("t_step: the stationary limit requires a regular chain "
                             "(connected and not bipartite)");
        }
        return f * f.transpose();
    }
    Matrix current = f.asDiagonal();
    const Vector inverse = f.cwiseInverse();
    for (std::size_t t = 0; t < steps; ++t) {
        current = (current * inverse.asDiagonal() * exchange.e()).eval();
        current = 0.5 * (current + current.transpose()).eval();
    }
    return current;
}

std::vector<VertexPair> find_equivalent_pairs(const ExchangeMatrix &exchange, double tol) {
    if (!(tol > 0.0)) {
        throw InputError("find_equivalent_pairs: tolerance must be positive");
    }
    const Index n = exchange.size();
    const Matrix profiles = exchange.f().cwiseInverse().asDiagonal() * exchange.e();
    std::vector<VertexPair> pairs;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            if ((profiles.row(i) - profiles.row(j)).cwiseAbs().maxCoeff() <= tol) {
                pairs.push_back({i, j});
            }
        }
    }
    return pairs;
}

std::vector<VertexPair> weakly_equivalent_pairs(const ExchangeMatrix &exchange, double tol) {
    if (!(tol > 0.0)) {
        throw InputError("weakly_equivalent_pairs: tolerance must be positive");
    }
    if (!exchange.has_zero_diagonal()) {
        throw InputError("weakly_equivalent_pairs: exchange matrix must have a zero diagonal");
    }
    const Index n = exchange.size();
    const Matrix profiles = exchange.f().cwiseInverse().asDiagonal() * exchange.e();
    std::vector<VertexPair> pairs;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            double gap = 0.0;
            for (Index k = 0; k < n; ++k) {
                if (k != i && k != j) {
                    gap = std::max(gap, std::abs(profiles(i, k) - profiles(j, k)));
                }
            }
            if (gap <= tol) {
                pairs.push_back({i, j});
            }
        }
    }
    return pairs;
}

NcutBound ncut_relaxation_bound(const SpectralBasis &basis, Index groups) {
    if (groups < 1 || groups > basis.size()) {
        throw InputError("ncut_relaxation_bound: group count " + std::to_string(groups) +
                         " outside [1, " + std::to_string(basis.size()) + "]");
    }
    NcutBound bound;
    bound.value = 1.0;
    for (Index a = 1; a < groups; ++a) {
        bound.value += basis.lambda(a);
    }
    bound.X0 = basis.X.leftCols(groups);
    return bound;
}

} // namespace flowdist
