#pragma once

// Reference computations that take a different route from the library code:
// direct closed forms, brute-force linear solves, Floyd-Warshall, exhaustive
// enumeration. They are deliberately simple and slow.

#include "flowdist/exchange.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <vector>

namespace flowdist::oracle {

/// chi-square distance between row profiles.
inline Matrix chi2(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    const Vector &f = exchange.f();
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            for (Index k = 0; k < n; ++k) {
                const double gap = exchange(i, k) / f(i) - exchange(j, k) / f(j);
                d(i, j) += gap * gap / f(k);
            }
        }
    }
    return d;
}

inline Matrix diffusive(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    const Vector &f = exchange.f();
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) {
                d(i, j) = exchange(i, i) / (f(i) * f(i)) + exchange(j, j) / (f(j) * f(j)) -
                          2.0 * exchange(i, j) / (f(i) * f(j));
            }
        }
    }
    return d;
}

inline Matrix frozen(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    const Vector &f = exchange.f();
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) {
                d(i, j) = 1.0 / f(i) + 1.0 / f(j);
            }
        }
    }
    return d;
}

/// Squared distances from K = g(E^s) built by a full eigendecomposition of
/// the standardized matrix (the trivial direction contributes a constant to
/// B and cancels in D).
inline Matrix spectral_function(const ExchangeMatrix &exchange, const std::function<double(double)> &g) {
    const Index n = exchange.size();
    const Vector &f = exchange.f();
    Matrix s(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            s(i, j) = (exchange(i, j) - f(i) * f(j)) / std::sqrt(f(i) * f(j));
        }
    }
    Eigen::SelfAdjointEigenSolver<Matrix> solver(s);
    Vector gl = solver.eigenvalues();
    for (Index a = 0; a < n; ++a) {
        gl(a) = g(std::clamp(gl(a), -1.0, 1.0));
    }
    const Matrix k = solver.eigenvectors() * gl.asDiagonal() * solver.eigenvectors().transpose();
    Matrix b(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            b(i, j) = k(i, j) / std::sqrt(f(i) * f(j));
        }
    }
    Matrix d(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            d(i, j) = b(i, i) + b(j, j) - 2.0 * b(i, j);
        }
    }
    return d;
}

inline Matrix transition(const ExchangeMatrix &exchange) {
    return exchange.f().cwiseInverse().asDiagonal() * exchange.e();
}

/// Mean first-passage times from the first-step equations
/// m_ij = 1 + sum_{k != j} p_ik m_kj, solved column by column.
inline Matrix hitting_times(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    const Matrix p = transition(exchange);
    Matrix m = Matrix::Zero(n, n);
    for (Index j = 0; j < n; ++j) {
        Matrix a = Matrix::Identity(n, n) - p;
        a.col(j).setZero();
        // Row j holds the trivial equation m_jj = 0.
        a.row(j).setZero();
        a(j, j) = 1.0;
        Vector rhs = Vector::Ones(n);
        rhs(j) = 0.0;
        m.col(j) = a.fullPivLu().solve(rhs);
    }
    return m;
}

/// (I - rho P)^{-1}.
inline Matrix visits(const ExchangeMatrix &exchange, double rho) {
    const Index n = exchange.size();
    return (Matrix::Identity(n, n) - rho * transition(exchange)).fullPivLu().inverse();
}

inline Matrix absorption(const ExchangeMatrix &exchange, double rho) {
    const Index n = exchange.size();
    const Matrix v = visits(exchange, rho);
    const Vector &f = exchange.f();
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) {
                d(i, j) = (1.0 - rho) * (v(i, i) / f(i) + v(j, j) / f(j) - 2.0 * v(i, j) / f(j));
            }
        }
    }
    return d;
}

/// All-pairs minimal resistance sums (resistance 1/e_ij on off-diagonal edges).
inline Matrix floyd_warshall(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    const double inf = std::numeric_limits<double>::infinity();
    Matrix d = Matrix::Constant(n, n, inf);
    for (Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Index j = 0; j < n; ++j) {
            if (i != j && exchange(i, j) > 0.0) {
                d(i, j) = 1.0 / exchange(i, j);
            }
        }
    }
    for (Index k = 0; k < n; ++k) {
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
            }
        }
    }
    return d;
}

/// Second algebraic form of the jump distance: full sum over k minus the
/// k = i, j terms in closed form.
inline Matrix jump_second_form(const ExchangeMatrix &stripped) {
    const Index n = stripped.size();
    const Vector &f = stripped.f();
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i == j) {
                continue;
            }
            double sum = 0.0;
            for (Index k = 0; k < n; ++k) {
                const double gap = stripped(i, k) / f(i) - stripped(j, k) / f(j);
                sum += gap * gap / f(k);
            }
            const double e = stripped(i, j);
            d(i, j) = sum - e * e / (f(i) * f(j)) * (1.0 / f(i) + 1.0 / f(j));
        }
    }
    return d;
}

/// Hard-partition free energy: F = sum_g rho_g Delta_g + T H(Z) with
/// Delta_g = 1/2 sum_ij pi_i pi_j D_ij.
inline double hard_free_energy(const Matrix &d, const Vector &f, const std::vector<int> &assignment,
                               double temperature) {
    const int groups = *std::max_element(assignment.begin(), assignment.end()) + 1;
    double within = 0.0;
    double entropy = 0.0;
    for (int g = 0; g < groups; ++g) {
        double rho = 0.0;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            if (assignment[i] == g) {
                rho += f(static_cast<Index>(i));
            }
        }
        if (rho == 0.0) {
            continue;
        }
        double inertia = 0.0;
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            for (std::size_t j = 0; j < assignment.size(); ++j) {
                if (assignment[i] == g && assignment[j] == g) {
                    inertia += f(static_cast<Index>(i)) * f(static_cast<Index>(j)) *
                               d(static_cast<Index>(i), static_cast<Index>(j));
                }
            }
        }
        within += 0.5 * inertia / rho;
        entropy -= rho * std::log(rho);
    }
    return within + temperature * entropy;
}

/// Minimum of hard_free_energy over all partitions into two nonempty groups.
inline double best_two_partition(const Matrix &d, const Vector &f, double temperature) {
    const Index n = d.rows();
    double best = std::numeric_limits<double>::infinity();
    // Vertex 0 stays in group 0; enumerate the rest.
    for (unsigned long mask = 1; mask < (1ul << (n - 1)); ++mask) {
        std::vector<int> assignment(static_cast<std::size_t>(n), 0);
        for (Index i = 1; i < n; ++i) {
            assignment[static_cast<std::size_t>(i)] = static_cast<int>((mask >> (i - 1)) & 1ul);
        }
        best = std::min(best, hard_free_energy(d, f, assignment, temperature));
    }
    return best;
}

inline double entropy(const std::vector<double> &masses) {
    double h = 0.0;
    for (double m : masses) {
        if (m > 0.0) {
            h -= m * std::log(m);
        }
    }
    return h;
}

} // namespace flowdist::oracle
