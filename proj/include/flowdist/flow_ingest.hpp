#pragma once

#include "flowdist/exchange.hpp"
#include "flowdist/types.hpp"

#include <iosfwd>
#include <string_view>

namespace flowdist {

/// Raw (generally asymmetric) flow counts n_ij from vertex i to vertex j.
struct FlowMatrix {
    Matrix counts;
    Labels labels;
};

enum class SymmetrizationMethod { half_sum, geometric_mean, quasi_symmetric };

SymmetrizationMethod parse_symmetrization(std::string_view name);
std::string_view to_string(SymmetrizationMethod method);

/// Reads a square flow table in CSV form:
///
///     ,a,b,c
///     a,10,2,0
///     b,4,10,1
///     ...
///
/// The first header cell is ignored. Rows may appear in any order as long as
/// the row labels are the column labels; rows are reordered to column order.
/// Errors carry the line and column of the offending cell.
FlowMatrix load_flow_matrix(std::istream &in);
FlowMatrix load_flow_matrix_file(const std::string &path);

struct QuasiSymmetryOptions {
    int max_sweeps = 10'000;
    double tolerance = 1e-10;
};

struct QuasiSymmetricFit {
    Matrix fitted;
    int sweeps = 0;
    double residual = 0.0;
};

/// Maximum-likelihood fit of the quasi-symmetry model m_ij = a_i b_j c_ij
/// (c symmetric) by iterative proportional fitting of row margins, column
/// margins and symmetric pair totals n_ij + n_ji.
QuasiSymmetricFit fit_quasi_symmetric(const Matrix &counts, const QuasiSymmetryOptions &options = {});

/// Symmetric version of the flows. quasi_symmetric returns the entrywise
/// geometric mean of the fitted table. For geometric_mean and
/// quasi_symmetric a pair with n_ij * n_ji == 0 maps to 0.
Matrix symmetrize(const FlowMatrix &flows, SymmetrizationMethod method,
                  const QuasiSymmetryOptions &options = {});

/// e = S / sum(S). Throws naming the first vertex with a zero row sum.
ExchangeMatrix to_exchange(const Matrix &symmetric, Labels labels = {});

/// Removes self-exchanges and renormalizes:
/// e'_ij = (e_ij - delta_ij e_ii) / (1 - sum_k e_kk).
ExchangeMatrix strip_diagonal(const ExchangeMatrix &exchange);

} // namespace flowdist
