#include "flowdist/flow_ingest.hpp"

#include "flowdist/csv.hpp"
#include "flowdist/error.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <unordered_map>

namespace flowdist {

SymmetrizationMethod parse_symmetrization(std::string_view name) {
    if (name == "half_sum") {
        return SymmetrizationMethod::half_sum;
    }
    if (name == "geometric_mean") {
        return SymmetrizationMethod::geometric_mean;
    }
    if (name == "quasi_symmetric") {
        return SymmetrizationMethod::quasi_symmetric;
    }
    throw InputError("unknown symmetrization method '" + std::string(name) +
                     "' (expected half_sum, geometric_mean or quasi_symmetric)");
}

std::string_view to_string(SymmetrizationMethod method) {
    switch (method) {
    case SymmetrizationMethod::half_sum:
        return "half_sum";
    case SymmetrizationMethod::geometric_mean:
        return "geometric_mean";
    case SymmetrizationMethod::quasi_symmetric:
        return "quasi_symmetric";
    }
    return "?";
}

FlowMatrix load_flow_matrix(std::istream &in) {
    const auto table = csv::read_table(in);
    if (table.empty()) {
        throw InputError("flow matrix: empty input");
    }
    const auto &header = table.front();
    if (header.cells.size() < 2) {
        throw InputError("flow matrix: line " + std::to_string(header.line) +
                         ": header holds no column labels");
    }
    Labels labels(header.cells.begin() + 1, header.cells.end());
    const auto n = static_cast<Index>(labels.size());

    std::unordered_map<std::string, Index> column_of;
    for (Index j = 0; j < n; ++j) {
        if (!column_of.emplace(labels[static_cast<std::size_t>(j)], j).second) {
            throw InputError("flow matrix: line " + std::to_string(header.line) +
                             ": duplicate column label '" + labels[static_cast<std::size_t>(j)] +
                             "'");
        }
    }
    if (static_cast<Index>(table.size()) - 1 != n) {
        throw InputError("flow matrix: non-square data, " + std::to_string(n) + " columns but " +
                         std::to_string(table.size() - 1) + " rows");
    }

    Matrix counts = Matrix::Zero(n, n);
    std::vector<bool> filled(static_cast<std::size_t>(n), false);
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto &row = table[r];
        const auto where = "flow matrix: line " + std::to_string(row.line);
        if (static_cast<Index>(row.cells.size()) != n + 1) {
            throw InputError(where + ": non-square data, expected " + std::to_string(n) +
                             " numeric fields, found " + std::to_string(row.cells.size() - 1));
        }
        const auto it = column_of.find(row.cells.front());
        if (it == column_of.end()) {
            throw InputError(where + ", column 1: row label '" + row.cells.front() +
                             "' is not a column label (label mismatch)");
        }
        const Index i = it->second;
        if (filled[static_cast<std::size_t>(i)]) {
            throw InputError(where + ", column 1: duplicate row label '" + row.cells.front() + "'");
        }
        filled[static_cast<std::size_t>(i)] = true;
        for (Index j = 0; j < n; ++j) {
            const auto &cell = row.cells[static_cast<std::size_t>(j + 1)];
            const auto cell_where = where + ", column " + std::to_string(j + 2);
            const auto value = csv::parse_number(cell);
            if (!value) {
                throw InputError(cell_where + ": unparsable numeric field '" + cell + "'");
            }
            if (*value < 0.0 || std::signbit(*value)) {
                throw InputError(cell_where + ": negative entry " + cell);
            }
            counts(i, j) = *value;
        }
    }
    if (!(counts.array() > 0.0).any()) {
        throw InputError("flow matrix: no positive entry");
    }
    return {std::move(counts), std::move(labels)};
}

FlowMatrix load_flow_matrix_file(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("cannot open '" + path + "'");
    }
    return load_flow_matrix(in);
}

namespace {

double quasi_symmetry_residual(const Matrix &fitted, const Matrix &counts) {
    const Index n = counts.rows();
    const Vector row_target = counts.rowwise().sum();
    const Vector col_target = counts.colwise().sum();
    const Vector rows = fitted.rowwise().sum();
    const Vector cols = fitted.colwise().sum();
    double residual = 0.0;
    for (Index i = 0; i < n; ++i) {
        residual = std::max(residual, std::abs(rows(i) - row_target(i)) / row_target(i));
        residual = std::max(residual, std::abs(cols(i) - col_target(i)) / col_target(i));
        for (Index j = i + 1; j < n; ++j) {
            const double target = counts(i, j) + counts(j, i);
            if (target > 0.0) {
                residual = std::max(residual,
                                    std::abs(fitted(i, j) + fitted(j, i) - target) / target);
            }
        }
    }
    return residual;
}

} // namespace

QuasiSymmetricFit fit_quasi_symmetric(const Matrix &counts, const QuasiSymmetryOptions &options) {
    const Index n = counts.rows();
    if (counts.cols() != n) {
        throw InputError("quasi-symmetric fit: counts must be square");
    }
    const Vector row_target = counts.rowwise().sum();
    const Vector col_target = counts.colwise().sum();
    for (Index i = 0; i < n; ++i) {
        if (!(row_target(i) > 0.0) || !(col_target(i) > 0.0)) {
            throw InputError("quasi-symmetric fit: vertex " + std::to_string(i + 1) +
                             " has a zero row or column sum");
        }
    }

    // Pairs with a zero total are structural zeros of the MLE.
    Matrix m(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            m(i, j) = counts(i, j) + counts(j, i) > 0.0 ? 1.0 : 0.0;
        }
    }

    QuasiSymmetricFit fit;
    for (int sweep = 1; sweep <= options.max_sweeps; ++sweep) {
        const Vector rows = m.rowwise().sum();
        for (Index i = 0; i < n; ++i) {
            m.row(i) *= row_target(i) / rows(i);
        }
        const Vector cols = m.colwise().sum();
        for (Index j = 0; j < n; ++j) {
            m.col(j) *= col_target(j) / cols(j);
        }
        for (Index i = 0; i < n; ++i) {
            for (Index j = i; j < n; ++j) {
                const double pair = m(i, j) + m(j, i);
                if (pair > 0.0) {
                    const double scale = (counts(i, j) + counts(j, i)) / pair;
                    m(i, j) *= scale;
                    if (j != i) {
                        m(j, i) *= scale;
                    }
                }
            }
        }
        fit.sweeps = sweep;
        fit.residual = quasi_symmetry_residual(m, counts);
        if (fit.residual < options.tolerance) {
            fit.fitted = std::move(m);
            return fit;
        }
    }
    throw NumericalError("quasi-symmetric fit did not converge after " +
                         std::to_string(options.max_sweeps) + " sweeps (residual " +
                         std::to_string(fit.residual) + ")");
}

Matrix symmetrize(const FlowMatrix &flows, SymmetrizationMethod method,
                  const QuasiSymmetryOptions &options) {
    const Matrix &counts = flows.counts;
    const Index n = counts.rows();
    Matrix out(n, n);
    switch (method) {
    case SymmetrizationMethod::half_sum:
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                out(i, j) = 0.5 * (counts(i, j) + counts(j, i));
            }
        }
        break;
    case SymmetrizationMethod::geometric_mean:
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                out(i, j) = std::sqrt(counts(i, j) * counts(j, i));
            }
        }
        break;
    case SymmetrizationMethod::quasi_symmetric: {
        const Matrix fitted = fit_quasi_symmetric(counts, options).fitted;
        for (Index i = 0; i < n; ++i) {
            for (Index j = 0; j < n; ++j) {
                out(i, j) = counts(i, j) * counts(j, i) > 0.0
                                ? std::sqrt(fitted(i, j) * fitted(j, i))
                                : 0.0;
            }
        }
        break;
    }
    }
    return out;
}

ExchangeMatrix to_exchange(const Matrix &symmetric, Labels labels) {
    const Index n = symmetric.rows();
    if (n == 0 || symmetric.cols() != n) {
        throw InputError("to_exchange: matrix must be square and non-empty");
    }
    if (labels.empty()) {
        labels = default_labels(n);
    }
    if ((symmetric.array() < 0.0).any() || !symmetric.allFinite()) {
        throw InputError("to_exchange: entries must be finite and nonnegative");
    }
    const double scale = symmetric.cwiseAbs().maxCoeff();
    if ((symmetric - symmetric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
        throw InputError("to_exchange: matrix is not symmetric");
    }
    const double total = symmetric.sum();
    if (!(total > 0.0)) {
        throw InputError("to_exchange: no positive entry");
    }
    const Vector rows = symmetric.rowwise().sum();
    for (Index i = 0; i < n; ++i) {
        if (!(rows(i) > 0.0)) {
            throw InputError("vertex '" + labels[static_cast<std::size_t>(i)] +
                             "' is isolated (zero weight); vertex weights must be strictly positive");
        }
    }
    return ExchangeMatrix(symmetric / total, std::move(labels));
}

ExchangeMatrix strip_diagonal(const ExchangeMatrix &exchange) {
    const Matrix &e = exchange.e();
    const Index n = exchange.size();
    const double mass = 1.0 - e.trace();
    if (!(mass > ExchangeMatrix::kTolerance)) {
        throw InputError("strip_diagonal: pure-diagonal graph, no off-diagonal structure remains");
    }
    for (Index i = 0; i < n; ++i) {
        if (!(exchange.f()(i) - e(i, i) > 0.0)) {
            throw InputError("strip_diagonal: vertex '" +
                             exchange.labels()[static_cast<std::size_t>(i)] +
                             "' only has self-flow");
        }
    }
    if (exchange.has_zero_diagonal()) {
        return exchange;
    }
    Matrix stripped = e;
    stripped.diagonal().setZero();
    // Off-diagonal mass equals 1 - trace; the realized sum absorbs the
    // rounding slack allowed on the input total.
    stripped /= stripped.sum();
    return ExchangeMatrix(std::move(stripped), exchange.labels());
}

} // namespace flowdist
