#include "flowdist/exchange.hpp"

#include "flowdist/error.hpp"

#include <cmath>
#include <unordered_set>

namespace flowdist {

Labels default_labels(Index n) {
    Labels labels;
    labels.reserve(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        labels.push_back(std::to_string(i + 1));
    }
    return labels;
}

ExchangeMatrix::ExchangeMatrix(Matrix e, Labels labels)
    : e_(std::move(e)), labels_(std::move(labels)) {
    const Index n = e_.rows();
    if (n == 0 || e_.cols() != n) {
        throw InputError("exchange matrix must be square and non-empty");
    }
    if (labels_.empty()) {
        labels_ = default_labels(n);
    }
    if (static_cast<Index>(labels_.size()) != n) {
        throw InputError("exchange matrix: " + std::to_string(labels_.size()) +
                         " labels for " + std::to_string(n) + " vertices");
    }
    std::unordered_set<std::string> seen;
    for (const auto &label : labels_) {
        if (!seen.insert(label).second) {
            throw InputError("exchange matrix: duplicate label '" + label + "'");
        }
    }
    if (!e_.allFinite()) {
        throw InputError("exchange matrix has non-finite entries");
    }
    if ((e_.array() < 0.0).any()) {
        throw InputError("exchange matrix has negative entries");
    }
    if ((e_ - e_.transpose()).cwiseAbs().maxCoeff() > kTolerance) {
        throw InputError("exchange matrix is not symmetric");
    }
    e_ = 0.5 * (e_ + e_.transpose()).eval();
    const double total = e_.sum();
    if (std::abs(total - 1.0) > kTolerance) {
        throw InputError("exchange matrix entries sum to " + std::to_string(total) +
                         ", expected 1");
    }
    f_ = e_.rowwise().sum();
    for (Index i = 0; i < n; ++i) {
        if (!(f_(i) > 0.0)) {
            throw InputError("vertex '" + labels_[static_cast<std::size_t>(i)] +
                             "' has zero weight");
        }
    }
}

bool ExchangeMatrix::has_zero_diagonal() const {
    return (e_.diagonal().array() == 0.0).all();
}

} // namespace flowdist
