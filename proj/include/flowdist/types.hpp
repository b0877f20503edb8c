#pragma once

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace flowdist {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;
using Labels = std::vector<std::string>;

/// In-band value for pairs lying in different connected components.
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Unordered vertex pair, stored with first < second.
struct VertexPair {
    Index first = 0;
    Index second = 0;

    friend auto operator<=>(const VertexPair &, const VertexPair &) = default;
};

/// "1", "2", ..., "n"; used when a matrix is built without explicit labels.
Labels default_labels(Index n);

} // namespace flowdist
