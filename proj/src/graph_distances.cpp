#include "flowdist/graph_distances.hpp"

#include "flowdist/csv.hpp"
#include "flowdist/error.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace flowdist {

namespace {

// Clamps roundoff negativity, zeroes the diagonal and enforces exact symmetry.
void finalize(Matrix &d) {
    const Index n = d.rows();
    for (Index i = 0; i < n; ++i) {
        d(i, i) = 0.0;
        for (Index j = i + 1; j < n; ++j) {
            double value = 0.5 * (d(i, j) + d(j, i));
            if (value < 0.0) {
                if (value < -1e-12) {
                    throw NumericalError("distance entry " + std::to_string(value) +
                                         " is negative beyond roundoff");
                }
                value = 0.0;
            }
            d(i, j) = value;
            d(j, i) = value;
        }
    }
}

} // namespace

GSpec GSpec::absorption(double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InputError("absorption distance requires 0 < rho < 1, got " + std::to_string(rho));
    }
    GSpec spec(Family::absorption);
    spec.rho_ = rho;
    return spec;
}

GSpec GSpec::custom(std::function<double(double)> g, std::string name, bool irreducible) {
    if (!g) {
        throw InputError("custom distance requires a function");
    }
    GSpec spec(Family::custom);
    spec.custom_ = std::move(g);
    spec.custom_name_ = std::move(name);
    spec.custom_irreducible_ = irreducible;
    return spec;
}

GSpec GSpec::parse(std::string_view name, std::optional<double> rho) {
    if (name == "chi2") {
        return chi2();
    }
    if (name == "diffusive") {
        return diffusive();
    }
    if (name == "frozen") {
        return frozen();
    }
    if (name == "commute") {
        return commute();
    }
    if (name == "sif") {
        return sif();
    }
    if (name == "absorption") {
        if (!rho) {
            throw InputError("absorption distance requires rho");
        }
        return absorption(*rho);
    }
    throw InputError("unknown distance family '" + std::string(name) + "'");
}

double GSpec::operator()(double lambda) const {
    switch (family_) {
    case Family::chi2:
        return lambda * lambda;
    case Family::diffusive:
        return lambda;
    case Family::frozen:
        return 1.0;
    case Family::commute:
        return 1.0 / (1.0 - lambda);
    case Family::absorption:
        return (1.0 - rho_) / (1.0 - rho_ * lambda);
    case Family::sif:
        return lambda * lambda / (1.0 - lambda);
    case Family::custom:
        return custom_(lambda);
    }
    return 0.0;
}

std::string GSpec::name() const {
    switch (family_) {
    case Family::chi2:
        return "chi2";
    case Family::diffusive:
        return "diffusive";
    case Family::frozen:
        return "frozen";
    case Family::commute:
        return "commute";
    case Family::absorption:
        return "absorption(" + csv::format_number(rho_) + ")";
    case Family::sif:
        return "sif";
    case Family::custom:
        return custom_name_;
    }
    return "?";
}

bool GSpec::irreducible() const {
    switch (family_) {
    case Family::commute:
    case Family::sif:
        return true;
    case Family::custom:
        return custom_irreducible_;
    default:
        return false;
    }
}

DistanceMatrix natural_distance(const SpectralBasis &basis, const GSpec &spec,
                                const NaturalDistanceOptions &options) {
    const Index n = basis.size();
    if (spec.irreducible() && n > 1 && basis.lambda(1) > 1.0 - options.disconnect_threshold) {
        throw InputError("irreducible distance on disconnected graph (lambda_1 = " +
                         csv::format_number(basis.lambda(1)) + ")");
    }
    if (spec.family() == Family::diffusive && basis.lambda.minCoeff() < -options.diffusive_tolerance) {
        throw InputError("exchange matrix not diffusive (smallest eigenvalue " +
                         csv::format_number(basis.lambda.minCoeff()) + ")");
    }

    Vector weight(n);
    weight(0) = 0.0;
    for (Index a = 1; a < n; ++a) {
        const double lambda = std::clamp(basis.lambda(a), -1.0, 1.0);
        const double g = spec(lambda);
        if (!std::isfinite(g)) {
            throw InputError(spec.name() + ": g(" + csv::format_number(lambda) +
                             ") is not finite");
        }
        if (g < 0.0) {
            throw InputError(spec.name() + ": g is negative at eigenvalue " +
                             csv::format_number(lambda));
        }
        weight(a) = g;
    }

    const Matrix coords = basis.X * weight.cwiseSqrt().asDiagonal();
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double value = (coords.row(i) - coords.row(j)).squaredNorm();
            d(i, j) = value;
            d(j, i) = value;
        }
    }
    finalize(d);

    DistanceMatrix out;
    out.D = std::move(d);
    out.p = basis.f;
    out.labels = basis.labels;
    out.family = spec.name();
    out.focused = spec.focused();
    out.irreducible = spec.irreducible();
    return out;
}

FundamentalMatrix fundamental_matrix(const ExchangeMatrix &exchange) {
    if (!is_regular(decompose(exchange))) {
        throw InputError("fundamental_matrix: singular system, the chain is disconnected or periodic");
    }
    const Vector &f = exchange.f();
    const Index n = exchange.size();
    const Matrix system = Matrix(f.asDiagonal()) - exchange.e() + f * f.transpose();
    Eigen::PartialPivLU<Matrix> lu(system);
    FundamentalMatrix out;
    out.Y = lu.solve(Matrix(f.asDiagonal()));
    if (!out.Y.allFinite()) {
        throw NumericalError("fundamental_matrix: singular system");
    }
    out.M = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j) {
                out.M(i, j) = (out.Y(j, j) - out.Y(i, j)) / f(j);
            }
        }
    }
    return out;
}

Matrix absorption_visits(const ExchangeMatrix &exchange, double rho) {
    if (!(rho > 0.0 && rho < 1.0)) {
        throw InputError("absorption_visits requires 0 < rho < 1, got " + std::to_string(rho));
    }
    const Vector &f = exchange.f();
    const Matrix system = Matrix(f.asDiagonal()) - rho * exchange.e();
    Matrix visits = Eigen::PartialPivLU<Matrix>(system).solve(Matrix(f.asDiagonal()));
    if (!visits.allFinite()) {
        throw NumericalError("absorption_visits: singular system");
    }
    return visits;
}

DistanceMatrix shortest_path_distance(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    std::vector<std::vector<std::pair<Index, double>>> adjacency(static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < n; ++j) {
            if (i != j && exchange(i, j) > 0.0) {
                adjacency[static_cast<std::size_t>(i)].emplace_back(j, 1.0 / exchange(i, j));
            }
        }
    }

    Matrix d = Matrix::Constant(n, n, kInfinity);
    using Entry = std::pair<double, Index>;
    for (Index source = 0; source < n; ++source) {
        auto dist = d.col(source);
        std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
        dist(source) = 0.0;
        queue.emplace(0.0, source);
        while (!queue.empty()) {
            const auto [length, u] = queue.top();
            queue.pop();
            if (length > dist(u)) {
                continue;
            }
            for (const auto &[v, resistance] : adjacency[static_cast<std::size_t>(u)]) {
                const double candidate = length + resistance;
                if (candidate < dist(v)) {
                    dist(v) = candidate;
                    queue.emplace(candidate, v);
                }
            }
        }
    }
    // Path sums are accumulated in different orders from either end.
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double value = std::min(d(i, j), d(j, i));
            d(i, j) = value;
            d(j, i) = value;
        }
    }

    DistanceMatrix out;
    out.D = std::move(d);
    out.p = exchange.f();
    out.labels = exchange.labels();
    out.family = "shortest_path";
    out.focused = false;
    out.irreducible = true;
    return out;
}

DistanceMatrix jump_distance(const ExchangeMatrix &stripped) {
    if (!stripped.has_zero_diagonal()) {
        throw InputError("jump_distance: exchange matrix must have a zero diagonal "
                         "(apply strip_diagonal first)");
    }
    const Index n = stripped.size();
    const Vector &f = stripped.f();
    // scaled(i, k) = e_ik / (f_i f_k)
    Matrix scaled(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index k = 0; k < n; ++k) {
            scaled(i, k) = stripped(i, k) / (f(i) * f(k));
        }
    }
    Matrix d = Matrix::Zero(n, n);
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            double sum = 0.0;
            for (Index k = 0; k < n; ++k) {
                if (k != i && k != j) {
                    const double gap = scaled(i, k) - scaled(j, k);
                    sum += f(k) * gap * gap;
                }
            }
            d(i, j) = sum;
            d(j, i) = sum;
        }
    }

    DistanceMatrix out;
    out.D = std::move(d);
    out.p = f;
    out.labels = stripped.labels();
    out.family = "jump";
    out.focused = false;
    out.irreducible = false;
    return out;
}

PhiSpec PhiSpec::power(double exponent) {
    if (!(exponent > 0.0 && exponent <= 1.0)) {
        throw InputError("power transform requires 0 < a <= 1, got " + std::to_string(exponent));
    }
    return {Kind::power, exponent};
}

PhiSpec PhiSpec::saturating_exp(double rate) {
    if (!(rate > 0.0) || !std::isfinite(rate)) {
        throw InputError("saturating exponential requires b > 0, got " + std::to_string(rate));
    }
    return {Kind::saturating_exp, rate};
}

PhiSpec PhiSpec::parse(std::string_view text) {
    const auto colon = text.find(':');
    if (colon == std::string_view::npos) {
        throw InputError("transform '" + std::string(text) + "' must read power:<a> or exp:<b>");
    }
    const auto kind = text.substr(0, colon);
    const auto value = csv::parse_number(text.substr(colon + 1));
    if (!value) {
        throw InputError("transform '" + std::string(text) + "': unparsable parameter");
    }
    if (kind == "power") {
        return power(*value);
    }
    if (kind == "exp") {
        return saturating_exp(*value);
    }
    throw InputError("unknown transform '" + std::string(kind) + "' (expected power or exp)");
}

double PhiSpec::operator()(double d) const {
    if (kind_ == Kind::power) {
        return d == 0.0 ? 0.0 : std::pow(d, parameter_);
    }
    return -std::expm1(-parameter_ * d);
}

std::string PhiSpec::name() const {
    return (kind_ == Kind::power ? "power(" : "exp(") + csv::format_number(parameter_) + ")";
}

DistanceMatrix schoenberg_transform(const DistanceMatrix &distances, const PhiSpec &phi) {
    if ((distances.D.array() < 0.0).any()) {
        throw InputError("schoenberg_transform: distances must be nonnegative");
    }
    DistanceMatrix out = distances;
    out.D = distances.D.unaryExpr([&phi](double d) { return phi(d); });
    out.D.diagonal().setZero();
    out.family = distances.family + "|" + phi.name();
    out.euclidean_verified.reset();
    return out;
}

double dirichlet_energy(const ExchangeMatrix &exchange, const Vector &y) {
    const Index n = exchange.size();
    if (y.size() != n) {
        throw InputError("dirichlet_energy: vector size does not match the graph");
    }
    double energy = 0.0;
    for (Index i = 0; i < n; ++i) {
        for (Index j = i + 1; j < n; ++j) {
            const double gap = y(i) - y(j);
            energy += exchange(i, j) * gap * gap;
        }
    }
    return energy;
}

std::vector<Index> connected_components(const ExchangeMatrix &exchange) {
    const Index n = exchange.size();
    std::vector<Index> component(static_cast<std::size_t>(n), -1);
    Index next = 0;
    for (Index start = 0; start < n; ++start) {
        if (component[static_cast<std::size_t>(start)] >= 0) {
            continue;
        }
        std::vector<Index> stack{start};
        component[static_cast<std::size_t>(start)] = next;
        while (!stack.empty()) {
            const Index u = stack.back();
            stack.pop_back();
            for (Index v = 0; v < n; ++v) {
                if (v != u && exchange(u, v) > 0.0 && component[static_cast<std::size_t>(v)] < 0) {
                    component[static_cast<std::size_t>(v)] = next;
                    stack.push_back(v);
                }
            }
        }
        ++next;
    }
    return component;
}

double electrical_commute(const ExchangeMatrix &exchange, Index i, Index j) {
    const Index n = exchange.size();
    if (i < 0 || j < 0 || i >= n || j >= n || i == j) {
        throw InputError("electrical_commute: need two distinct vertices");
    }
    const auto component = connected_components(exchange);
    const Index home = component[static_cast<std::size_t>(i)];
    if (component[static_cast<std::size_t>(j)] != home) {
        return kInfinity;
    }

    std::vector<Index> interior;
    for (Index k = 0; k < n; ++k) {
        if (k != i && k != j && component[static_cast<std::size_t>(k)] == home) {
            interior.push_back(k);
        }
    }
    Vector y = Vector::Zero(n);
    y(i) = 1.0;
    const auto m = static_cast<Index>(interior.size());
    if (m > 0) {
        // Harmonic on the interior: sum_l e_kl (y_k - y_l) = 0.
        Matrix laplacian = Matrix::Zero(m, m);
        Vector rhs(m);
        for (Index a = 0; a < m; ++a) {
            const Index k = interior[static_cast<std::size_t>(a)];
            laplacian(a, a) = exchange.f()(k) - exchange(k, k);
            for (Index b = 0; b < m; ++b) {
                if (b != a) {
                    laplacian(a, b) = -exchange(k, interior[static_cast<std::size_t>(b)]);
                }
            }
            rhs(a) = exchange(k, i);
        }
        Eigen::LDLT<Matrix> solver(laplacian);
        const Vector potential = solver.solve(rhs);
        if (solver.info() != Eigen::Success || !potential.allFinite()) {
            throw NumericalError("electrical_commute: singular harmonic system");
        }
        for (Index a = 0; a < m; ++a) {
            y(interior[static_cast<std::size_t>(a)]) = potential(a);
        }
    }
    return 1.0 / dirichlet_energy(exchange, y);
}

} // namespace flowdist
