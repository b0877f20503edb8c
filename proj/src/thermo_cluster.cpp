#include "flowdist/thermo_cluster.hpp"

#include "flowdist/error.hpp"
#include "flowdist/euclid_mds.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace flowdist {

namespace {

constexpr double kEmptyGroup = 1e-14;

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

void check_distances(const DistanceMatrix &distances, Index n) {
    if (distances.size() != n || distances.p.size() != n) {
        throw InputError("membership and distance matrix disagree in size");
    }
    if (!distances.D.allFinite()) {
        throw InputError("clustering requires finite distances");
    }
}

} // namespace

Membership::Membership(Matrix z) : z_(std::move(z)) {
    if (z_.rows() == 0 || z_.cols() == 0) {
        throw InputError("membership must have at least one vertex and one group");
    }
    if (!z_.allFinite() || (z_.array() < 0.0).any()) {
        throw InputError("membership degrees must be finite and nonnegative");
    }
    for (Index i = 0; i < z_.rows(); ++i) {
        const double sum = z_.row(i).sum();
        if (std::abs(sum - 1.0) > kTolerance) {
            throw InputError("membership row " + std::to_string(i + 1) + " sums to " +
                             std::to_string(sum));
        }
    }
}

Membership Membership::identity(Index n) { return Membership(Matrix::Identity(n, n)); }

Membership Membership::single_group(Index n) { return Membership(Matrix::Ones(n, 1)); }

Membership Membership::from_assignment(const std::vector<Index> &groups) {
    if (groups.empty()) {
        throw InputError("empty assignment");
    }
    const Index m = *std::max_element(groups.begin(), groups.end()) + 1;
    Matrix z = Matrix::Zero(static_cast<Index>(groups.size()), m);
    for (std::size_t i = 0; i < groups.size(); ++i) {
        if (groups[i] < 0) {
            throw InputError("negative group index");
        }
        z(static_cast<Index>(i), groups[i]) = 1.0;
    }
    return Membership(std::move(z));
}

std::vector<Index> Membership::hard_assignment() const {
    std::vector<Index> out(static_cast<std::size_t>(vertices()));
    for (Index i = 0; i < vertices(); ++i) {
        Index best = 0;
        z_.row(i).maxCoeff(&best);
        out[static_cast<std::size_t>(i)] = best;
    }
    return out;
}

GroupStats group_stats(const Membership &membership, const ExchangeMatrix &exchange) {
    if (membership.vertices() != exchange.size()) {
        throw InputError("group_stats: membership and graph disagree in size");
    }
    const Matrix &z = membership.z();
    const Vector &f = exchange.f();
    GroupStats stats;
    stats.rho = z.transpose() * f;
    stats.theta = z.transpose() * f.asDiagonal() * z;
    stats.association = z.transpose() * exchange.e() * z;
    stats.pi = Matrix::Zero(z.rows(), z.cols());
    stats.empty.assign(static_cast<std::size_t>(z.cols()), false);
    for (Index g = 0; g < z.cols(); ++g) {
        if (stats.rho(g) > 0.0) {
            stats.pi.col(g) = f.cwiseProduct(z.col(g)) / stats.rho(g);
        } else {
            stats.empty[static_cast<std::size_t>(g)] = true;
        }
    }
    return stats;
}

Information mutual_information(const Membership &membership, const Vector &f) {
    const Matrix &z = membership.z();
    if (z.rows() != f.size()) {
        throw InputError("mutual_information: membership and weights disagree in size");
    }
    const Vector rho = z.transpose() * f;
    Information info;
    for (Index i = 0; i < f.size(); ++i) {
        info.object_entropy -= xlogx(f(i));
    }
    for (Index g = 0; g < rho.size(); ++g) {
        info.group_entropy -= xlogx(rho(g));
    }
    // I = sum_ig f_i z_ig ln(z_ig / rho_g); H(Z|O) = -sum_ig f_i z_ig ln z_ig.
    for (Index i = 0; i < z.rows(); ++i) {
        for (Index g = 0; g < z.cols(); ++g) {
            const double w = z(i, g);
            if (w > 0.0) {
                info.mutual += f(i) * w * std::log(w / rho(g));
                info.softness -= f(i) * xlogx(w);
            }
        }
    }
    info.mutual = std::max(0.0, info.mutual);
    info.softness = std::max(0.0, info.softness);
    return info;
}

Matrix centroid_distances(const Membership &membership, const DistanceMatrix &distances) {
    const Matrix &z = membership.z();
    const Vector &f = distances.p;
    const Vector rho = z.transpose() * f;
    Matrix out(z.rows(), z.cols());
    for (Index g = 0; g < z.cols(); ++g) {
        if (!(rho(g) > 0.0)) {
            out.col(g).setConstant(kInfinity);
            continue;
        }
        const Vector pi = f.cwiseProduct(z.col(g)) / rho(g);
        out.col(g) = centroid_and_inertia(distances.D, pi).distances;
    }
    return out;
}

FreeEnergy free_energy(const Membership &membership, const DistanceMatrix &distances, double temperature) {
    if (!(temperature > 0.0)) {
        throw InputError("free_energy: temperature must be positive");
    }
    check_distances(distances, membership.vertices());
    const Matrix &z = membership.z();
    const Vector &f = distances.p;
    const Centroid overall = centroid_and_inertia(distances.D, f);
    const Vector rho = z.transpose() * f;

    FreeEnergy out;
    out.total = overall.inertia;
    for (Index g = 0; g < z.cols(); ++g) {
        if (!(rho(g) > 0.0)) {
            continue;
        }
        const Vector pi = f.cwiseProduct(z.col(g)) / rho(g);
        const Centroid group = centroid_and_inertia(distances.D, pi);
        out.within += rho(g) * group.inertia;
        // D_g0 from Huygens: sum_i pi_i D_i0 = D_g0 + Delta_g.
        out.between += rho(g) * (pi.dot(overall.distances) - group.inertia);
    }
    out.mutual = mutual_information(membership, f).mutual;
    out.free_energy = out.within + temperature * out.mutual;
    return out;
}

Membership em_step(const Membership &membership, const DistanceMatrix &distances, double temperature) {
    if (!(temperature > 0.0)) {
        throw InputError("em_step: temperature must be positive");
    }
    check_distances(distances, membership.vertices());
    const Matrix &z = membership.z();
    const Vector rho = z.transpose() * distances.p;
    const Matrix centroid = centroid_distances(membership, distances);

    const Index n = z.rows();
    const Index m = z.cols();
    Matrix next = Matrix::Zero(n, m);
    Vector log_weight(m);
    for (Index i = 0; i < n; ++i) {
        double top = -kInfinity;
        for (Index g = 0; g < m; ++g) {
            log_weight(g) = rho(g) > 0.0 ? std::log(rho(g)) - centroid(i, g) / temperature : -kInfinity;
            top = std::max(top, log_weight(g));
        }
        if (!std::isfinite(top)) {
            throw NumericalError("em_step: every group is empty");
        }
        double sum = 0.0;
        for (Index g = 0; g < m; ++g) {
            const double w = rho(g) > 0.0 ? std::exp(log_weight(g) - top) : 0.0;
            next(i, g) = w;
            sum += w;
        }
        next.row(i) /= sum;
    }
    return Membership(std::move(next));
}

IterationResult iterate_to_convergence(const Membership &membership, const DistanceMatrix &distances,
                                       double temperature, const IterateOptions &options) {
    if (options.max_iter < 1 || !(options.tol > 0.0)) {
        throw InputError("iterate_to_convergence: need max_iter >= 1 and tol > 0");
    }
    IterationResult result{membership, 0, false, {}};
    if (options.track_free_energy) {
        result.free_energy.push_back(free_energy(membership, distances, temperature).free_energy);
    }
    while (result.iterations < options.max_iter) {
        Membership next = em_step(result.membership, distances, temperature);
        ++result.iterations;
        const double change = (next.z() - result.membership.z()).cwiseAbs().maxCoeff();
        result.membership = std::move(next);
        if (options.track_free_energy) {
            result.free_energy.push_back(
                free_energy(result.membership, distances, temperature).free_energy);
        }
        if (change < options.tol) {
            result.converged = true;
            break;
        }
    }
    return result;
}

Membership merge_equivalent_groups(const Membership &membership, const Vector &f, double tol) {
    const Matrix &z = membership.z();
    const Index m = z.cols();
    if (f.size() != z.rows()) {
        throw InputError("merge_equivalent_groups: membership and weights disagree in size");
    }
    const Vector rho = z.transpose() * f;
    const Matrix theta = z.transpose() * f.asDiagonal() * z;

    std::vector<Index> parent(static_cast<std::size_t>(m));
    std::iota(parent.begin(), parent.end(), Index{0});
    const auto find = [&parent](Index g) {
        while (parent[static_cast<std::size_t>(g)] != g) {
            g = parent[static_cast<std::size_t>(g)];
        }
        return g;
    };
    for (Index g = 0; g < m; ++g) {
        if (rho(g) < kEmptyGroup) {
            continue;
        }
        for (Index h = g + 1; h < m; ++h) {
            if (rho(h) < kEmptyGroup) {
                continue;
            }
            const double overlap = theta(g, h) / std::sqrt(theta(g, g) * theta(h, h));
            if (overlap >= 1.0 - tol) {
                const Index a = find(g);
                const Index b = find(h);
                if (a != b) {
                    parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
                }
            }
        }
    }

    std::vector<Index> column(static_cast<std::size_t>(m), -1);
    Index kept = 0;
    for (Index g = 0; g < m; ++g) {
        if (rho(g) >= kEmptyGroup && find(g) == g) {
            column[static_cast<std::size_t>(g)] = kept++;
        }
    }
    if (kept == 0) {
        throw NumericalError("merge_equivalent_groups: every group is empty");
    }
    Matrix merged = Matrix::Zero(z.rows(), kept);
    for (Index g = 0; g < m; ++g) {
        if (rho(g) >= kEmptyGroup) {
            merged.col(column[static_cast<std::size_t>(find(g))]) += z.col(g);
        }
    }
    for (Index i = 0; i < merged.rows(); ++i) {
        merged.row(i) /= merged.row(i).sum();
    }
    return Membership(std::move(merged));
}

double variation_of_information(const Membership &a, const Membership &b, const Vector &f) {
    if (a.vertices() != b.vertices() || a.vertices() != f.size()) {
        throw InputError("variation_of_information: memberships and weights disagree in size");
    }
    const Matrix joint = a.z().transpose() * f.asDiagonal() * b.z();
    const Vector left = joint.rowwise().sum();
    const Vector right = joint.colwise().sum();
    // H(Z|R) + H(R|Z), a sum of nonnegative terms; equals H(Z) + H(R) - 2 I(Z,R).
    double vi = 0.0;
    for (Index g = 0; g < joint.rows(); ++g) {
        for (Index h = 0; h < joint.cols(); ++h) {
            const double p = joint(g, h);
            if (p > 0.0) {
                vi -= p * (std::log(p / left(g)) + std::log(p / right(h)));
            }
        }
    }
    return std::max(0.0, vi);
}

Schedule Schedule::geometric(double start, double end, double ratio) {
    if (!(start > 0.0) || !(ratio > 1.0) || !(end >= start)) {
        throw InputError("schedule: need 0 < start <= end and ratio > 1");
    }
    Schedule schedule;
    for (int k = 0;; ++k) {
        const double value = start * std::pow(ratio, k);
        if (value > end * (1.0 + 1e-12)) {
            break;
        }
        schedule.relative.push_back(value);
    }
    return schedule;
}

AnnealResult anneal(const DistanceMatrix &distances, const Schedule &schedule, const AnnealOptions &options) {
    const Index n = distances.size();
    check_distances(distances, n);
    const auto &ladder = schedule.relative;
    if (ladder.empty()) {
        throw InputError("anneal: empty temperature schedule");
    }
    for (std::size_t k = 0; k < ladder.size(); ++k) {
        if (!(ladder[k] > 0.0) || (k > 0 && !(ladder[k] > ladder[k - 1]))) {
            throw InputError("anneal: schedule must be positive and strictly increasing");
        }
    }
    if (options.reference && options.reference->vertices() != n) {
        throw InputError("anneal: reference partition has the wrong number of vertices");
    }

    const Vector &f = distances.p;
    AnnealResult result;
    result.total_inertia = centroid_and_inertia(distances.D, f).inertia;
    const double scale = result.total_inertia > kNegligibleInertia ? result.total_inertia : 1.0;

    Membership current = Membership::identity(n);
    for (const double relative : ladder) {
        const double temperature = relative * scale;
        IterationResult step = iterate_to_convergence(current, distances, temperature, options.iterate);
        current = merge_equivalent_groups(step.membership, f, options.merge_tol);

        TraceRecord record;
        if (options.force_coalescence && current.groups() > 1) {
            const Information info = mutual_information(current, f);
            const FreeEnergy energy = free_energy(current, distances, temperature);
            if (info.group_entropy < options.coalesce_entropy ||
                energy.free_energy - energy.total > -options.coalesce_free_energy) {
                current = Membership::single_group(n);
                record.coalesced = true;
            }
        }

        const FreeEnergy energy = free_energy(current, distances, temperature);
        const Information info = mutual_information(current, f);
        record.temperature = temperature;
        record.relative_temperature = relative;
        record.groups = current.groups();
        record.within = energy.within;
        record.mutual = info.mutual;
        record.free_energy = energy.free_energy;
        record.softness = info.softness;
        record.iterations = step.iterations;
        record.converged = step.converged;
        if (options.reference) {
            record.variation_of_information = variation_of_information(current, *options.reference, f);
        }
        result.trace.push_back(record);
        result.memberships.push_back(current);
        if (options.stop_at_single_group && current.groups() == 1) {
            break;
        }
    }
    return result;
}

} // namespace flowdist
