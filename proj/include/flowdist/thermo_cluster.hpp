#pragma once

#include "flowdist/exchange.hpp"
#include "flowdist/graph_distances.hpp"
#include "flowdist/types.hpp"

#include <optional>
#include <vector>

namespace flowdist {

/// Row-stochastic n x m matrix of soft group memberships.
class Membership {
  public:
    static constexpr double kTolerance = 1e-12;

    explicit Membership(Matrix z);

    static Membership identity(Index n);
    static Membership single_group(Index n);
    /// Hard membership from a group index per vertex (0-based, dense).
    static Membership from_assignment(const std::vector<Index> &groups);

    const Matrix &z() const { return z_; }
    Index vertices() const { return z_.rows(); }
    Index groups() const { return z_.cols(); }
    double operator()(Index i, Index g) const { return z_(i, g); }

    /// Index of the largest membership per vertex (lowest group on ties).
    std::vector<Index> hard_assignment() const;

  private:
    Matrix z_;
};

struct GroupStats {
    Vector rho;               // rho_g = sum_i f_i z_ig
    Matrix theta;             // Z' Pi Z
    Matrix association;       // Z' E Z
    Matrix pi;                // column g = f_i z_ig / rho_g (zero for empty groups)
    std::vector<bool> empty;  // rho_g == 0
};

GroupStats group_stats(const Membership &membership, const ExchangeMatrix &exchange);

struct Information {
    double mutual = 0.0;           // I(O, Z)
    double object_entropy = 0.0;   // H(O)
    double group_entropy = 0.0;    // H(Z)
    double softness = 0.0;         // H(Z|O) = H(Z) - I
};

/// Object-group entropies with natural logarithms.
Information mutual_information(const Membership &membership, const Vector &f);

struct FreeEnergy {
    double free_energy = 0.0; // F = within + T * mutual
    double within = 0.0;      // Delta_W
    double between = 0.0;     // Delta_B
    double total = 0.0;       // Delta
    double mutual = 0.0;      // I(O, Z)
};

/// Free energy of a membership; the weights of `distances` are the object
/// weights f.
FreeEnergy free_energy(const Membership &membership, const DistanceMatrix &distances, double temperature);

/// D_ig: squared distance from each vertex to each group centroid. Empty
/// groups get +infinity.
Matrix centroid_distances(const Membership &membership, const DistanceMatrix &distances);

/// One fixed-point update z_ig <- rho_g exp(-D_ig/T) / sum_h rho_h exp(-D_ih/T).
Membership em_step(const Membership &membership, const DistanceMatrix &distances, double temperature);

struct IterateOptions {
    int max_iter = 10'000;
    double tol = 1e-9;
    bool track_free_energy = false;
};

struct IterationResult {
    Membership membership;
    int iterations = 0;
    bool converged = false;
    /// F before the first step and after each step, when tracked.
    std::vector<double> free_energy;
};

/// Repeats em_step until max |dz| < tol or max_iter steps. Never throws on
/// non-convergence.
IterationResult iterate_to_convergence(const Membership &membership, const DistanceMatrix &distances,
                                       double temperature, const IterateOptions &options = {});

/// Merges groups whose relative overlap theta_gh / sqrt(theta_gg theta_hh)
/// reaches 1 - tol (transitively) by adding their columns. Groups with
/// rho_g < 1e-14 are dropped and their residual mass is renormalized away.
Membership merge_equivalent_groups(const Membership &membership, const Vector &f, double tol = 1e-10);

/// H(Z) + H(R) - 2 I(Z, R) with joint weights sum_i f_i z_ig r_ih.
double variation_of_information(const Membership &a, const Membership &b, const Vector &f);

inline constexpr double kNegligibleInertia = 1e-12;

/// Increasing ladder of relative temperatures T / Delta.
struct Schedule {
    std::vector<double> relative;

    /// start, start*ratio, ... while <= end (within rounding).
    static Schedule geometric(double start = 0.02, double end = 2.0, double ratio = 1.05);
};

struct AnnealOptions {
    IterateOptions iterate{};
    double merge_tol = 1e-10;
    bool stop_at_single_group = false;
    /// Collapse to one group when H(Z) < coalesce_entropy or
    /// F - Delta > -coalesce_free_energy.
    bool force_coalescence = false;
    double coalesce_entropy = 1e-6;
    double coalesce_free_energy = 1e-9;
    std::optional<Membership> reference;
};

struct TraceRecord {
    double temperature = 0.0;
    double relative_temperature = 0.0;
    Index groups = 0;
    double within = 0.0;
    double mutual = 0.0;
    double free_energy = 0.0;
    double softness = 0.0;
    std::optional<double> variation_of_information;
    int iterations = 0;
    bool converged = true;
    bool coalesced = false;
};

struct AnnealResult {
    double total_inertia = 0.0;
    std::vector<TraceRecord> trace;
    std::vector<Membership> memberships; // one per trace record
};

/// Soft hierarchical clustering from the identity membership at the lowest
/// temperature, carrying each converged and merged membership to the next
/// temperature. When Delta <= kNegligibleInertia (all distances are round-off)
/// temperatures are used unscaled.
AnnealResult anneal(const DistanceMatrix &distances, const Schedule &schedule,
                    const AnnealOptions &options = {});

} // namespace flowdist
