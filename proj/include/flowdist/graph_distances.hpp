#pragma once

#include "flowdist/exchange.hpp"
#include "flowdist/spectral.hpp"
#include "flowdist/types.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>

namespace flowdist {

enum class Family { chi2, diffusive, frozen, commute, absorption, sif, custom };

/// Spectral weighting g(lambda) of a natural distance.
class GSpec {
  public:
    static GSpec chi2() { return GSpec(Family::chi2); }
    static GSpec diffusive() { return GSpec(Family::diffusive); }
    static GSpec frozen() { return GSpec(Family::frozen); }
    static GSpec commute() { return GSpec(Family::commute); }
    static GSpec sif() { return GSpec(Family::sif); }
    /// g = (1 - rho) / (1 - rho lambda), 0 < rho < 1.
    static GSpec absorption(double rho);
    /// User function; must be nonnegative on the spectrum it is applied to.
    /// `irreducible` declares g(1) = infinity.
    static GSpec custom(std::function<double(double)> g, std::string name = "custom",
                        bool irreducible = false);

    /// Parses "chi2", "diffusive", "frozen", "commute", "sif" and
    /// "absorption" (the latter taking `rho`).
    static GSpec parse(std::string_view name, std::optional<double> rho = std::nullopt);

    double operator()(double lambda) const;

    Family family() const { return family_; }
    double rho() const { return rho_; }
    std::string name() const;
    /// g(0) == 0: zero distance between equivalent vertices.
    bool focused() const { return (*this)(0.0) == 0.0; }
    /// g(1) == infinity: infinite distance across components.
    bool irreducible() const;

  private:
    explicit GSpec(Family family) : family_(family) {}

    Family family_;
    double rho_ = 0.0;
    std::function<double(double)> custom_;
    std::string custom_name_;
    bool custom_irreducible_ = false;
};

/// Squared distances with the vertex weights they refer to.
struct DistanceMatrix {
    Matrix D;
    Vector p;
    Labels labels;
    std::string family;
    bool focused = false;
    bool irreducible = false;
    std::optional<bool> euclidean_verified;

    Index size() const { return D.rows(); }
};

struct NaturalDistanceOptions {
    /// Irreducible families refuse graphs with lambda_1 > 1 - threshold.
    double disconnect_threshold = 1e-12;
    /// The diffusive family requires min lambda >= -tolerance.
    double diffusive_tolerance = 1e-12;
};

/// D_ij = sum_{a>=1} g(lambda_a) (x_ia - x_ja)^2, with eigenvalues clamped
/// to [-1, 1] before g is applied.
DistanceMatrix natural_distance(const SpectralBasis &basis, const GSpec &spec,
                                const NaturalDistanceOptions &options = {});

struct FundamentalMatrix {
    Matrix Y; // (Pi - E + f f')^{-1} Pi
    Matrix M; // mean first-passage times, m_ij = (y_jj - y_ij) / f_j
};

/// Requires a regular chain.
FundamentalMatrix fundamental_matrix(const ExchangeMatrix &exchange);

/// Expected visits before absorption, V = (Pi - rho E)^{-1} Pi, 0 < rho < 1.
Matrix absorption_visits(const ExchangeMatrix &exchange, double rho);

/// All-pairs minimal sums of edge resistances 1/e_ij over off-diagonal edges.
/// Pairs in different components get kInfinity.
DistanceMatrix shortest_path_distance(const ExchangeMatrix &exchange);

/// Weakly focused distance of a diagonal-free exchange matrix:
/// sum_{k != i,j} f_k (e_ik / (f_i f_k) - e_jk / (f_j f_k))^2.
DistanceMatrix jump_distance(const ExchangeMatrix &stripped);

class PhiSpec {
  public:
    enum class Kind { power, saturating_exp };

    /// D^a, 0 < a <= 1.
    static PhiSpec power(double exponent);
    /// 1 - exp(-b D), b > 0.
    static PhiSpec saturating_exp(double rate);
    /// "power:<a>" or "exp:<b>".
    static PhiSpec parse(std::string_view text);

    double operator()(double d) const;
    Kind kind() const { return kind_; }
    double parameter() const { return parameter_; }
    std::string name() const;

  private:
    PhiSpec(Kind kind, double parameter) : kind_(kind), parameter_(parameter) {}

    Kind kind_;
    double parameter_;
};

/// Entrywise Schoenberg transformation. The euclidean flag is reset: the
/// property is inherited in theory but only verified on request.
DistanceMatrix schoenberg_transform(const DistanceMatrix &distances, const PhiSpec &phi);

/// (1/2) sum_ij e_ij (y_i - y_j)^2.
double dirichlet_energy(const ExchangeMatrix &exchange, const Vector &y);

/// Commute distance between i and j as 1 / E(y0), y0 being the harmonic
/// potential with y_i = 1, y_j = 0. kInfinity when i and j are disconnected.
double electrical_commute(const ExchangeMatrix &exchange, Index i, Index j);

/// Connected components over off-diagonal edges; component id per vertex.
std::vector<Index> connected_components(const ExchangeMatrix &exchange);

} // namespace flowdist
