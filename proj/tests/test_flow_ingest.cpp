#include "doctest.h"

#include "flowdist/error.hpp"
#include "flowdist/flow_ingest.hpp"
#include "support/graphs.hpp"

#include <cmath>
#include <sstream>

using namespace flowdist;
using flowdist::testing::Rng;

namespace {

FlowMatrix parse(const std::string &text) {
    std::istringstream in(text);
    return load_flow_matrix(in);
}

std::string error_of(const std::string &text) {
    try {
        parse(text);
    } catch (const InputError &error) {
        return error.what();
    }
    return {};
}

FlowMatrix two_by_two() {
    FlowMatrix flows;
    flows.counts.resize(2, 2);
    flows.counts << 10, 2, 4, 10;
    flows.labels = {"a", "b"};
    return flows;
}

FlowMatrix random_flows(Rng &rng, Index n, double zero_rate) {
    FlowMatrix flows;
    flows.counts.resize(n, n);
    // Zero cells come in symmetric pairs; a one-sided zero puts the
    // quasi-symmetric MLE on the boundary (see the dedicated test below).
    for (Index i = 0; i < n; ++i) {
        flows.counts(i, i) = std::floor(testing::uniform(rng, 1.0, 200.0));
        for (Index j = i + 1; j < n; ++j) {
            const bool zero = testing::uniform(rng, 0.0, 1.0) < zero_rate;
            flows.counts(i, j) = zero ? 0.0 : std::floor(testing::uniform(rng, 1.0, 100.0));
            flows.counts(j, i) = zero ? 0.0 : std::floor(testing::uniform(rng, 1.0, 100.0));
        }
    }
    flows.labels = default_labels(n);
    return flows;
}

} // namespace

TEST_CASE("load_flow_matrix parses a small table") {
    const FlowMatrix flows = parse(",a,b\na,10,2\nb,4,10\n");
    CHECK(flows.labels == Labels{"a", "b"});
    CHECK(flows.counts(0, 0) == 10);
    CHECK(flows.counts(0, 1) == 2);
    CHECK(flows.counts(1, 0) == 4);
    CHECK(flows.counts(1, 1) == 10);
}

TEST_CASE("load_flow_matrix reorders rows to column order") {
    const FlowMatrix flows = parse(",a,b\nb,4,10\na,10,2\n");
    CHECK(flows.counts(0, 1) == 2);
    CHECK(flows.counts(1, 0) == 4);
}

TEST_CASE("load_flow_matrix skips comments and blank lines") {
    const FlowMatrix flows = parse("# flows\n\n,a,b\na,1,0\n\nb,0,1\n");
    CHECK(flows.counts.isIdentity());
}

TEST_CASE("load_flow_matrix rejects malformed tables") {
    CHECK(error_of(",a,b\na,1,2\nc,3,4\n").find("label") != std::string::npos);
    CHECK(error_of(",a,b\na,1,2\nb,3\n").find("line 3") != std::string::npos);
    CHECK(error_of(",a,b\na,1,2\n").find("square") != std::string::npos);
    CHECK(error_of(",a,b\na,1,-2\nb,3,4\n").find("line 2, column 3") != std::string::npos);
    CHECK(error_of(",a,b\na,1,x\nb,3,4\n").find("line 2, column 3") != std::string::npos);
    CHECK(error_of(",a,b\na,1,1e\nb,3,4\n").find("line 2") != std::string::npos);
    CHECK(error_of(",a,b\na,1,2\na,3,4\n").find("a") != std::string::npos);
    CHECK(error_of(",a,b,c\na,0,0,0\nb,0,0,0\nc,0,0,0\n").find("no positive entry") != std::string::npos);
    CHECK(error_of(",a,a\na,1,2\na,3,4\n").find("duplicate") != std::string::npos);
}

TEST_CASE("symmetrize on a 2x2 table") {
    const FlowMatrix flows = two_by_two();
    const Matrix half = symmetrize(flows, SymmetrizationMethod::half_sum);
    CHECK(half(0, 1) == 3);
    CHECK(half(1, 0) == 3);
    CHECK(half(0, 0) == 10);
    const Matrix geometric = symmetrize(flows, SymmetrizationMethod::geometric_mean);
    CHECK(geometric(0, 1) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
    CHECK(geometric(0, 0) == 10);
    // The 2x2 quasi-symmetry model is saturated: the fit reproduces the data.
    const QuasiSymmetricFit fit = fit_quasi_symmetric(flows.counts);
    CHECK((fit.fitted - flows.counts).cwiseAbs().maxCoeff() < 1e-8);
    const Matrix quasi = symmetrize(flows, SymmetrizationMethod::quasi_symmetric);
    CHECK((quasi - geometric).cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("zero cells map to zero under geometric reductions") {
    FlowMatrix flows;
    flows.counts.resize(3, 3);
    flows.counts << 5, 3, 0, 0, 5, 2, 1, 4, 5;
    flows.labels = default_labels(3);
    for (auto method : {SymmetrizationMethod::geometric_mean, SymmetrizationMethod::quasi_symmetric}) {
        const Matrix s = symmetrize(flows, method);
        CHECK(s(0, 1) == 0.0);
        CHECK(s(1, 0) == 0.0);
        CHECK(s(0, 2) == 0.0);
        CHECK(s(1, 2) > 0.0);
    }
}

TEST_CASE("symmetrization methods parse by name") {
    CHECK(parse_symmetrization("half_sum") == SymmetrizationMethod::half_sum);
    CHECK(parse_symmetrization("geometric_mean") == SymmetrizationMethod::geometric_mean);
    CHECK(parse_symmetrization("quasi_symmetric") == SymmetrizationMethod::quasi_symmetric);
    CHECK_THROWS_AS(parse_symmetrization("mean"), InputError);
    CHECK(to_string(SymmetrizationMethod::quasi_symmetric) == "quasi_symmetric");
}

TEST_CASE("property: symmetrize output is exactly symmetric and nonnegative") {
    Rng rng(11);
    for (int trial = 0; trial < 30; ++trial) {
        const FlowMatrix flows = random_flows(rng, testing::uniform_index(rng, 2, 9), 0.2);
        for (auto method : {SymmetrizationMethod::half_sum, SymmetrizationMethod::geometric_mean,
                            SymmetrizationMethod::quasi_symmetric}) {
            const Matrix s = symmetrize(flows, method);
            CHECK(s == s.transpose());
            CHECK(s.minCoeff() >= 0.0);
        }
    }
}

TEST_CASE("property: quasi-symmetric fit preserves margins and pair totals") {
    Rng rng(12);
    for (int trial = 0; trial < 30; ++trial) {
        const FlowMatrix flows = random_flows(rng, testing::uniform_index(rng, 3, 10), 0.1);
        const Matrix &n = flows.counts;
        const QuasiSymmetricFit fit = fit_quasi_symmetric(n);
        const Matrix &m = fit.fitted;
        CHECK(fit.residual < 1e-10);
        for (Index i = 0; i < n.rows(); ++i) {
            CHECK(std::abs(m.row(i).sum() - n.row(i).sum()) <= 1e-8 * n.row(i).sum());
            CHECK(std::abs(m.col(i).sum() - n.col(i).sum()) <= 1e-8 * n.col(i).sum());
            for (Index j = 0; j < n.rows(); ++j) {
                const double pair = n(i, j) + n(j, i);
                CHECK(std::abs(m(i, j) + m(j, i) - pair) <= 1e-8 * std::max(pair, 1.0));
            }
        }
        // Under the model, m_ij m_ji factorizes as (a_i b_i)(a_j b_j) c_ij^2, so the
        // odds ratios m_ij m_jk m_ki / (m_ji m_kj m_ik) equal one on positive cycles.
        for (Index i = 0; i < n.rows(); ++i) {
            for (Index j = 0; j < n.rows(); ++j) {
                for (Index k = 0; k < n.rows(); ++k) {
                    const double forward = m(i, j) * m(j, k) * m(k, i);
                    const double backward = m(j, i) * m(k, j) * m(i, k);
                    if (forward > 0.0 && backward > 0.0) {
                        CHECK(std::abs(std::log(forward / backward)) < 1e-7);
                    }
                }
            }
        }
    }
}

TEST_CASE("one-sided zero cells keep the quasi-symmetric fit on the boundary") {
    FlowMatrix flows;
    flows.counts.resize(3, 3);
    flows.counts << 5, 3, 0, 0, 5, 2, 1, 4, 5;
    flows.labels = default_labels(3);
    // Either the fit converges or it reports the residual; it never returns
    // a table that violates the margins.
    try {
        const QuasiSymmetricFit fit = fit_quasi_symmetric(flows.counts);
        CHECK(fit.residual < 1e-10);
    } catch (const NumericalError &error) {
        CHECK(std::string(error.what()).find("residual") != std::string::npos);
    }
}

TEST_CASE("quasi-symmetric fit reports non-convergence") {
    Rng rng(13);
    const FlowMatrix flows = random_flows(rng, 6, 0.0);
    QuasiSymmetryOptions options;
    options.max_sweeps = 1;
    options.tolerance = 1e-300;
    CHECK_THROWS_AS(symmetrize(flows, SymmetrizationMethod::quasi_symmetric, options), NumericalError);
}

TEST_CASE("to_exchange normalizes") {
    Matrix s(2, 2);
    s << 10, 3, 3, 10;
    const ExchangeMatrix e = to_exchange(s, {"a", "b"});
    CHECK(e(0, 0) == doctest::Approx(10.0 / 26.0).epsilon(1e-15));
    CHECK(e(0, 1) == doctest::Approx(3.0 / 26.0).epsilon(1e-15));
    CHECK(e.f()(0) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(e.labels() == Labels{"a", "b"});

    Matrix unit(2, 2);
    unit << 0.3, 0.2, 0.2, 0.3;
    CHECK((to_exchange(unit).e() - unit).cwiseAbs().maxCoeff() < 1e-15);

    const ExchangeMatrix frozen = to_exchange(Matrix::Identity(2, 2));
    CHECK(frozen(0, 0) == 0.5);
    CHECK(frozen(0, 1) == 0.0);
    CHECK(frozen.f()(1) == 0.5);
}

TEST_CASE("to_exchange names an isolated vertex") {
    Matrix s = Matrix::Zero(3, 3);
    s(0, 1) = s(1, 0) = 1.0;
    try {
        to_exchange(s, {"x", "y", "z"});
        FAIL("expected an error");
    } catch (const InputError &error) {
        CHECK(std::string(error.what()).find("z") != std::string::npos);
    }
}

TEST_CASE("exchange matrix invariants are enforced") {
    Matrix asym(2, 2);
    asym << 0.3, 0.25, 0.15, 0.3;
    CHECK_THROWS_AS(ExchangeMatrix{asym}, InputError);
    Matrix heavy(2, 2);
    heavy << 0.3, 0.2, 0.2, 0.4;
    CHECK_THROWS_AS(ExchangeMatrix{heavy}, InputError);
    Matrix negative(2, 2);
    negative << 0.6, -0.1, -0.1, 0.6;
    CHECK_THROWS_AS(ExchangeMatrix{negative}, InputError);
}

TEST_CASE("strip_diagonal") {
    Matrix e(2, 2);
    e << 0.2, 0.3, 0.3, 0.2;
    const ExchangeMatrix stripped = strip_diagonal(ExchangeMatrix(e));
    CHECK(stripped(0, 0) == 0.0);
    CHECK(stripped(0, 1) == doctest::Approx(0.5).epsilon(1e-15));
    CHECK(stripped.f()(0) == doctest::Approx(0.5).epsilon(1e-15));

    const ExchangeMatrix path = testing::path3();
    CHECK(strip_diagonal(path).e() == path.e());

    Matrix diagonal(2, 2);
    diagonal << 0.5, 0, 0, 0.5;
    CHECK_THROWS_AS(strip_diagonal(ExchangeMatrix(diagonal)), InputError);

    Matrix lonely(3, 3);
    lonely << 0.2, 0.0, 0.0, 0.0, 0.2, 0.3, 0.0, 0.3, 0.0;
    CHECK_THROWS_AS(strip_diagonal(ExchangeMatrix(lonely)), InputError);
}

TEST_CASE("property: stripped weights follow the closed form") {
    Rng rng(14);
    for (int trial = 0; trial < 30; ++trial) {
        const ExchangeMatrix e = testing::random_connected(rng, testing::uniform_index(rng, 2, 12));
        const ExchangeMatrix stripped = strip_diagonal(e);
        const double loops = e.e().diagonal().sum();
        for (Index i = 0; i < e.size(); ++i) {
            CHECK(std::abs(stripped.f()(i) - (e.f()(i) - e(i, i)) / (1.0 - loops)) < 1e-12);
        }
        CHECK(stripped.has_zero_diagonal());
    }
}

TEST_CASE("property: strip_diagonal is idempotent") {
    Rng rng(15);
    for (int trial = 0; trial < 30; ++trial) {
        const ExchangeMatrix once = strip_diagonal(testing::random_connected(rng, testing::uniform_index(rng, 2, 12)));
        const ExchangeMatrix twice = strip_diagonal(once);
        CHECK((once.e() - twice.e()).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("property: ingestion is scale invariant") {
    Rng rng(16);
    for (int trial = 0; trial < 30; ++trial) {
        FlowMatrix flows = random_flows(rng, testing::uniform_index(rng, 2, 9), 0.1);
        const double scale = std::pow(10.0, testing::uniform(rng, -3.0, 3.0));
        FlowMatrix scaled = flows;
        scaled.counts *= scale;
        for (auto method : {SymmetrizationMethod::half_sum, SymmetrizationMethod::geometric_mean,
                            SymmetrizationMethod::quasi_symmetric}) {
            const ExchangeMatrix a = to_exchange(symmetrize(flows, method));
            const ExchangeMatrix b = to_exchange(symmetrize(scaled, method));
            CHECK((a.e() - b.e()).cwiseAbs().maxCoeff() <= 1e-12);
        }
    }
}
