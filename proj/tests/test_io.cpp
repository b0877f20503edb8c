#include "doctest.h"

#include "flowdist/error.hpp"
#include "flowdist/flow_ingest.hpp"
#include "flowdist/io.hpp"
#include "support/graphs.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace flowdist;
using flowdist::testing::Rng;

namespace {

double max_relative(const Matrix &a, const Matrix &b) {
    double worst = 0.0;
    for (Index i = 0; i < a.rows(); ++i) {
        for (Index j = 0; j < a.cols(); ++j) {
            if (std::isinf(a(i, j)) || std::isinf(b(i, j))) {
                worst = std::max(worst, a(i, j) == b(i, j) ? 0.0 : 1.0);
            } else {
                worst = std::max(worst, std::abs(a(i, j) - b(i, j)) / std::max(1e-300, std::abs(b(i, j))));
            }
        }
    }
    return worst;
}

} // namespace

TEST_CASE("exchange matrices round-trip through the flow format") {
    Rng rng(91);
    const ExchangeMatrix e = testing::random_connected(rng, 6);
    std::istringstream in(io::exchange_to_csv(e));
    const ExchangeMatrix back = to_exchange(symmetrize(load_flow_matrix(in), SymmetrizationMethod::half_sum));
    CHECK(max_relative(back.e(), e.e()) <= 1e-11);
    CHECK(back.labels() == e.labels());
}

TEST_CASE("distance matrices round-trip with flags and infinities") {
    Rng rng(92);
    const ExchangeMatrix e = testing::random_two_component(rng, 2, 3);
    DistanceMatrix d = shortest_path_distance(e);
    d.euclidean_verified = false;
    const std::string text = io::distances_to_csv(d);
    CHECK(text.find("inf") != std::string::npos);
    std::istringstream in(text);
    const DistanceMatrix back = io::distances_from_csv(in);
    CHECK(max_relative(back.D, d.D) <= 1e-11);
    CHECK(max_relative(back.p, d.p) <= 1e-11);
    CHECK(back.family == "shortest_path");
    CHECK(back.irreducible);
    CHECK_FALSE(back.focused);
    REQUIRE(back.euclidean_verified.has_value());
    CHECK_FALSE(*back.euclidean_verified);
    CHECK(back.labels == d.labels);

    d.euclidean_verified.reset();
    std::istringstream unknown(io::distances_to_csv(d));
    CHECK_FALSE(io::distances_from_csv(unknown).euclidean_verified.has_value());
}

TEST_CASE("embeddings round-trip") {
    Rng rng(93);
    const ExchangeMatrix e = testing::random_connected(rng, 7);
    const Embedding embedding = mds(natural_distance(decompose(e), GSpec::commute()));
    std::istringstream in(io::embedding_to_csv(embedding, 3));
    const Embedding back = io::embedding_from_csv(in);
    CHECK(back.coords.cols() == 3);
    CHECK(max_relative(back.coords, embedding.coords.leftCols(3)) <= 1e-11);
    CHECK(max_relative(back.mu, embedding.mu.head(3)) <= 1e-11);
    CHECK(std::abs(back.total_inertia - embedding.total_inertia) <= 1e-11 * embedding.total_inertia);
    CHECK(back.labels == embedding.labels);
}

TEST_CASE("raw coordinates carry eigenvalues and weights") {
    const SpectralBasis basis = decompose(testing::two_vertex());
    const std::string text = io::raw_coordinates_to_csv(basis, 1);
    CHECK(text.find("label,f,x1\n") != std::string::npos);
    CHECK(text.find("1,0.5,1\n") != std::string::npos);
    CHECK(text.find("2,0.5,-1\n") != std::string::npos);
    CHECK(text.find("0.2") != std::string::npos);
}

TEST_CASE("traces round-trip") {
    std::vector<TraceRecord> trace(2);
    trace[0].temperature = 0.1;
    trace[0].relative_temperature = 0.02;
    trace[0].groups = 3;
    trace[0].within = 1.0 / 3.0;
    trace[0].mutual = 0.5;
    trace[0].free_energy = 0.7;
    trace[0].softness = 1e-17;
    trace[1] = trace[0];
    trace[1].temperature = 0.2;
    trace[1].variation_of_information = 0.25;
    const std::string text = io::trace_to_csv(trace);
    CHECK(text.rfind("T,T_rel,M,Delta_W,I,F,H_Z_given_O,VI\n", 0) == 0);
    std::istringstream in(text);
    const std::vector<TraceRecord> back = io::trace_from_csv(in);
    REQUIRE(back.size() == 2);
    CHECK(back[0].groups == 3);
    CHECK(back[0].within == doctest::Approx(1.0 / 3.0).epsilon(1e-11));
    CHECK_FALSE(back[0].variation_of_information.has_value());
    CHECK(*back[1].variation_of_information == 0.25);
}

TEST_CASE("membership snapshots round-trip") {
    Matrix z(3, 2);
    z << 0.25, 0.75, 1.0, 0.0, 1.0 / 3.0, 2.0 / 3.0;
    const Labels labels{"a", "b", "c"};
    const Vector f = Vector::Constant(3, 1.0 / 3.0);
    const std::vector<io::Snapshot> snapshots{{0.5, 0.1, Membership(z)}};
    std::istringstream in(io::snapshots_to_json(labels, f, snapshots));
    Labels read_labels;
    const std::vector<io::Snapshot> back = io::snapshots_from_json(in, &read_labels);
    CHECK(read_labels == labels);
    REQUIRE(back.size() == 1);
    CHECK(back[0].temperature == 0.5);
    CHECK(back[0].relative_temperature == 0.1);
    CHECK((back[0].membership.z() - z).cwiseAbs().maxCoeff() <= 1e-11);
}

TEST_CASE("reference partitions") {
    std::istringstream in("label,group\nb,east\na,west\nc,east\n");
    const Membership reference = io::partition_from_csv(in, {"a", "b", "c"});
    CHECK(reference.groups() == 2);
    CHECK(reference.hard_assignment()[1] == reference.hard_assignment()[2]);
    CHECK(reference.hard_assignment()[0] != reference.hard_assignment()[1]);

    std::istringstream missing("a,x\nb,y\n");
    CHECK_THROWS_AS(io::partition_from_csv(missing, {"a", "b", "c"}), InputError);
    std::istringstream unknown("a,x\nb,y\nd,z\n");
    CHECK_THROWS_AS(io::partition_from_csv(unknown, {"a", "b", "c"}), InputError);
}

TEST_CASE("atomic writes replace the target") {
    const auto dir = std::filesystem::temp_directory_path() / "flowdist_io_test";
    std::filesystem::create_directories(dir);
    const auto path = dir / "out.txt";
    io::write_file_atomic(path, "first\n");
    io::write_file_atomic(path, "second\n");
    std::ifstream in(path);
    std::string line;
    std::getline(in, line);
    CHECK(line == "second");
    int files = 0;
    for ([[maybe_unused]] const auto &entry : std::filesystem::directory_iterator(dir)) {
        ++files;
    }
    CHECK(files == 1);
    std::filesystem::remove_all(dir);
}
