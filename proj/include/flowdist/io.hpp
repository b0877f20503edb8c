#pragma once

#include "flowdist/euclid_mds.hpp"
#include "flowdist/exchange.hpp"
#include "flowdist/graph_distances.hpp"
#include "flowdist/spectral.hpp"
#include "flowdist/thermo_cluster.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

// Plain-text formats. Every number is written with 12 significant digits;
// disconnected pairs are written as "inf".
namespace flowdist::io {

/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomic(const std::filesystem::path &path, const std::string &content);

/// Same layout as the flow-matrix input, so it can be loaded back with
/// load_flow_matrix.
std::string exchange_to_csv(const ExchangeMatrix &exchange);

/// "# key=value" metadata lines (family, focused, irreducible, euclidean),
/// then a header "label,weight,<labels...>" and one row per vertex.
std::string distances_to_csv(const DistanceMatrix &distances);
DistanceMatrix distances_from_csv(std::istream &in);

/// Header "label,weight,mu=<mu_1>,...", first `dimensions` coordinates.
std::string embedding_to_csv(const Embedding &embedding, Index dimensions);
Embedding embedding_from_csv(std::istream &in);

/// Raw spectral coordinates: "label,f,x1,...,xk" with eigenvalues in a
/// metadata line.
std::string raw_coordinates_to_csv(const SpectralBasis &basis, Index dimensions);

/// Columns T,T_rel,M,Delta_W,I,F,H_Z_given_O,VI (VI empty without reference).
std::string trace_to_csv(const std::vector<TraceRecord> &trace);
std::vector<TraceRecord> trace_from_csv(std::istream &in);

struct Snapshot {
    double temperature = 0.0;
    double relative_temperature = 0.0;
    Membership membership;
};

/// {"labels": [...], "snapshots": [{"T", "T_rel", "M", "rho": [...],
///  "membership": [[z_i1, ...], ...]}]}, membership rows in label order
std::string snapshots_to_json(const Labels &labels, const Vector &f, const std::vector<Snapshot> &snapshots);
std::vector<Snapshot> snapshots_from_json(std::istream &in, Labels *labels = nullptr);

/// Hard reference partition: lines "label,group". Every label must appear
/// exactly once; group names are arbitrary strings.
Membership partition_from_csv(std::istream &in, const Labels &labels);

} // namespace flowdist::io
