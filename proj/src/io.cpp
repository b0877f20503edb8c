#include "flowdist/io.hpp"

#include "flowdist/csv.hpp"
#include "flowdist/error.hpp"

#include <json.hpp>

#include <fstream>
#include <istream>
#include <sstream>
#include <unordered_map>

namespace flowdist::io {

namespace {

using csv::format_number;

std::string labelled_header(std::string first, const Labels &labels) {
    std::vector<std::string> cells{std::move(first)};
    cells.insert(cells.end(), labels.begin(), labels.end());
    return csv::join(cells);
}

double number_at(const csv::Row &row, std::size_t column, bool allow_infinity = false) {
    if (column >= row.cells.size()) {
        throw InputError("line " + std::to_string(row.line) + ": missing column " +
                         std::to_string(column + 1));
    }
    const auto value = csv::parse_number(row.cells[column], allow_infinity);
    if (!value) {
        throw InputError("line " + std::to_string(row.line) + ", column " +
                         std::to_string(column + 1) + ": unparsable numeric field '" +
                         row.cells[column] + "'");
    }
    return *value;
}

std::unordered_map<std::string, std::string> parse_metadata(const std::vector<std::string> &comments) {
    std::unordered_map<std::string, std::string> out;
    for (const auto &line : comments) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            continue;
        }
        auto key = line.substr(0, eq);
        key.erase(0, key.find_first_not_of(' '));
        out[key] = line.substr(eq + 1);
    }
    return out;
}

} // namespace

void write_file_atomic(const std::filesystem::path &path, const std::string &content) {
    auto temporary = path;
    temporary += ".tmp";
    {
        std::ofstream out(temporary, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw InputError("cannot write '" + temporary.string() + "'");
        }
        out << content;
        if (!out.flush()) {
            throw InputError("write to '" + temporary.string() + "' failed");
        }
    }
    std::filesystem::rename(temporary, path);
}

std::string exchange_to_csv(const ExchangeMatrix &exchange) {
    std::ostringstream out;
    out << labelled_header("", exchange.labels()) << '\n';
    for (Index i = 0; i < exchange.size(); ++i) {
        out << exchange.labels()[static_cast<std::size_t>(i)];
        for (Index j = 0; j < exchange.size(); ++j) {
            out << ',' << format_number(exchange(i, j));
        }
        out << '\n';
    }
    return out.str();
}

std::string distances_to_csv(const DistanceMatrix &distances) {
    std::ostringstream out;
    out << "# family=" << distances.family << '\n';
    out << "# focused=" << (distances.focused ? 1 : 0) << '\n';
    out << "# irreducible=" << (distances.irreducible ? 1 : 0) << '\n';
    out << "# euclidean="
        << (distances.euclidean_verified ? (*distances.euclidean_verified ? "1" : "0") : "unknown")
        << '\n';
    out << labelled_header("label,weight", distances.labels) << '\n';
    for (Index i = 0; i < distances.size(); ++i) {
        out << distances.labels[static_cast<std::size_t>(i)] << ',' << format_number(distances.p(i));
        for (Index j = 0; j < distances.size(); ++j) {
            out << ',' << format_number(distances.D(i, j));
        }
        out << '\n';
    }
    return out.str();
}

DistanceMatrix distances_from_csv(std::istream &in) {
    std::vector<std::string> comments;
    const auto table = csv::read_table(in, &comments);
    if (table.empty() || table.front().cells.size() < 3) {
        throw InputError("distance file: missing header");
    }
    const auto &header = table.front().cells;
    DistanceMatrix out;
    out.labels.assign(header.begin() + 2, header.end());
    const auto n = static_cast<Index>(out.labels.size());
    if (static_cast<Index>(table.size()) != n + 1) {
        throw InputError("distance file: expected " + std::to_string(n) + " rows");
    }
    out.D.resize(n, n);
    out.p.resize(n);
    for (Index i = 0; i < n; ++i) {
        const auto &row = table[static_cast<std::size_t>(i + 1)];
        if (static_cast<Index>(row.cells.size()) != n + 2) {
            throw InputError("distance file: line " + std::to_string(row.line) + ": wrong field count");
        }
        if (row.cells.front() != out.labels[static_cast<std::size_t>(i)]) {
            throw InputError("distance file: line " + std::to_string(row.line) +
                             ": row label does not match column order");
        }
        out.p(i) = number_at(row, 1);
        for (Index j = 0; j < n; ++j) {
            out.D(i, j) = number_at(row, static_cast<std::size_t>(j + 2), true);
        }
    }
    const auto meta = parse_metadata(comments);
    if (const auto it = meta.find("family"); it != meta.end()) {
        out.family = it->second;
    }
    if (const auto it = meta.find("focused"); it != meta.end()) {
        out.focused = it->second == "1";
    }
    if (const auto it = meta.find("irreducible"); it != meta.end()) {
        out.irreducible = it->second == "1";
    }
    if (const auto it = meta.find("euclidean"); it != meta.end() && it->second != "unknown") {
        out.euclidean_verified = it->second == "1";
    }
    return out;
}

std::string embedding_to_csv(const Embedding &embedding, Index dimensions) {
    dimensions = std::min(dimensions, embedding.dimensions());
    std::ostringstream out;
    out << "# total_inertia=" << format_number(embedding.total_inertia) << '\n';
    out << "# dropped_negative_mass=" << format_number(embedding.dropped_negative_mass) << '\n';
    out << "label,weight";
    for (Index b = 0; b < dimensions; ++b) {
        out << ",mu=" << format_number(embedding.mu(b));
    }
    out << '\n';
    for (Index i = 0; i < embedding.coords.rows(); ++i) {
        out << embedding.labels[static_cast<std::size_t>(i)] << ',' << format_number(embedding.p(i));
        for (Index b = 0; b < dimensions; ++b) {
            out << ',' << format_number(embedding.coords(i, b));
        }
        out << '\n';
    }
    return out.str();
}

Embedding embedding_from_csv(std::istream &in) {
    std::vector<std::string> comments;
    const auto table = csv::read_table(in, &comments);
    if (table.empty() || table.front().cells.size() < 2) {
        throw InputError("embedding file: missing header");
    }
    const auto &header = table.front();
    const auto k = static_cast<Index>(header.cells.size()) - 2;
    Embedding out;
    out.mu.resize(k);
    for (Index b = 0; b < k; ++b) {
        const auto &cell = header.cells[static_cast<std::size_t>(b + 2)];
        const auto value = cell.starts_with("mu=") ? csv::parse_number(cell.substr(3)) : std::nullopt;
        if (!value) {
            throw InputError("embedding file: header cell '" + cell + "' is not mu=<value>");
        }
        out.mu(b) = *value;
    }
    const auto n = static_cast<Index>(table.size()) - 1;
    out.coords.resize(n, k);
    out.p.resize(n);
    for (Index i = 0; i < n; ++i) {
        const auto &row = table[static_cast<std::size_t>(i + 1)];
        if (static_cast<Index>(row.cells.size()) != k + 2) {
            throw InputError("embedding file: line " + std::to_string(row.line) + ": wrong field count");
        }
        out.labels.push_back(row.cells.front());
        out.p(i) = number_at(row, 1);
        for (Index b = 0; b < k; ++b) {
            out.coords(i, b) = number_at(row, static_cast<std::size_t>(b + 2));
        }
    }
    out.spectrum = out.mu;
    const auto meta = parse_metadata(comments);
    if (const auto it = meta.find("total_inertia"); it != meta.end()) {
        out.total_inertia = csv::parse_number(it->second).value_or(0.0);
    }
    if (const auto it = meta.find("dropped_negative_mass"); it != meta.end()) {
        out.dropped_negative_mass = csv::parse_number(it->second).value_or(0.0);
    }
    return out;
}

std::string raw_coordinates_to_csv(const SpectralBasis &basis, Index dimensions) {
    dimensions = std::min(dimensions, basis.size() - 1);
    std::ostringstream out;
    out << "# lambda=";
    for (Index a = 1; a <= dimensions; ++a) {
        out << (a > 1 ? " " : "") << format_number(basis.lambda(a));
    }
    out << '\n' << "label,f";
    for (Index a = 1; a <= dimensions; ++a) {
        out << ",x" << a;
    }
    out << '\n';
    for (Index i = 0; i < basis.size(); ++i) {
        out << basis.labels[static_cast<std::size_t>(i)] << ',' << format_number(basis.f(i));
        for (Index a = 1; a <= dimensions; ++a) {
            out << ',' << format_number(basis.X(i, a));
        }
        out << '\n';
    }
    return out.str();
}

std::string trace_to_csv(const std::vector<TraceRecord> &trace) {
    std::ostringstream out;
    out << "T,T_rel,M,Delta_W,I,F,H_Z_given_O,VI\n";
    for (const auto &r : trace) {
        out << format_number(r.temperature) << ',' << format_number(r.relative_temperature) << ','
            << r.groups << ',' << format_number(r.within) << ',' << format_number(r.mutual) << ','
            << format_number(r.free_energy) << ',' << format_number(r.softness) << ','
            << (r.variation_of_information ? format_number(*r.variation_of_information) : "") << '\n';
    }
    return out.str();
}

std::vector<TraceRecord> trace_from_csv(std::istream &in) {
    const auto table = csv::read_table(in);
    if (table.empty() || table.front().cells.size() != 8 || table.front().cells[0] != "T") {
        throw InputError("trace file: unexpected header");
    }
    std::vector<TraceRecord> trace;
    for (std::size_t r = 1; r < table.size(); ++r) {
        const auto &row = table[r];
        if (row.cells.size() != 8) {
            throw InputError("trace file: line " + std::to_string(row.line) + ": wrong field count");
        }
        TraceRecord record;
        record.temperature = number_at(row, 0);
        record.relative_temperature = number_at(row, 1);
        record.groups = static_cast<Index>(number_at(row, 2));
        record.within = number_at(row, 3);
        record.mutual = number_at(row, 4);
        record.free_energy = number_at(row, 5);
        record.softness = number_at(row, 6);
        if (!row.cells[7].empty()) {
            record.variation_of_information = number_at(row, 7);
        }
        trace.push_back(record);
    }
    return trace;
}

std::string snapshots_to_json(const Labels &labels, const Vector &f, const std::vector<Snapshot> &snapshots) {
    using nlohmann::json;
    json root;
    root["labels"] = labels;
    root["snapshots"] = json::array();
    // Numbers go through the same 12-digit formatting as the CSV files.
    const auto number = [](double x) { return json::parse(format_number(x)); };
    for (const auto &snap : snapshots) {
        const Matrix &z = snap.membership.z();
        const Vector rho = z.transpose() * f;
        json entry;
        entry["T"] = number(snap.temperature);
        entry["T_rel"] = number(snap.relative_temperature);
        entry["M"] = z.cols();
        entry["rho"] = json::array();
        for (Index g = 0; g < rho.size(); ++g) {
            entry["rho"].push_back(number(rho(g)));
        }
        entry["membership"] = json::array();
        for (Index i = 0; i < z.rows(); ++i) {
            json row = json::array();
            for (Index g = 0; g < z.cols(); ++g) {
                row.push_back(number(z(i, g)));
            }
            entry["membership"].push_back(std::move(row));
        }
        root["snapshots"].push_back(std::move(entry));
    }
    return root.dump(1) + "\n";
}

std::vector<Snapshot> snapshots_from_json(std::istream &in, Labels *labels) {
    using nlohmann::json;
    json root;
    try {
        root = json::parse(in);
    } catch (const json::exception &e) {
        throw InputError(std::string("snapshot file: ") + e.what());
    }
    if (labels != nullptr) {
        *labels = root.at("labels").get<Labels>();
    }
    std::vector<Snapshot> out;
    for (const auto &entry : root.at("snapshots")) {
        const auto &rows = entry.at("membership");
        const auto n = static_cast<Index>(rows.size());
        const auto m = entry.at("M").get<Index>();
        Matrix z(n, m);
        for (Index i = 0; i < n; ++i) {
            for (Index g = 0; g < m; ++g) {
                z(i, g) = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(g)).get<double>();
            }
        }
        // Rows were rounded to 12 digits; restore exact stochasticity.
        for (Index i = 0; i < n; ++i) {
            z.row(i) /= z.row(i).sum();
        }
        out.push_back({entry.at("T").get<double>(), entry.at("T_rel").get<double>(), Membership(std::move(z))});
    }
    return out;
}

Membership partition_from_csv(std::istream &in, const Labels &labels) {
    std::unordered_map<std::string, Index> vertex;
    for (std::size_t i = 0; i < labels.size(); ++i) {
        vertex.emplace(labels[i], static_cast<Index>(i));
    }
    std::vector<Index> assignment(labels.size(), -1);
    std::unordered_map<std::string, Index> group_ids;
    const auto table = csv::read_table(in);
    for (std::size_t r = 0; r < table.size(); ++r) {
        const auto &row = table[r];
        if (row.cells.size() != 2) {
            throw InputError("partition file: line " + std::to_string(row.line) + ": expected label,group");
        }
        const auto it = vertex.find(row.cells[0]);
        if (it == vertex.end()) {
            // Tolerate a header line naming the columns.
            if (r == 0) {
                continue;
            }
            throw InputError("partition file: line " + std::to_string(row.line) + ": unknown label '" +
                             row.cells[0] + "'");
        }
        auto &slot = assignment[static_cast<std::size_t>(it->second)];
        if (slot >= 0) {
            throw InputError("partition file: line " + std::to_string(row.line) + ": duplicate label '" +
                             row.cells[0] + "'");
        }
        const auto [g, inserted] = group_ids.emplace(row.cells[1], static_cast<Index>(group_ids.size()));
        slot = g->second;
    }
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (assignment[i] < 0) {
            throw InputError("partition file: vertex '" + labels[i] + "' has no group");
        }
    }
    return Membership::from_assignment(assignment);
}

} // namespace flowdist::io
