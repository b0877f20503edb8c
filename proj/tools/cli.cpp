#include "cli.hpp"

#include "flowdist/csv.hpp"
#include "flowdist/error.hpp"
#include "flowdist/euclid_mds.hpp"
#include "flowdist/flow_ingest.hpp"
#include "flowdist/graph_distances.hpp"
#include "flowdist/io.hpp"
#include "flowdist/spectral.hpp"
#include "flowdist/thermo_cluster.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>

namespace flowdist::cli {

namespace {

namespace fs = std::filesystem;

struct PipelineConfig {
    std::string input;
    std::string symmetrize = "half_sum";
    std::string diagonal = "keep";
    std::vector<std::string> families{"chi2"};
    std::optional<double> rho;
    std::string schoenberg;
    double disconnect_threshold = 1e-12;
    Index dims = 2;
    Index raw_dims = 0;
    double t_start = 0.02;
    double t_end = 2.0;
    double t_ratio = 1.05;
    double merge_tol = 1e-10;
    bool coalesce = false;
    bool stop_at_single = false;
    int max_iter = 10'000;
    double tol = 1e-9;
    bool strict = false;
    std::string reference;
    std::vector<double> snapshots;
    double equivalence_tol = 1e-9;
    std::string output = ".";
};

// Errors raised while honoring one flag are reported with that flag's name.
template <typename F>
auto with_flag(const std::string &flag, F &&body) {
    try {
        return body();
    } catch (const InputError &e) {
        throw InputError(flag + ": " + e.what());
    } catch (const NumericalError &e) {
        throw NumericalError(flag + ": " + e.what());
    }
}

ExchangeMatrix build_exchange(const PipelineConfig &config) {
    const FlowMatrix flows =
        with_flag("--input " + config.input, [&] { return load_flow_matrix_file(config.input); });
    const auto method = with_flag("--symmetrize", [&] { return parse_symmetrization(config.symmetrize); });
    ExchangeMatrix exchange = with_flag("--symmetrize " + config.symmetrize, [&] {
        return to_exchange(symmetrize(flows, method), flows.labels);
    });
    if (config.diagonal == "strip") {
        return with_flag("--diagonal strip", [&] { return strip_diagonal(exchange); });
    }
    if (config.diagonal != "keep") {
        throw InputError("--diagonal: expected keep or strip, got '" + config.diagonal + "'");
    }
    return exchange;
}

DistanceMatrix build_distance(const ExchangeMatrix &exchange, const std::string &family,
                              const PipelineConfig &config) {
    const std::string flag = "--family " + family;
    DistanceMatrix distances = with_flag(flag, [&] {
        if (family == "shortest_path") {
            return shortest_path_distance(exchange);
        }
        if (family == "jump") {
            if (!exchange.has_zero_diagonal()) {
                throw InputError("the jump distance requires --diagonal strip");
            }
            return jump_distance(exchange);
        }
        const GSpec spec = GSpec::parse(family, config.rho);
        NaturalDistanceOptions options;
        options.disconnect_threshold = config.disconnect_threshold;
        return natural_distance(decompose(exchange), spec, options);
    });
    if (config.schoenberg.empty()) {
        return distances;
    }
    return with_flag("--schoenberg " + config.schoenberg, [&] {
        std::string text = config.schoenberg;
        if (text == "exp:auto") {
            // b = 1 / (4 Delta) of the untransformed distance.
            if (!distances.D.allFinite()) {
                throw InputError("exp:auto needs finite distances");
            }
            const double inertia = centroid_and_inertia(distances.D, distances.p).inertia;
            if (!(inertia > 0.0)) {
                throw InputError("exp:auto needs a positive inertia");
            }
            text = "exp:" + csv::format_number(1.0 / (4.0 * inertia));
        }
        return schoenberg_transform(distances, PhiSpec::parse(text));
    });
}

std::string file_stem(const std::string &family) {
    std::string out;
    for (const char c : family) {
        out += (std::isalnum(static_cast<unsigned char>(c)) || c == '_') ? c : '_';
    }
    return out;
}

fs::path prepare_output(const PipelineConfig &config) {
    const fs::path dir(config.output);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw InputError("--output: cannot create directory '" + config.output + "'");
    }
    return dir;
}

int cmd_ingest(const PipelineConfig &config, std::ostream &out) {
    const ExchangeMatrix exchange = build_exchange(config);
    const fs::path dir = prepare_output(config);
    io::write_file_atomic(dir / "exchange.csv", io::exchange_to_csv(exchange));
    out << "vertices=" << exchange.size() << " trace=" << csv::format_number(exchange.e().trace())
        << " min_weight=" << csv::format_number(exchange.f().minCoeff()) << '\n';
    return kExitOk;
}

int cmd_distances(const PipelineConfig &config, std::ostream &out) {
    const ExchangeMatrix exchange = build_exchange(config);
    const fs::path dir = prepare_output(config);
    for (const auto &family : config.families) {
        DistanceMatrix distances = build_distance(exchange, family, config);
        std::string verdict = "unknown";
        std::string min_eigenvalue = "";
        std::string inertia = "inf";
        if (distances.D.allFinite()) {
            const auto check = is_squared_euclidean(distances, distances.p);
            distances.euclidean_verified = check.euclidean;
            verdict = check.euclidean ? "1" : "0";
            min_eigenvalue = csv::format_number(check.min_eigenvalue);
            inertia = csv::format_number(centroid_and_inertia(distances.D, distances.p).inertia);
        }
        io::write_file_atomic(dir / ("distances_" + file_stem(family) + ".csv"),
                              io::distances_to_csv(distances));
        out << "family=" << distances.family << " inertia=" << inertia
            << " focused=" << (distances.focused ? 1 : 0)
            << " irreducible=" << (distances.irreducible ? 1 : 0) << " euclidean=" << verdict
            << " min_kernel_eigenvalue=" << min_eigenvalue << '\n';
    }
    return kExitOk;
}

int cmd_embed(const PipelineConfig &config, std::ostream &out, std::ostream &err) {
    if (config.families.size() != 1) {
        throw InputError("--family: embed takes a single family");
    }
    if (config.dims < 1) {
        throw InputError("--dims: must be at least 1");
    }
    const ExchangeMatrix exchange = build_exchange(config);
    const DistanceMatrix distances = build_distance(exchange, config.families.front(), config);
    const Embedding embedding = with_flag("--family " + config.families.front(), [&] { return mds(distances); });
    const fs::path dir = prepare_output(config);

    if (embedding.dropped_negative_mass > 0.0) {
        const auto verdict = is_squared_euclidean(distances, distances.p);
        err << "note: negative kernel mass " << csv::format_number(embedding.dropped_negative_mass)
            << " dropped; verdict " << (verdict.euclidean ? "Euclidean (within tolerance)" : "non-Euclidean")
            << " (min kernel eigenvalue " << csv::format_number(verdict.min_eigenvalue) << ")\n";
    }
    if (config.dims > embedding.dimensions()) {
        err << "warning: requested " << config.dims << " dimensions, only " << embedding.dimensions()
            << " positive dimensions available; output truncated\n";
    }
    io::write_file_atomic(dir / "coordinates.csv", io::embedding_to_csv(embedding, config.dims));
    if (config.raw_dims > 0) {
        io::write_file_atomic(dir / "raw_coordinates.csv",
                              io::raw_coordinates_to_csv(decompose(exchange), config.raw_dims));
    }
    out << "family=" << distances.family << " dimensions=" << std::min(config.dims, embedding.dimensions())
        << " available=" << embedding.dimensions() << " inertia=" << csv::format_number(embedding.total_inertia)
        << " dropped_negative_mass=" << csv::format_number(embedding.dropped_negative_mass) << '\n';
    return kExitOk;
}

int cmd_anneal(const PipelineConfig &config, std::ostream &out, std::ostream &err) {
    if (config.families.size() != 1) {
        throw InputError("--family: anneal takes a single family");
    }
    const ExchangeMatrix exchange = build_exchange(config);
    const DistanceMatrix distances = build_distance(exchange, config.families.front(), config);
    const Schedule schedule = with_flag("--t-start/--t-end/--t-ratio", [&] {
        if (!(config.t_end >= 1.0)) {
            throw InputError("the schedule must reach T_rel >= 1");
        }
        return Schedule::geometric(config.t_start, config.t_end, config.t_ratio);
    });

    AnnealOptions options;
    options.iterate.max_iter = config.max_iter;
    options.iterate.tol = config.tol;
    options.merge_tol = config.merge_tol;
    options.force_coalescence = config.coalesce;
    options.stop_at_single_group = config.stop_at_single;
    if (!config.reference.empty()) {
        options.reference = with_flag("--reference " + config.reference, [&] {
            std::ifstream in(config.reference);
            if (!in) {
                throw InputError("cannot open file");
            }
            return io::partition_from_csv(in, exchange.labels());
        });
    }
    const AnnealResult result = with_flag("--family " + config.families.front(),
                                          [&] { return anneal(distances, schedule, options); });

    // Snapshots at every change of M and at the steps closest to the requested
    // relative temperatures.
    std::vector<bool> keep(result.trace.size(), false);
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
        keep[k] = k == 0 || result.trace[k].groups != result.trace[k - 1].groups;
    }
    for (const double wanted : config.snapshots) {
        std::size_t best = 0;
        for (std::size_t k = 1; k < result.trace.size(); ++k) {
            if (std::abs(std::log(result.trace[k].relative_temperature / wanted)) <
                std::abs(std::log(result.trace[best].relative_temperature / wanted))) {
                best = k;
            }
        }
        keep[best] = true;
    }
    std::vector<io::Snapshot> snapshots;
    for (std::size_t k = 0; k < result.trace.size(); ++k) {
        if (keep[k]) {
            snapshots.push_back({result.trace[k].temperature, result.trace[k].relative_temperature,
                                 result.memberships[k]});
        }
    }

    const fs::path dir = prepare_output(config);
    io::write_file_atomic(dir / "trace.csv", io::trace_to_csv(result.trace));
    io::write_file_atomic(dir / "memberships.json",
                          io::snapshots_to_json(exchange.labels(), distances.p, snapshots));

    int unconverged = 0;
    for (const auto &record : result.trace) {
        unconverged += record.converged ? 0 : 1;
    }
    out << "family=" << distances.family << " inertia=" << csv::format_number(result.total_inertia)
        << " steps=" << result.trace.size() << " final_groups=" << result.trace.back().groups
        << " unconverged_steps=" << unconverged << '\n';
    if (unconverged > 0) {
        err << "warning: " << unconverged << " temperature steps hit --max-iter before converging\n";
        if (config.strict) {
            err << "error: --strict: non-convergence\n";
            return kExitNumerical;
        }
    }
    return kExitOk;
}

int cmd_diagnose(const PipelineConfig &config, std::ostream &out) {
    const ExchangeMatrix exchange = build_exchange(config);
    const SpectralBasis basis = decompose(exchange);
    const Index n = basis.size();
    const auto components = connected_components(exchange);
    const Index component_count = *std::max_element(components.begin(), components.end()) + 1;

    const auto strong = find_equivalent_pairs(exchange, config.equivalence_tol);
    std::vector<VertexPair> weak;
    if (exchange.size() > 1 && exchange.e().trace() < 1.0 - ExchangeMatrix::kTolerance) {
        try {
            weak = weakly_equivalent_pairs(strip_diagonal(exchange), config.equivalence_tol);
        } catch (const InputError &) {
            // A vertex with self-flow only has no weak profile.
        }
    }

    const fs::path dir = prepare_output(config);
    std::ostringstream pairs;
    pairs << "kind,first,second\n";
    for (const auto &[i, j] : strong) {
        pairs << "equivalent," << exchange.labels()[static_cast<std::size_t>(i)] << ','
              << exchange.labels()[static_cast<std::size_t>(j)] << '\n';
    }
    for (const auto &[i, j] : weak) {
        pairs << "weakly_equivalent," << exchange.labels()[static_cast<std::size_t>(i)] << ','
              << exchange.labels()[static_cast<std::size_t>(j)] << '\n';
    }
    io::write_file_atomic(dir / "equivalent_pairs.csv", pairs.str());

    out << "vertices=" << n << " components=" << component_count
        << " lambda_1=" << (n > 1 ? csv::format_number(basis.lambda(1)) : "none")
        << " lambda_min=" << csv::format_number(basis.lambda(n - 1))
        << " regular=" << (is_regular(basis) ? 1 : 0)
        << " diffusive=" << (basis.lambda.minCoeff() >= -1e-12 ? 1 : 0) << '\n';
    out << "equivalent_pairs=" << strong.size() << " weakly_equivalent_pairs=" << weak.size() << '\n';
    return kExitOk;
}

void add_common(CLI::App &cmd, PipelineConfig &config) {
    cmd.add_option("--input", config.input, "Flow matrix CSV")->required();
    cmd.add_option("--symmetrize", config.symmetrize, "half_sum | geometric_mean | quasi_symmetric");
    cmd.add_option("--diagonal", config.diagonal, "keep | strip");
    cmd.add_option("--output", config.output, "Output directory");
}

void add_distance(CLI::App &cmd, PipelineConfig &config, bool several) {
    auto *family = cmd.add_option("--family", config.families,
                                  "chi2 | diffusive | frozen | commute | absorption | sif | "
                                  "shortest_path | jump");
    family->delimiter(',');
    if (several) {
        family->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);
    }
    cmd.add_option("--rho", config.rho, "Absorption parameter, 0 < rho < 1");
    cmd.add_option("--schoenberg", config.schoenberg, "power:<a> | exp:<b> | exp:auto");
    cmd.add_option("--disconnect-threshold", config.disconnect_threshold,
                   "Irreducible families refuse lambda_1 > 1 - threshold");
}

// key=value lines, '#' comments; each becomes --key=value ahead of the
// command-line flags so that flags win.
std::vector<std::string> read_config(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw InputError("--config: cannot open '" + path + "'");
    }
    std::vector<std::string> args;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#') {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw InputError("--config " + path + ": line " + std::to_string(number) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            s.erase(0, s.find_first_not_of(" \t\r"));
            s.erase(s.find_last_not_of(" \t\r") + 1);
            return s;
        };
        args.push_back("--" + trim(line.substr(first, eq - first)) + "=" + trim(line.substr(eq + 1)));
    }
    return args;
}

} // namespace

int run(const std::vector<std::string> &raw_args, std::ostream &out, std::ostream &err) {
    try {
        // Expand --config before parsing; the subcommand stays first.
        std::vector<std::string> args;
        std::vector<std::string> from_config;
        for (std::size_t k = 0; k < raw_args.size(); ++k) {
            if (raw_args[k] == "--config" && k + 1 < raw_args.size()) {
                from_config = read_config(raw_args[++k]);
            } else if (raw_args[k].starts_with("--config=")) {
                from_config = read_config(raw_args[k].substr(9));
            } else {
                args.push_back(raw_args[k]);
            }
        }
        if (!from_config.empty() && !args.empty()) {
            args.insert(args.begin() + 1, from_config.begin(), from_config.end());
        }

        CLI::App app{"Distances, embeddings and thermodynamic clustering on weighted graphs", "flowdist"};
        app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
        app.require_subcommand(1);
        PipelineConfig config;

        auto *ingest = app.add_subcommand("ingest", "Symmetrize and normalize a flow matrix");
        add_common(*ingest, config);

        auto *distances = app.add_subcommand("distances", "Compute distance matrices");
        add_common(*distances, config);
        add_distance(*distances, config, true);

        auto *embed = app.add_subcommand("embed", "Weighted classical MDS coordinates");
        add_common(*embed, config);
        add_distance(*embed, config, false);
        embed->add_option("--dims", config.dims, "Number of coordinates to write");
        embed->add_option("--raw-coordinates", config.raw_dims,
                          "Also write this many raw spectral coordinates");

        auto *annealing = app.add_subcommand("anneal", "Temperature-annealed soft clustering");
        add_common(*annealing, config);
        add_distance(*annealing, config, false);
        annealing->add_option("--t-start", config.t_start, "Lowest relative temperature");
        annealing->add_option("--t-end", config.t_end, "Highest relative temperature");
        annealing->add_option("--t-ratio", config.t_ratio, "Geometric ratio between steps");
        annealing->add_option("--merge-tol", config.merge_tol, "Groups merge at relative overlap >= 1 - tol");
        annealing->add_flag("--coalesce", config.coalesce, "Force coalescence of near-single-group states");
        annealing->add_flag("--stop-at-single", config.stop_at_single, "Stop once a single group remains");
        annealing->add_option("--max-iter", config.max_iter, "Iteration cap per temperature");
        annealing->add_option("--tol", config.tol, "Convergence threshold on membership changes");
        annealing->add_flag("--strict", config.strict, "Exit with status 3 on non-convergence");
        annealing->add_option("--reference", config.reference, "Reference partition CSV (label,group)");
        annealing->add_option("--snapshot", config.snapshots, "Extra snapshot relative temperatures")
            ->delimiter(',')
            ->multi_option_policy(CLI::MultiOptionPolicy::TakeAll);

        auto *diagnose = app.add_subcommand("diagnose", "Spectrum summary and equivalent vertices");
        add_common(*diagnose, config);
        diagnose->add_option("--tol", config.equivalence_tol, "Tolerance on transition profiles");

        std::vector<std::string> reversed(args.rbegin(), args.rend());
        try {
            app.parse(reversed);
        } catch (const CLI::CallForHelp &) {
            out << app.help();
            return kExitOk;
        } catch (const CLI::ParseError &e) {
            err << "error: " << e.what() << '\n';
            return kExitInput;
        }

        if (ingest->parsed()) {
            return cmd_ingest(config, out);
        }
        if (distances->parsed()) {
            return cmd_distances(config, out);
        }
        if (embed->parsed()) {
            return cmd_embed(config, out, err);
        }
        if (annealing->parsed()) {
            return cmd_anneal(config, out, err);
        }
        return cmd_diagnose(config, out);
    } catch (const InputError &e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    } catch (const NumericalError &e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const std::filesystem::filesystem_error &e) {
        err << "error: " << e.what() << '\n';
        return kExitInput;
    }
}

} // namespace flowdist::cli
