// lsh_bench: generate planted datasets and run Simple / Layered LSH jobs on
// the simulated cluster, emitting CSV metrics.
//
//   lsh_bench gen    --n 10000 --nq 1000 --d 100 --r 0.3 --data d.lshv --queries q.lshv
//   lsh_bench run    --data d.lshv --queries q.lshv --scheme layered --out runs.csv
//   lsh_bench sweep  --data d.lshv --queries q.lshv --var L --grid 25,50,100 --out sweep.csv
//   lsh_bench tune-d --data d.lshv --queries q.lshv --objective weighted --trace trace.csv
//
// Any subcommand accepts --config FILE with key=value lines (same names as
// the flags); flags on the command line win.
//
// Exit codes: 0 ok, 2 parameter error, 3 I/O or format error, 4 integrity error.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dlsh/bench.hpp"
#include "dlsh/errors.hpp"

namespace {

constexpr int kExitParameter = 2;
constexpr int kExitFormat = 3;
constexpr int kExitIntegrity = 4;

struct RunArgs {
    std::string data;
    std::string queries;
    std::string scheme = "layered";
    std::size_t k = 10;
    double w = 0.5;
    std::size_t l = 100;
    double dparam = 0.0;  // 0 = sqrt(k)
    std::size_t machines = 16;
    std::string mapping = "modulo";
    std::string probe_self = "on";
    double r = 0.3;
    double c = 2.0;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
    std::string gt_cache;
    std::string out;
};

void add_run_options(CLI::App* cmd, RunArgs& a, bool with_scheme) {
    cmd->add_option("--data", a.data, "data LSHV file")->required();
    cmd->add_option("--queries", a.queries, "query LSHV file")->required();
    if (with_scheme) {
        cmd->add_option("--scheme", a.scheme, "simple | layered")->check(CLI::IsMember({"simple", "layered"}));
    }
    cmd->add_option("--k", a.k, "inner hash length")->capture_default_str();
    cmd->add_option("--w", a.w, "inner bin width W")->capture_default_str();
    cmd->add_option("--l", a.l, "offsets per query L")->capture_default_str();
    cmd->add_option("--dparam", a.dparam, "outer bin width D (0 = sqrt(k))")->capture_default_str();
    cmd->add_option("--machines", a.machines, "number of machines M")->capture_default_str();
    cmd->add_option("--mapping", a.mapping, "identity | modulo")
        ->check(CLI::IsMember({"identity", "modulo"}))
        ->capture_default_str();
    cmd->add_option("--probe-self", a.probe_self, "also probe the query itself: on | off")
        ->check(CLI::IsMember({"on", "off"}))
        ->capture_default_str();
    cmd->add_option("--r", a.r, "near radius r")->capture_default_str();
    cmd->add_option("--c", a.c, "approximation ratio c")->capture_default_str();
    cmd->add_option("--seed", a.seed, "root seed for H, G and offsets")->capture_default_str();
    cmd->add_option("--threads", a.threads, "simulator worker threads")->capture_default_str();
    cmd->add_option("--gt-cache", a.gt_cache, "ground-truth cache directory");
    cmd->add_option("--out", a.out, "CSV output file");
}

dlsh::RunConfig to_config(const RunArgs& a) {
    dlsh::RunConfig cfg;
    cfg.scheme = dlsh::parse_scheme(a.scheme);
    cfg.params.k = a.k;
    cfg.params.W = a.w;
    cfg.params.L = a.l;
    cfg.params.D = a.dparam > 0 ? a.dparam : std::sqrt(static_cast<double>(a.k));
    cfg.params.r = a.r;
    cfg.params.c = a.c;
    cfg.probe_self = a.probe_self == "on";
    cfg.seed = a.seed;
    cfg.cluster.num_machines = a.machines;
    cfg.cluster.mapping = dlsh::parse_mapping(a.mapping);
    cfg.cluster.workers = a.threads;
    return cfg;
}

dlsh::Workload load_workload(const RunArgs& a, dlsh::RunConfig& cfg) {
    dlsh::Dataset data = dlsh::read_vectors(a.data);
    dlsh::Dataset queries = dlsh::read_vectors(a.queries);
    cfg.params.d = data.dim;
    cfg.params.n = std::max<std::size_t>(1, data.size());
    cfg.params.validate();
    std::optional<std::filesystem::path> cache;
    if (!a.gt_cache.empty()) {
        cache = a.gt_cache;
    }
    return dlsh::make_workload(std::move(data), std::move(queries), cfg.params.c * cfg.params.r, a.threads, cache);
}

std::vector<double> parse_grid(const std::string& text) {
    std::vector<double> grid;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            grid.push_back(std::stod(item, &used));
            if (used != item.size()) {
                throw std::invalid_argument(item);
            }
        } catch (const std::exception&) {
            throw dlsh::ParameterError("bad grid value '" + item + "'");
        }
    }
    return grid;
}

void write_text(const std::string& path, const std::string& text, bool append) {
    std::ofstream out(path, append ? std::ios::app : std::ios::trunc);
    if (!out) {
        throw dlsh::FormatError("cannot open " + path + " for writing");
    }
    out << text;
    if (!out) {
        throw dlsh::FormatError("write error on " + path);
    }
}

/// Appends one row, writing the header first when the file is new or empty.
void append_csv_row(const std::string& path, const std::string& row) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path) || std::filesystem::file_size(path, ec) == 0;
    write_text(path, (fresh ? dlsh::csv_header() + "\n" : std::string()) + row + "\n", true);
}

/// Expands `--config FILE` into flags placed right after the subcommand name,
/// so that explicit flags (which come later) take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string config_path;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config" && i + 1 < args.size()) {
            config_path = args[i + 1];
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i), args.begin() + static_cast<std::ptrdiff_t>(i) + 2);
            break;
        }
        if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
            args.erase(args.begin() + static_cast<std::ptrdiff_t>(i));
            break;
        }
    }
    if (config_path.empty()) {
        return args;
    }
    std::ifstream in(config_path);
    if (!in) {
        throw dlsh::FormatError("cannot open config file " + config_path);
    }
    std::vector<std::string> extra;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) {
            line.erase(hash);
        }
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) {
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw dlsh::ParameterError(config_path + ":" + std::to_string(lineno) + ": expected key=value");
        }
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        std::string key = trim(line.substr(0, eq));
        while (!key.empty() && key.front() == '-') {
            key.erase(key.begin());
        }
        extra.push_back("--" + key);
        extra.push_back(trim(line.substr(eq + 1)));
    }
    std::size_t pos = 0;
    while (pos < args.size() && !args[pos].empty() && args[pos][0] == '-') {
        ++pos;
    }
    pos = std::min(pos + 1, args.size());
    args.insert(args.begin() + static_cast<std::ptrdiff_t>(pos), extra.begin(), extra.end());
    return args;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Simple vs Layered distributed LSH benchmark"};
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.require_subcommand(1);

    // gen
    auto* gen = app.add_subcommand("gen", "generate a planted dataset");
    std::size_t gen_n = 10000;
    std::size_t gen_nq = 1000;
    std::size_t gen_d = 100;
    double gen_r = 0.3;
    std::uint64_t gen_seed = 1;
    std::string gen_preset;
    std::string gen_data;
    std::string gen_queries;
    gen->add_option("--n", gen_n, "data points")->capture_default_str();
    gen->add_option("--nq", gen_nq, "queries")->capture_default_str();
    gen->add_option("--d", gen_d, "dimension")->capture_default_str();
    gen->add_option("--r", gen_r, "perturbation radius")->capture_default_str();
    gen->add_option("--seed", gen_seed, "generator seed")->capture_default_str();
    gen->add_option("--preset", gen_preset, "desk (n=1e4, nq=1e3, d=25) | large (n=1e6, nq=1e5, d=100)")
        ->check(CLI::IsMember({"desk", "large"}));
    gen->add_option("--data", gen_data, "output data file")->required();
    gen->add_option("--queries", gen_queries, "output query file")->required();

    // run
    auto* run = app.add_subcommand("run", "run one job and append a CSV row");
    RunArgs run_args;
    std::string run_results;
    add_run_options(run, run_args, true);
    run->add_option("--results", run_results, "write matched (query, point) pairs here");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "sweep L or D for one or both schemes");
    RunArgs sweep_args;
    std::string sweep_var = "L";
    std::string sweep_grid = "25,50,100,200,400";
    std::string sweep_unit = "abs";
    std::string sweep_schemes = "simple,layered";
    add_run_options(sweep, sweep_args, false);
    sweep->add_option("--var", sweep_var, "L | D")->check(CLI::IsMember({"L", "D", "l", "d"}))->capture_default_str();
    sweep->add_option("--grid", sweep_grid, "comma-separated grid values")->capture_default_str();
    sweep->add_option("--grid-unit", sweep_unit, "abs | sqrtk (D grid given in multiples of sqrt(k))")
        ->check(CLI::IsMember({"abs", "sqrtk"}))
        ->capture_default_str();
    sweep->add_option("--schemes", sweep_schemes, "comma-separated schemes")->capture_default_str();

    // tune-d
    auto* tune = app.add_subcommand("tune-d", "search D for the Layered scheme");
    RunArgs tune_args;
    dlsh::TuneOptions tune_opt;
    std::string tune_objective = "weighted";
    std::string tune_trace;
    add_run_options(tune, tune_args, false);
    tune->add_option("--objective", tune_objective, "wall_ms | weighted")
        ->check(CLI::IsMember({"wall_ms", "weighted"}))
        ->capture_default_str();
    tune->add_option("--lo", tune_opt.lo, "bracket low end (0 = sqrt(k)/4)");
    tune->add_option("--hi", tune_opt.hi, "bracket high end (0 = 8 sqrt(k))");
    tune->add_option("--iters", tune_opt.iterations, "golden-section iterations")->capture_default_str();
    tune->add_option("--shuffle-weight", tune_opt.shuffle_weight, "weight of query messages per query")
        ->capture_default_str();
    tune->add_option("--load-weight", tune_opt.load_weight, "weight of load_max / load_avg")->capture_default_str();
    tune->add_option("--trace", tune_trace, "trace CSV output");

    try {
        std::vector<std::string> args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        try {
            app.parse(args);
        } catch (const CLI::ParseError& e) {
            const int code = app.exit(e);
            return code == 0 ? 0 : kExitParameter;
        }

        if (*gen) {
            if (gen_preset == "desk") {
                gen_n = 10000;
                gen_nq = 1000;
                gen_d = 25;
            } else if (gen_preset == "large") {
                gen_n = 1000000;
                gen_nq = 100000;
                gen_d = 100;
            }
            const auto inst = dlsh::generate_planted(gen_n, gen_nq, gen_d, gen_r, gen_seed);
            dlsh::write_vectors(gen_data, inst.data);
            dlsh::write_vectors(gen_queries, inst.queries);
            std::cout << "wrote " << inst.data.size() << " points and " << inst.queries.size() << " queries (d="
                      << gen_d << ")\n";
        } else if (*run) {
            dlsh::RunConfig cfg = to_config(run_args);
            const dlsh::Workload wl = load_workload(run_args, cfg);
            const auto outcome = dlsh::execute_run(wl, cfg);
            const std::string row = dlsh::csv_row(outcome.metrics);
            if (run_args.out.empty()) {
                std::cout << dlsh::csv_header() << '\n' << row << '\n';
            } else {
                append_csv_row(run_args.out, row);
            }
            if (!run_results.empty()) {
                dlsh::write_results(run_results, outcome.job.matches);
            }
        } else if (*sweep) {
            dlsh::RunConfig cfg = to_config(sweep_args);
            const dlsh::Workload wl = load_workload(sweep_args, cfg);
            std::vector<double> grid = parse_grid(sweep_grid);
            const auto var = dlsh::parse_sweep_variable(sweep_var);
            if (sweep_unit == "sqrtk") {
                for (double& g : grid) {
                    g *= std::sqrt(static_cast<double>(cfg.params.k));
                }
            }
            std::vector<dlsh::Scheme> schemes;
            std::stringstream ss(sweep_schemes);
            for (std::string item; std::getline(ss, item, ',');) {
                schemes.push_back(dlsh::parse_scheme(item));
            }
            std::string csv = dlsh::csv_header() + "\n";
            for (const auto& m : dlsh::run_sweep(wl, cfg, var, grid, schemes)) {
                csv += dlsh::csv_row(m) + "\n";
            }
            if (sweep_args.out.empty()) {
                std::cout << csv;
            } else {
                write_text(sweep_args.out, csv, false);
            }
        } else if (*tune) {
            dlsh::RunConfig cfg = to_config(tune_args);
            const dlsh::Workload wl = load_workload(tune_args, cfg);
            tune_opt.objective = dlsh::parse_objective(tune_objective);
            const auto result = dlsh::tune_d(wl, cfg, tune_opt);
            if (!tune_trace.empty()) {
                write_text(tune_trace, dlsh::tune_trace_csv(result), false);
            }
            if (!tune_args.out.empty()) {
                cfg.params.D = result.best_D;
                const auto& best = *std::find_if(result.trace.begin(), result.trace.end(),
                                                 [&](const dlsh::TunePoint& p) { return p.D == result.best_D; });
                append_csv_row(tune_args.out, dlsh::csv_row(best.metrics));
            }
            std::printf("D=%.17g objective=%.10g\n", result.best_D, result.best_objective);
        }
    } catch (const dlsh::ParameterError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return kExitParameter;
    } catch (const dlsh::DimensionError& e) {
        std::cerr << "dimension error: " << e.what() << '\n';
        return kExitParameter;
    } catch (const dlsh::DomainError& e) {
        std::cerr << "parameter error: " << e.what() << '\n';
        return kExitParameter;
    } catch (const dlsh::FormatError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return kExitFormat;
    } catch (const dlsh::IntegrityError& e) {
        std::cerr << "integrity error: " << e.what() << '\n';
        return kExitIntegrity;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
