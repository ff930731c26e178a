#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dlsh/cluster_sim.hpp"
#include "dlsh/data_io.hpp"

namespace dlsh {

struct RunConfig {
    Scheme scheme = Scheme::Layered;
    LshParams params;
    bool probe_self = true;
    std::uint64_t seed = 1;
    ClusterConfig cluster;
};

/// Data, queries and the oracle's near lists (radius >= c r) for one run or
/// a family of paired runs.
struct Workload {
    Dataset data;
    Dataset queries;
    std::vector<QueryRecord> query_records;
    GroundTruth truth;
};

/// Builds a workload; the ground truth is read from / written to
/// `gt_cache_dir` when given.
Workload make_workload(Dataset data, Dataset queries, double truth_radius, std::size_t workers = 1,
                       const std::optional<std::filesystem::path>& gt_cache_dir = std::nullopt);

struct Recall {
    double strict = 1.0;  ///< has an r-near point and the output holds a point within r
    double cr = 1.0;      ///< has an r-near point and the output holds a point within c r
    std::size_t eligible = 0;
};

/// Both variants are conditioned on the oracle listing at least one point
/// within r; with no such query both are reported as 1.
Recall compute_recall(const GroundTruth& truth, std::span<const MatchResult> matches, double r, double cr);

struct RunMetrics {
    RunConfig config;
    std::size_t n = 0;
    std::size_t n_queries = 0;
    double recall_strict = 0.0;
    double recall_cr = 0.0;
    std::uint64_t data_messages = 0;
    std::uint64_t query_messages = 0;
    std::uint64_t data_bytes = 0;
    std::uint64_t query_bytes = 0;
    double mean_f_q = 0.0;     ///< mean messages per query (distinct probe keys)
    std::uint64_t max_f_q = 0;
    double load_avg = 0.0;
    std::uint64_t load_max = 0;
    double wall_ms = 0.0;
};

struct RunOutcome {
    RunMetrics metrics;
    JobResult job;
};

RunMetrics compute_metrics(const RunConfig& cfg, const Workload& wl, const JobResult& job, double wall_ms);
RunOutcome execute_run(const Workload& wl, const RunConfig& cfg);

inline constexpr int kCsvSchemaVersion = 1;

/// Column order is part of the schema; wall_ms is always last.
std::string csv_header();
std::string csv_row(const RunMetrics& m);

/// "query_id,point_id,distance" rows in canonical order.
void write_results(const std::filesystem::path& path, std::span<const MatchResult> matches);

enum class SweepVariable { L, D };
SweepVariable parse_sweep_variable(const std::string& text);

/// One row per (grid value, scheme), all sharing cfg.seed.
std::vector<RunMetrics> run_sweep(const Workload& wl, const RunConfig& base, SweepVariable var,
                                  std::span<const double> grid, std::span<const Scheme> schemes);

enum class TuneObjective { WallMs, Weighted };
TuneObjective parse_objective(const std::string& text);

struct TuneOptions {
    TuneObjective objective = TuneObjective::Weighted;
    double lo = 0.0;  ///< 0 means sqrt(k) / 4
    double hi = 0.0;  ///< 0 means 8 sqrt(k)
    int iterations = 12;
    double shuffle_weight = 1.0;  ///< per query message
    double load_weight = 1.0;     ///< per unit of load_max / load_avg
};

struct TunePoint {
    int step = 0;
    double D = 0.0;
    double objective = 0.0;
    RunMetrics metrics;
};

struct TuneResult {
    double best_D = 0.0;
    double best_objective = 0.0;
    std::vector<TunePoint> trace;  ///< every evaluation, in order
};

/// weighted = shuffle_weight * query_messages / n_q + load_weight * load_max / load_avg
double tune_objective(const RunMetrics& m, const TuneOptions& opt);

/// Golden-section search on log D over [lo, hi] for the Layered scheme.
/// Both endpoints and sqrt(k) (when inside the bracket) are evaluated too;
/// the result is the best evaluated point. Throws IntegrityError on a
/// non-finite objective.
TuneResult tune_d(const Workload& wl, const RunConfig& base, const TuneOptions& opt);

std::string tune_trace_csv(const TuneResult& result);

}  // namespace dlsh
