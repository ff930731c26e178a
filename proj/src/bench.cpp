#include "dlsh/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "dlsh/errors.hpp"

namespace dlsh {

Workload make_workload(Dataset data, Dataset queries, double truth_radius, std::size_t workers,
                       const std::optional<std::filesystem::path>& gt_cache_dir) {
    if (data.dim != queries.dim) {
        throw DimensionError("data dimension " + std::to_string(data.dim) + " != query dimension " +
                             std::to_string(queries.dim));
    }
    Workload wl;
    wl.truth = gt_cache_dir ? cached_ground_truth(*gt_cache_dir, data, queries, truth_radius, workers)
                            : compute_ground_truth(data, queries, truth_radius, workers);
    wl.query_records = as_queries(queries);
    wl.data = std::move(data);
    wl.queries = std::move(queries);
    return wl;
}

Recall compute_recall(const GroundTruth& truth, std::span<const MatchResult> matches, double r, double cr) {
    if (truth.radius < r) {
        throw ParameterError("ground truth radius is smaller than r");
    }
    // Best (smallest) returned distance per query.
    std::map<std::uint64_t, double> best;
    for (const auto& m : matches) {
        auto [it, inserted] = best.try_emplace(m.query_id, m.distance);
        if (!inserted) {
            it->second = std::min(it->second, m.distance);
        }
    }
    std::size_t eligible = 0;
    std::size_t hit_strict = 0;
    std::size_t hit_cr = 0;
    for (const auto& [qid, list] : truth.near) {
        if (list.empty() || list.front().distance > r) {
            continue;
        }
        ++eligible;
        if (auto it = best.find(qid); it != best.end()) {
            hit_strict += it->second <= r ? 1 : 0;
            hit_cr += it->second <= cr ? 1 : 0;
        }
    }
    Recall out;
    out.eligible = eligible;
    if (eligible > 0) {
        out.strict = static_cast<double>(hit_strict) / static_cast<double>(eligible);
        out.cr = static_cast<double>(hit_cr) / static_cast<double>(eligible);
    }
    return out;
}

RunMetrics compute_metrics(const RunConfig& cfg, const Workload& wl, const JobResult& job, double wall_ms) {
    RunMetrics m;
    m.config = cfg;
    m.n = wl.data.size();
    m.n_queries = wl.queries.size();
    const Recall recall = compute_recall(wl.truth, job.matches, cfg.params.r, cfg.params.c * cfg.params.r);
    m.recall_strict = recall.strict;
    m.recall_cr = recall.cr;
    m.data_messages = job.ledger.data_messages;
    m.query_messages = job.ledger.query_messages;
    m.data_bytes = job.ledger.data_bytes;
    m.query_bytes = job.ledger.query_bytes;
    if (!job.ledger.per_query_keys.empty()) {
        std::uint64_t total = 0;
        for (const auto& [qid, count] : job.ledger.per_query_keys) {
            total += count;
            m.max_f_q = std::max(m.max_f_q, count);
        }
        m.mean_f_q = static_cast<double>(total) / static_cast<double>(job.ledger.per_query_keys.size());
    }
    if (!job.loads.empty()) {
        const LoadSummary s = load_summary(job.loads);
        m.load_avg = s.avg;
        m.load_max = s.max;
    }
    m.wall_ms = wall_ms;
    return m;
}

RunOutcome execute_run(const Workload& wl, const RunConfig& cfg) {
    if (wl.truth.radius < cfg.params.c * cfg.params.r) {
        throw ParameterError("workload ground truth radius is smaller than c r");
    }
    const JobSpec spec{cfg.scheme, cfg.params, cfg.probe_self, cfg.seed};
    const auto start = std::chrono::steady_clock::now();
    JobResult job = run_job(wl.data.points, wl.query_records, spec, cfg.cluster);
    const auto stop = std::chrono::steady_clock::now();
    const double wall_ms = std::chrono::duration<double, std::milli>(stop - start).count();
    RunMetrics metrics = compute_metrics(cfg, wl, job, wall_ms);
    return {std::move(metrics), std::move(job)};
}

// ---------------------------------------------------------------------------
// CSV

namespace {

std::string fmt_exact(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_metric(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

}  // namespace

std::string csv_header() {
    return "schema_version,scheme,n,n_q,d,k,W,D,L,r,c,machines,mapping,probe_self,seed,"
           "recall_strict,recall_cr,data_messages,query_messages,data_bytes,query_bytes,"
           "mean_f_q,max_f_q,load_avg,load_max,wall_ms";
}

std::string csv_row(const RunMetrics& m) {
    const auto& p = m.config.params;
    std::ostringstream os;
    os << kCsvSchemaVersion << ',' << to_string(m.config.scheme) << ',' << m.n << ',' << m.n_queries << ','
       << p.d << ',' << p.k << ',' << fmt_exact(p.W) << ',' << fmt_exact(p.D) << ',' << p.L << ','
       << fmt_exact(p.r) << ',' << fmt_exact(p.c) << ',' << m.config.cluster.num_machines << ','
       << to_string(m.config.cluster.mapping) << ',' << (m.config.probe_self ? "on" : "off") << ','
       << m.config.seed << ',' << fmt_metric(m.recall_strict) << ',' << fmt_metric(m.recall_cr) << ','
       << m.data_messages << ',' << m.query_messages << ',' << m.data_bytes << ',' << m.query_bytes << ','
       << fmt_metric(m.mean_f_q) << ',' << m.max_f_q << ',' << fmt_metric(m.load_avg) << ',' << m.load_max << ','
       << fmt_metric(m.wall_ms);
    return os.str();
}

void write_results(const std::filesystem::path& path, std::span<const MatchResult> matches) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open " + path.string() + " for writing");
    }
    out << "query_id,point_id,distance\n";
    for (const auto& m : matches) {
        out << m.query_id << ',' << m.point_id << ',' << fmt_exact(m.distance) << '\n';
    }
    if (!out) {
        throw FormatError("write error on " + path.string());
    }
}

// ---------------------------------------------------------------------------
// Sweeps

SweepVariable parse_sweep_variable(const std::string& text) {
    if (text == "L" || text == "l") {
        return SweepVariable::L;
    }
    if (text == "D" || text == "d") {
        return SweepVariable::D;
    }
    throw ParameterError("sweep variable must be L or D, got '" + text + "'");
}

std::vector<RunMetrics> run_sweep(const Workload& wl, const RunConfig& base, SweepVariable var,
                                  std::span<const double> grid, std::span<const Scheme> schemes) {
    if (grid.empty()) {
        throw ParameterError("sweep grid is empty");
    }
    if (schemes.empty()) {
        throw ParameterError("sweep needs at least one scheme");
    }
    std::vector<RunMetrics> rows;
    for (double value : grid) {
        RunConfig cfg = base;
        if (var == SweepVariable::L) {
            if (!(value >= 1) || value != std::floor(value)) {
                throw ParameterError("L grid values must be positive integers");
            }
            cfg.params.L = static_cast<std::size_t>(value);
        } else {
            if (!(value > 0) || !std::isfinite(value)) {
                throw ParameterError("D grid values must be positive");
            }
            cfg.params.D = value;
        }
        for (Scheme s : schemes) {
            cfg.scheme = s;
            rows.push_back(execute_run(wl, cfg).metrics);
        }
    }
    return rows;
}

// ---------------------------------------------------------------------------
// D tuning

TuneObjective parse_objective(const std::string& text) {
    if (text == "wall_ms") {
        return TuneObjective::WallMs;
    }
    if (text == "weighted") {
        return TuneObjective::Weighted;
    }
    throw ParameterError("objective must be wall_ms or weighted, got '" + text + "'");
}

double tune_objective(const RunMetrics& m, const TuneOptions& opt) {
    if (opt.objective == TuneObjective::WallMs) {
        return m.wall_ms;
    }
    const double per_query = m.n_queries ? static_cast<double>(m.query_messages) / m.n_queries : 0.0;
    const double skew = m.load_avg > 0 ? static_cast<double>(m.load_max) / m.load_avg : 0.0;
    return opt.shuffle_weight * per_query + opt.load_weight * skew;
}

TuneResult tune_d(const Workload& wl, const RunConfig& base, const TuneOptions& opt) {
    const double root_k = std::sqrt(static_cast<double>(base.params.k));
    const double lo = opt.lo > 0 ? opt.lo : root_k / 4.0;
    const double hi = opt.hi > 0 ? opt.hi : 8.0 * root_k;
    if (!(lo < hi) || !std::isfinite(hi)) {
        throw ParameterError("tune_d needs 0 < lo < hi");
    }
    if (opt.iterations < 0) {
        throw ParameterError("tune_d iterations must be >= 0");
    }

    TuneResult result;
    std::map<double, double> seen;
    auto eval = [&](double D) {
        if (auto it = seen.find(D); it != seen.end()) {
            return it->second;
        }
        RunConfig cfg = base;
        cfg.scheme = Scheme::Layered;
        cfg.params.D = D;
        TunePoint pt;
        pt.step = static_cast<int>(result.trace.size());
        pt.D = D;
        pt.metrics = execute_run(wl, cfg).metrics;
        pt.objective = tune_objective(pt.metrics, opt);
        if (!std::isfinite(pt.objective)) {
            throw IntegrityError("objective is not finite at D = " + fmt_exact(D));
        }
        seen.emplace(D, pt.objective);
        result.trace.push_back(pt);
        return pt.objective;
    };

    eval(lo);
    eval(hi);
    if (root_k > lo && root_k < hi) {
        eval(root_k);
    }

    constexpr double kInvPhi = 0.6180339887498949;
    double a = std::log(lo);
    double b = std::log(hi);
    double x1 = b - kInvPhi * (b - a);
    double x2 = a + kInvPhi * (b - a);
    double f1 = eval(std::exp(x1));
    double f2 = eval(std::exp(x2));
    for (int it = 0; it < opt.iterations; ++it) {
        if (f1 <= f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - kInvPhi * (b - a);
            f1 = eval(std::exp(x1));
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + kInvPhi * (b - a);
            f2 = eval(std::exp(x2));
        }
    }

    const auto best = std::min_element(result.trace.begin(), result.trace.end(),
                                       [](const TunePoint& l, const TunePoint& r) { return l.objective < r.objective; });
    result.best_D = best->D;
    result.best_objective = best->objective;
    return result;
}

std::string tune_trace_csv(const TuneResult& result) {
    std::ostringstream os;
    os << "step,D,objective,query_messages,mean_f_q,load_avg,load_max,recall_cr,wall_ms\n";
    for (const auto& pt : result.trace) {
        const auto& m = pt.metrics;
        os << pt.step << ',' << fmt_exact(pt.D) << ',' << fmt_metric(pt.objective) << ',' << m.query_messages
           << ',' << fmt_metric(m.mean_f_q) << ',' << fmt_metric(m.load_avg) << ',' << m.load_max << ','
           << fmt_metric(m.recall_cr) << ',' << fmt_metric(m.wall_ms) << '\n';
    }
    return os.str();
}

}  // namespace dlsh
