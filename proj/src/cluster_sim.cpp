#include "dlsh/cluster_sim.hpp"

#include <algorithm>
#include <string>
#include <unordered_set>

#include "dlsh/errors.hpp"
#include "dlsh/parallel.hpp"
#include "dlsh/random.hpp"
#include "le_bytes.hpp"

namespace dlsh {

std::string_view to_string(MappingMode mode) {
    return mode == MappingMode::Identity ? "identity" : "modulo";
}

MappingMode parse_mapping(std::string_view text) {
    if (text == "identity") {
        return MappingMode::Identity;
    }
    if (text == "modulo") {
        return MappingMode::Modulo;
    }
    throw ParameterError("unknown mapping '" + std::string(text) + "' (expected identity or modulo)");
}

void ClusterConfig::validate() const {
    if (num_machines < 1) {
        throw ParameterError("num_machines must be >= 1");
    }
    if (workers < 1) {
        throw ParameterError("workers must be >= 1");
    }
}

std::uint64_t stable_key_hash(const ShuffleKey& key, std::uint64_t salt) {
    const auto bytes = serialize_key(key);
    return mix64(detail::fnv1a(bytes.data(), bytes.size()) ^ mix64(salt));
}

MachineId assign_machine(const ShuffleKey& key, const ClusterConfig& cfg) {
    if (cfg.mapping == MappingMode::Identity) {
        if (const auto* mk = std::get_if<MachineKey>(&key)) {
            return mk->value;
        }
        return static_cast<MachineId>(stable_key_hash(key, cfg.seed));
    }
    return static_cast<MachineId>(stable_key_hash(key, cfg.seed) % cfg.num_machines);
}

void ShuffleLedger::record(const KeyValueMessage& msg) {
    if (const auto* q = std::get_if<QueryPayload>(&msg.payload)) {
        ++query_messages;
        query_bytes += msg.byte_size;
        ++per_query_keys[q->record->id];
    } else {
        ++data_messages;
        data_bytes += msg.byte_size;
    }
}

namespace {

struct ReduceGroup {
    ShuffleKey key;
    MachineId machine = 0;
    std::vector<DataPayload> data;
    std::vector<const QueryRecord*> queries;
};

template <typename Record>
void check_inputs(std::span<const Record> records, std::size_t dim, const char* what) {
    std::unordered_set<std::uint64_t> ids;
    ids.reserve(records.size());
    for (const auto& rec : records) {
        if (rec.point.size() != dim) {
            throw DimensionError(std::string(what) + " " + std::to_string(rec.id) + " has dimension " +
                                 std::to_string(rec.point.size()) + ", expected " + std::to_string(dim));
        }
        if (!ids.insert(rec.id).second) {
            throw ParameterError(std::string("duplicate ") + what + " id " + std::to_string(rec.id));
        }
    }
}

}  // namespace

JobResult run_job(std::span<const DataRecord> data, std::span<const QueryRecord> queries, const JobSpec& spec,
                  const ClusterConfig& cluster) {
    cluster.validate();
    LshParams params = spec.params;
    params.n = std::max<std::size_t>(1, data.size());
    check_inputs(data, params.d, "data point");
    check_inputs(queries, params.d, "query");
    const SchemeContext ctx = SchemeContext::create(params, spec.seed, spec.probe_self);
    const std::size_t workers = cluster.workers;

    // Map. Each input writes only its own slot, so message order is fixed.
    std::vector<KeyValueMessage> data_msgs(data.size());
    parallel_for(data.size(), workers, [&](std::size_t i) { data_msgs[i] = map_data(data[i], spec.scheme, ctx); });
    std::vector<std::vector<KeyValueMessage>> query_msgs(queries.size());
    parallel_for(queries.size(), workers,
                 [&](std::size_t i) { query_msgs[i] = map_query(queries[i], spec.scheme, ctx); });

    // Shuffle.
    JobResult result;
    std::map<ShuffleKey, ReduceGroup> by_key;
    auto group_for = [&](const ShuffleKey& key) -> ReduceGroup& {
        auto [it, inserted] = by_key.try_emplace(key);
        if (inserted) {
            it->second.key = key;
            it->second.machine = assign_machine(key, cluster);
        }
        return it->second;
    };
    for (const auto& msg : data_msgs) {
        result.ledger.record(msg);
        group_for(msg.key).data.push_back(std::get<DataPayload>(msg.payload));
    }
    for (const auto& msgs : query_msgs) {
        for (const auto& msg : msgs) {
            result.ledger.record(msg);
            group_for(msg.key).queries.push_back(std::get<QueryPayload>(msg.payload).record);
        }
    }
    data_msgs.clear();
    query_msgs.clear();

    std::vector<ReduceGroup*> groups;
    groups.reserve(by_key.size());
    for (auto& [key, group] : by_key) {
        groups.push_back(&group);
    }

    // Reduce. Groups with no queries produce nothing, but still hold load.
    std::vector<ReduceOutput> outputs(groups.size());
    parallel_for(groups.size(), workers, [&](std::size_t i) {
        const ReduceGroup& g = *groups[i];
        if (g.queries.empty()) {
            return;
        }
        if (spec.scheme == Scheme::Simple) {
            std::vector<const DataRecord*> records;
            records.reserve(g.data.size());
            for (const auto& payload : g.data) {
                records.push_back(payload.record);
            }
            outputs[i] = reduce_simple(std::get<BucketId>(g.key), records, g.queries, ctx.params);
        } else {
            outputs[i] = reduce_layered(std::get<MachineKey>(g.key), g.data, g.queries, ctx);
        }
    });

    // Merge per machine.
    std::map<MachineId, MachineLoad> loads;
    std::map<MachineId, std::vector<MatchResult>> per_machine;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const ReduceGroup& g = *groups[i];
        MachineLoad& load = loads[g.machine];
        load.machine_id = g.machine;
        load.num_points += g.data.size();
        load.num_queries += g.queries.size();
        load.num_distance_evals += outputs[i].distance_evals;
        auto& bucket = per_machine[g.machine];
        bucket.insert(bucket.end(), outputs[i].matches.begin(), outputs[i].matches.end());
    }
    for (auto& [machine, matches] : per_machine) {
        std::sort(matches.begin(), matches.end(), canonical_less);
        matches.erase(std::unique(matches.begin(), matches.end(),
                                  [](const MatchResult& a, const MatchResult& b) {
                                      return a.query_id == b.query_id && a.point_id == b.point_id;
                                  }),
                      matches.end());
        result.matches.insert(result.matches.end(), matches.begin(), matches.end());
    }
    std::sort(result.matches.begin(), result.matches.end(), canonical_less);
    for (std::size_t i = 1; i < result.matches.size(); ++i) {
        const auto& a = result.matches[i - 1];
        const auto& b = result.matches[i];
        if (a.query_id == b.query_id && a.point_id == b.point_id) {
            throw IntegrityError("pair (" + std::to_string(a.query_id) + ", " + std::to_string(a.point_id) +
                                 ") produced on two machines");
        }
    }
    result.loads.reserve(loads.size());
    for (const auto& [id, load] : loads) {
        result.loads.push_back(load);
    }
    return result;
}

LoadSummary load_summary(std::span<const MachineLoad> loads) {
    LoadSummary s;
    std::size_t active = 0;
    std::uint64_t total = 0;
    for (const auto& l : loads) {
        if (l.num_points == 0 && l.num_queries == 0) {
            continue;
        }
        ++active;
        total += l.num_points;
        s.max = std::max(s.max, l.num_points);
    }
    if (active == 0) {
        throw ParameterError("load_summary of an empty machine list");
    }
    s.avg = static_cast<double>(total) / static_cast<double>(active);
    return s;
}

}  // namespace dlsh
