#include "dlsh/data_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iterator>
#include <limits>
#include <optional>
#include <sstream>

#include "dlsh/errors.hpp"
#include "dlsh/parallel.hpp"
#include "dlsh/random.hpp"
#include "le_bytes.hpp"

namespace dlsh {

std::vector<QueryRecord> as_queries(const Dataset& ds) {
    std::vector<QueryRecord> out;
    out.reserve(ds.size());
    for (const auto& p : ds.points) {
        out.push_back({p.id, p.point});
    }
    return out;
}

PlantedInstance generate_planted(std::size_t n, std::size_t n_queries, std::size_t d, double r, std::uint64_t seed) {
    if (n < 1 || n_queries < 1 || d < 1) {
        throw ParameterError("generate_planted requires n >= 1, n_queries >= 1, d >= 1");
    }
    if (!(r > 0) || !std::isfinite(r)) {
        throw ParameterError("generate_planted requires r > 0");
    }
    const double data_sigma = 1.0 / std::sqrt(static_cast<double>(d));
    const double query_sigma = r / std::sqrt(static_cast<double>(d));

    PlantedInstance inst;
    std::ostringstream tag;
    tag << "planted n=" << n << " nq=" << n_queries << " d=" << d << " r=" << r << " seed=" << seed;
    inst.data.dim = d;
    inst.data.provenance = tag.str() + " part=data";
    inst.data.points.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        CounterRng rng(derive_key(seed, {kTagDataPoint, i}));
        auto& rec = inst.data.points[i];
        rec.id = i;
        rec.point.resize(d);
        for (float& x : rec.point) {
            x = static_cast<float>(rng.normal() * data_sigma);
        }
    }

    inst.queries.dim = d;
    inst.queries.provenance = tag.str() + " part=queries";
    inst.queries.points.resize(n_queries);
    inst.parents.resize(n_queries);
    for (std::size_t j = 0; j < n_queries; ++j) {
        CounterRng rng(derive_key(seed, {kTagQueryPoint, j}));
        const auto parent =
            std::min<std::uint64_t>(n - 1, static_cast<std::uint64_t>(rng.uniform() * static_cast<double>(n)));
        inst.parents[j] = parent;
        const auto& base = inst.data.points[parent].point;
        auto& rec = inst.queries.points[j];
        rec.id = j;
        rec.point.resize(d);
        for (std::size_t t = 0; t < d; ++t) {
            rec.point[t] = static_cast<float>(static_cast<double>(base[t]) + rng.normal() * query_sigma);
        }
    }
    return inst;
}

std::vector<Neighbor> brute_force_near(const Dataset& data, std::span<const float> q, double radius) {
    if (q.size() != data.dim) {
        throw DimensionError("query dimension " + std::to_string(q.size()) + " != dataset dimension " +
                             std::to_string(data.dim));
    }
    std::vector<Neighbor> out;
    for (const auto& p : data.points) {
        const double dist = l2_distance(q, p.point);
        if (dist <= radius) {
            out.push_back({p.id, dist});
        }
    }
    std::sort(out.begin(), out.end(), [](const Neighbor& a, const Neighbor& b) {
        return a.distance != b.distance ? a.distance < b.distance : a.point_id < b.point_id;
    });
    return out;
}

GroundTruth compute_ground_truth(const Dataset& data, const Dataset& queries, double radius, std::size_t workers) {
    std::vector<std::vector<Neighbor>> lists(queries.size());
    parallel_for(queries.size(), workers,
                 [&](std::size_t j) { lists[j] = brute_force_near(data, queries.points[j].point, radius); });
    GroundTruth gt;
    gt.radius = radius;
    for (std::size_t j = 0; j < queries.size(); ++j) {
        gt.near.emplace(queries.points[j].id, std::move(lists[j]));
    }
    return gt;
}

// ---------------------------------------------------------------------------
// LSHV encoding

std::uint64_t dataset_hash(const Dataset& ds) {
    const auto bytes = encode_vectors(ds);
    return detail::fnv1a(bytes.data(), bytes.size());
}

std::vector<std::uint8_t> encode_vectors(const Dataset& ds) {
    if (ds.dim == 0 || ds.dim > std::numeric_limits<std::uint32_t>::max()) {
        throw FormatError("dimension " + std::to_string(ds.dim) + " cannot be encoded");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kLshvHeaderBytes + 4 * ds.size() * ds.dim);
    for (char ch : {'L', 'S', 'H', 'V'}) {
        out.push_back(static_cast<std::uint8_t>(ch));
    }
    detail::put_u32(out, kLshvVersion);
    detail::put_u32(out, static_cast<std::uint32_t>(ds.dim));
    detail::put_u64(out, ds.size());
    for (const auto& p : ds.points) {
        if (p.point.size() != ds.dim) {
            throw DimensionError("point " + std::to_string(p.id) + " has dimension " + std::to_string(p.point.size()));
        }
        for (float x : p.point) {
            detail::put_f32(out, x);
        }
    }
    return out;
}

Dataset decode_vectors(std::span<const std::uint8_t> bytes, std::string provenance) {
    auto fail = [](std::size_t offset, const std::string& what) {
        throw FormatError("LSHV format error at byte " + std::to_string(offset) + ": " + what);
    };
    if (bytes.size() < kLshvHeaderBytes) {
        fail(bytes.size(), "truncated header (" + std::to_string(bytes.size()) + " bytes)");
    }
    if (!std::equal(bytes.begin(), bytes.begin() + 4, "LSHV")) {
        fail(0, "bad magic");
    }
    const std::uint32_t version = detail::get_u32(bytes.data() + 4);
    if (version != kLshvVersion) {
        fail(4, "unsupported version " + std::to_string(version));
    }
    const std::uint32_t d = detail::get_u32(bytes.data() + 8);
    if (d == 0) {
        fail(8, "dimension must be >= 1");
    }
    const std::uint64_t n = detail::get_u64(bytes.data() + 12);
    const std::uint64_t payload_limit = (std::numeric_limits<std::uint64_t>::max() - kLshvHeaderBytes) / 4;
    if (n != 0 && n > payload_limit / d) {
        fail(12, "n * d overflows");
    }
    const std::uint64_t expected = kLshvHeaderBytes + 4 * n * d;
    if (bytes.size() < expected) {
        fail(bytes.size(), "truncated payload, expected " + std::to_string(expected) + " bytes");
    }
    if (bytes.size() > expected) {
        fail(expected, "trailing bytes after " + std::to_string(n) + " vectors");
    }
    Dataset ds;
    ds.dim = d;
    ds.provenance = std::move(provenance);
    ds.points.resize(n);
    const std::uint8_t* p = bytes.data() + kLshvHeaderBytes;
    for (std::uint64_t i = 0; i < n; ++i) {
        ds.points[i].id = i;
        ds.points[i].point.resize(d);
        for (auto& x : ds.points[i].point) {
            x = detail::get_f32(p);
            p += 4;
        }
    }
    return ds;
}

namespace {

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) {
        throw FormatError("read error on " + path.string());
    }
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FormatError("cannot open " + path.string() + " for writing");
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw FormatError("write error on " + path.string());
    }
}

}  // namespace

void write_vectors(const std::filesystem::path& path, const Dataset& ds) { write_file(path, encode_vectors(ds)); }

Dataset read_vectors(const std::filesystem::path& path) {
    try {
        return decode_vectors(read_file(path), path.string());
    } catch (const FormatError& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Ground-truth cache
//
// gt-<data hash>-<query hash>-<radius bits>.lshv  distances as a 1-d LSHV file
// gt-<...>.idx                                    sidecar index:
//   "LSHI", u32 version = 1, u64 radius bits, u64 n_queries,
//   then per query: u64 query id, u64 count, count x u64 point id.
// Distances are recomputed from the point ids on load, so the float32 copy
// in the .lshv file is informational only.

namespace {

constexpr std::uint32_t kIndexVersion = 1;

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<std::uint8_t> encode_index(const GroundTruth& gt) {
    std::vector<std::uint8_t> out;
    for (char ch : {'L', 'S', 'H', 'I'}) {
        out.push_back(static_cast<std::uint8_t>(ch));
    }
    detail::put_u32(out, kIndexVersion);
    detail::put_u64(out, std::bit_cast<std::uint64_t>(gt.radius));
    detail::put_u64(out, gt.near.size());
    for (const auto& [qid, list] : gt.near) {
        detail::put_u64(out, qid);
        detail::put_u64(out, list.size());
        for (const auto& nb : list) {
            detail::put_u64(out, nb.point_id);
        }
    }
    return out;
}

std::optional<GroundTruth> decode_index(std::span<const std::uint8_t> bytes, const Dataset& data,
                                        const Dataset& queries, double radius) {
    std::size_t pos = 0;
    auto need = [&](std::size_t n) { return pos + n <= bytes.size(); };
    if (!need(24) || !std::equal(bytes.begin(), bytes.begin() + 4, "LSHI") ||
        detail::get_u32(bytes.data() + 4) != kIndexVersion ||
        detail::get_u64(bytes.data() + 8) != std::bit_cast<std::uint64_t>(radius)) {
        return std::nullopt;
    }
    const std::uint64_t nq = detail::get_u64(bytes.data() + 16);
    pos = 24;
    if (nq != queries.size()) {
        return std::nullopt;
    }
    GroundTruth gt;
    gt.radius = radius;
    for (std::uint64_t j = 0; j < nq; ++j) {
        if (!need(16)) {
            return std::nullopt;
        }
        const std::uint64_t qid = detail::get_u64(bytes.data() + pos);
        const std::uint64_t count = detail::get_u64(bytes.data() + pos + 8);
        pos += 16;
        if (qid >= queries.size() || count > data.size() || !need(8 * count)) {
            return std::nullopt;
        }
        std::vector<Neighbor> list;
        list.reserve(count);
        for (std::uint64_t t = 0; t < count; ++t) {
            const std::uint64_t pid = detail::get_u64(bytes.data() + pos);
            pos += 8;
            if (pid >= data.size()) {
                return std::nullopt;
            }
            list.push_back({pid, l2_distance(queries.points[qid].point, data.points[pid].point)});
        }
        gt.near.emplace(qid, std::move(list));
    }
    return pos == bytes.size() ? std::optional<GroundTruth>(std::move(gt)) : std::nullopt;
}

}  // namespace

GroundTruth cached_ground_truth(const std::filesystem::path& cache_dir, const Dataset& data, const Dataset& queries,
                                double radius, std::size_t workers) {
    const std::string stem = "gt-" + hex64(dataset_hash(data)) + "-" + hex64(dataset_hash(queries)) + "-" +
                             hex64(std::bit_cast<std::uint64_t>(radius));
    const auto index_path = cache_dir / (stem + ".idx");
    const auto dist_path = cache_dir / (stem + ".lshv");
    if (std::filesystem::exists(index_path)) {
        if (auto gt = decode_index(read_file(index_path), data, queries, radius)) {
            return std::move(*gt);
        }
    }
    GroundTruth gt = compute_ground_truth(data, queries, radius, workers);
    std::error_code ec;
    std::filesystem::create_directories(cache_dir, ec);
    if (ec) {
        throw FormatError("cannot create cache directory " + cache_dir.string() + ": " + ec.message());
    }
    Dataset dists;
    dists.dim = 1;
    for (const auto& [qid, list] : gt.near) {
        for (const auto& nb : list) {
            dists.points.push_back({dists.points.size(), {static_cast<float>(nb.distance)}});
        }
    }
    write_vectors(dist_path, dists);
    write_file(index_path, encode_index(gt));
    return gt;
}

}  // namespace dlsh
