#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dlsh/schemes.hpp"

namespace dlsh {

/// n points of dimension `dim` with ids 0..n-1.
struct Dataset {
    std::size_t dim = 0;
    std::vector<DataRecord> points;
    std::string provenance;

    std::size_t size() const noexcept { return points.size(); }
};

std::vector<QueryRecord> as_queries(const Dataset& ds);

struct PlantedInstance {
    Dataset data;
    Dataset queries;
    std::vector<std::uint64_t> parents;  ///< parents[j] = data id query j was planted near
};

/// Data: each coordinate N(0, 1/sqrt(d)). Queries: a uniformly chosen data
/// point (with replacement) plus a perturbation with per-coordinate standard
/// deviation r/sqrt(d), so the expected squared distance to the parent is r^2.
/// Coordinates are rounded to float32 after summation.
PlantedInstance generate_planted(std::size_t n, std::size_t n_queries, std::size_t d, double r, std::uint64_t seed);

struct Neighbor {
    std::uint64_t point_id = 0;
    double distance = 0.0;

    friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Linear scan; every point within `radius` (inclusive), by ascending
/// distance, ties by id. `radius` may be +infinity.
std::vector<Neighbor> brute_force_near(const Dataset& data, std::span<const float> q, double radius);

struct GroundTruth {
    double radius = 0.0;
    std::map<std::uint64_t, std::vector<Neighbor>> near;  ///< every query id has an entry
};

GroundTruth compute_ground_truth(const Dataset& data, const Dataset& queries, double radius,
                                 std::size_t workers = 1);

/// Reads the cached ground truth for (data, queries, radius) from `cache_dir`
/// or computes and stores it. See README for the on-disk layout.
GroundTruth cached_ground_truth(const std::filesystem::path& cache_dir, const Dataset& data,
                                const Dataset& queries, double radius, std::size_t workers = 1);

/// FNV-1a 64 over the dataset's LSHV encoding.
std::uint64_t dataset_hash(const Dataset& ds);

/// LSHV: "LSHV", u32 version = 1, u32 d, u64 n, then n*d float32, all
/// little-endian. 20 + 4 n d bytes in total.
inline constexpr std::uint32_t kLshvVersion = 1;
inline constexpr std::size_t kLshvHeaderBytes = 20;

std::vector<std::uint8_t> encode_vectors(const Dataset& ds);
Dataset decode_vectors(std::span<const std::uint8_t> bytes, std::string provenance = {});

/// Throws FormatError (with the byte offset for malformed content).
void write_vectors(const std::filesystem::path& path, const Dataset& ds);
Dataset read_vectors(const std::filesystem::path& path);

}  // namespace dlsh
