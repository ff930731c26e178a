#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace dlsh {

/// Parameters shared by the inner hash, the outer hash and the probing scheme.
struct LshParams {
    std::size_t d = 1;    ///< point dimension
    std::size_t k = 1;    ///< inner hash concatenation length
    double W = 0.5;       ///< inner bin width
    double D = 1.0;       ///< outer bin width
    double r = 0.3;       ///< near radius
    double c = 2.0;       ///< approximation ratio
    std::size_t L = 1;    ///< offsets per query
    std::size_t n = 1;    ///< dataset size

    /// Throws ParameterError on the first violated invariant.
    void validate() const;
};

/// Value of the inner hash H: one integer per row.
struct BucketId {
    std::vector<std::int64_t> coords;

    friend auto operator<=>(const BucketId&, const BucketId&) = default;
    friend bool operator==(const BucketId&, const BucketId&) = default;
};

struct BucketIdHash {
    std::size_t operator()(const BucketId& b) const noexcept;
};

/// Value of the outer hash G, or of the composition GH.
struct MachineKey {
    std::int64_t value = 0;

    friend auto operator<=>(const MachineKey&, const MachineKey&) = default;
};

/// k concatenated p-stable hashes h(v) = floor((a.v + b) / W) with Gaussian a
/// and b uniform on [0, W). Immutable.
class HashFamilyH {
public:
    /// Explicit rows, mostly for tests. `rows` holds k row vectors of length d.
    HashFamilyH(std::vector<std::vector<double>> rows, std::vector<double> offsets, double W);

    /// Draws a fresh family from the (seed, kTagInnerHash, row) streams.
    static HashFamilyH sample(std::size_t d, std::size_t k, double W, std::uint64_t seed);

    std::size_t dim() const noexcept { return d_; }
    std::size_t k() const noexcept { return offsets_.size(); }
    double bin_width() const noexcept { return W_; }
    std::uint64_t seed() const noexcept { return seed_; }

    std::span<const double> row(std::size_t i) const { return {a_.data() + i * d_, d_}; }
    double offset(std::size_t i) const { return offsets_[i]; }

    /// Unfloored projections (a_i.v + b_i) / W.
    std::vector<double> project(std::span<const double> v) const;
    std::vector<double> project(std::span<const float> v) const;

    /// floor of project(v), rounding toward negative infinity.
    BucketId hash(std::span<const double> v) const;
    BucketId hash(std::span<const float> v) const;

private:
    HashFamilyH() = default;

    template <typename T>
    std::vector<double> project_impl(std::span<const T> v) const;

    std::size_t d_ = 0;
    std::vector<double> a_;  // row-major k x d
    std::vector<double> offsets_;
    double W_ = 1.0;
    std::uint64_t seed_ = 0;
};

/// One-dimensional p-stable hash over R^k: G(u) = floor((alpha.u + beta) / D).
class HashFunctionG {
public:
    HashFunctionG(std::vector<double> alpha, double beta, double D);

    /// Draws from the (seed, kTagOuterHash) stream.
    static HashFunctionG sample(std::size_t k, double D, std::uint64_t seed);

    std::size_t k() const noexcept { return alpha_.size(); }
    double bin_width() const noexcept { return D_; }
    double offset() const noexcept { return beta_; }
    std::span<const double> alpha() const noexcept { return alpha_; }
    std::uint64_t seed() const noexcept { return seed_; }

    MachineKey hash(std::span<const double> u) const;
    /// Bucket coordinates are converted to double exactly for |coord| < 2^53.
    MachineKey hash(const BucketId& bucket) const;

private:
    std::vector<double> alpha_;
    double beta_ = 0.0;
    double D_ = 1.0;
    std::uint64_t seed_ = 0;
};

HashFamilyH sample_h_family(const LshParams& params, std::uint64_t seed);
HashFunctionG sample_g_function(const LshParams& params, std::uint64_t seed);

/// G(H(v)).
MachineKey gh(const HashFamilyH& H, const HashFunctionG& G, std::span<const double> v);
MachineKey gh(const HashFamilyH& H, const HashFunctionG& G, std::span<const float> v);

/// Collision probability of a one-dimensional Gaussian hash with bin width B
/// for two points at distance lambda, as a function of z = B / (sqrt(2) lambda):
///
///   P(z) = erf(z) - (1 - exp(-z^2)) / (sqrt(pi) z)
///
/// Strictly increasing on (0, inf), with P(0+) = 0 and P(inf) = 1.
/// Throws DomainError for z <= 0 or NaN.
double collision_p(double z);

/// Solves collision_p(z) = xi for z, xi in (0, 1).
double collision_p_inverse(double xi);

/// ceil(ln n / ln(1 / p2)), never below 1.
std::size_t suggest_k(std::size_t n, double p2);

/// Single-row collision probabilities of the inner hash at distances r and c r.
std::pair<double, double> nominal_p1_p2(const LshParams& params);

/// Distance beyond which Pr[GH(u) = GH(v)] <= xi (up to a polynomially small
/// term): (1 + D / (z_xi sqrt(2k))) W / (1 - epsilon).
double load_balance_radius(std::size_t k, double W, double D, double xi, double epsilon = 0.1);

/// High-probability upper bound on the number of distinct outer keys per
/// query, 2 (1 + 4 / (c W)) k / D + 1, stated for offsets of radius 1/c.
double outer_key_count_bound(std::size_t k, double W, double c, double D);

}  // namespace dlsh
