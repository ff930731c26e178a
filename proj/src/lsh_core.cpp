#include "dlsh/lsh_core.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dlsh/errors.hpp"
#include "dlsh/random.hpp"

namespace dlsh {

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw ParameterError(what);
    }
}

std::int64_t floor_to_int(double x) {
    const double f = std::floor(x);
    if (!(std::abs(f) < 9.2e18)) {
        throw DomainError("projection " + std::to_string(x) + " does not fit a 64-bit bucket coordinate");
    }
    return static_cast<std::int64_t>(f);
}

}  // namespace

void LshParams::validate() const {
    require(d >= 1, "d must be >= 1");
    require(k >= 1, "k must be >= 1");
    require(W > 0 && std::isfinite(W), "W must be a positive finite number");
    require(D > 0 && std::isfinite(D), "D must be a positive finite number");
    require(r > 0 && std::isfinite(r), "r must be a positive finite number");
    require(c > 1 && std::isfinite(c), "c must be > 1");
    require(L >= 1, "L must be >= 1");
    require(n >= 1, "n must be >= 1");
}

std::size_t BucketIdHash::operator()(const BucketId& b) const noexcept {
    std::uint64_t h = 0x243f6a8885a308d3ULL ^ b.coords.size();
    for (std::int64_t c : b.coords) {
        h = mix64(h ^ static_cast<std::uint64_t>(c)) + 0x9e3779b97f4a7c15ULL;
    }
    return static_cast<std::size_t>(h);
}

// ---------------------------------------------------------------------------
// HashFamilyH

HashFamilyH::HashFamilyH(std::vector<std::vector<double>> rows, std::vector<double> offsets, double W)
    : offsets_(std::move(offsets)), W_(W) {
    require(!rows.empty(), "hash family needs at least one row");
    require(rows.size() == offsets_.size(), "row count and offset count differ");
    require(W > 0 && std::isfinite(W), "W must be a positive finite number");
    d_ = rows.front().size();
    require(d_ >= 1, "rows must be non-empty");
    a_.reserve(rows.size() * d_);
    for (const auto& row : rows) {
        require(row.size() == d_, "all rows must have the same length");
        a_.insert(a_.end(), row.begin(), row.end());
    }
}

HashFamilyH HashFamilyH::sample(std::size_t d, std::size_t k, double W, std::uint64_t seed) {
    require(d >= 1, "d must be >= 1");
    require(k >= 1, "k must be >= 1");
    require(W > 0 && std::isfinite(W), "W must be a positive finite number");
    HashFamilyH h;
    h.d_ = d;
    h.W_ = W;
    h.seed_ = seed;
    h.a_.resize(k * d);
    h.offsets_.resize(k);
    for (std::size_t i = 0; i < k; ++i) {
        CounterRng rng(derive_key(seed, {kTagInnerHash, i}));
        for (std::size_t j = 0; j < d; ++j) {
            h.a_[i * d + j] = rng.normal();
        }
        h.offsets_[i] = rng.uniform(W);
    }
    return h;
}

template <typename T>
std::vector<double> HashFamilyH::project_impl(std::span<const T> v) const {
    if (v.size() != d_) {
        throw DimensionError("vector has dimension " + std::to_string(v.size()) + ", hash family expects " +
                             std::to_string(d_));
    }
    std::vector<double> out(k());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double* a = a_.data() + i * d_;
        double dot = 0.0;
        for (std::size_t j = 0; j < d_; ++j) {
            dot += a[j] * static_cast<double>(v[j]);
        }
        out[i] = (dot + offsets_[i]) / W_;
    }
    return out;
}

std::vector<double> HashFamilyH::project(std::span<const double> v) const { return project_impl(v); }
std::vector<double> HashFamilyH::project(std::span<const float> v) const { return project_impl(v); }

namespace {
BucketId floor_all(const std::vector<double>& gamma) {
    BucketId b;
    b.coords.reserve(gamma.size());
    for (double g : gamma) {
        b.coords.push_back(floor_to_int(g));
    }
    return b;
}
}  // namespace

BucketId HashFamilyH::hash(std::span<const double> v) const { return floor_all(project(v)); }
BucketId HashFamilyH::hash(std::span<const float> v) const { return floor_all(project(v)); }

// ---------------------------------------------------------------------------
// HashFunctionG

HashFunctionG::HashFunctionG(std::vector<double> alpha, double beta, double D)
    : alpha_(std::move(alpha)), beta_(beta), D_(D) {
    require(!alpha_.empty(), "outer hash needs k >= 1");
    require(D > 0 && std::isfinite(D), "D must be a positive finite number");
}

HashFunctionG HashFunctionG::sample(std::size_t k, double D, std::uint64_t seed) {
    require(k >= 1, "k must be >= 1");
    require(D > 0 && std::isfinite(D), "D must be a positive finite number");
    CounterRng rng(derive_key(seed, {kTagOuterHash}));
    std::vector<double> alpha(k);
    for (double& x : alpha) {
        x = rng.normal();
    }
    HashFunctionG g(std::move(alpha), rng.uniform(D), D);
    g.seed_ = seed;
    return g;
}

MachineKey HashFunctionG::hash(std::span<const double> u) const {
    if (u.size() != alpha_.size()) {
        throw DimensionError("vector has dimension " + std::to_string(u.size()) + ", outer hash expects " +
                             std::to_string(alpha_.size()));
    }
    double dot = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        dot += alpha_[i] * u[i];
    }
    return MachineKey{floor_to_int((dot + beta_) / D_)};
}

MachineKey HashFunctionG::hash(const BucketId& bucket) const {
    std::vector<double> u(bucket.coords.begin(), bucket.coords.end());
    return hash(u);
}

HashFamilyH sample_h_family(const LshParams& params, std::uint64_t seed) {
    params.validate();
    return HashFamilyH::sample(params.d, params.k, params.W, seed);
}

HashFunctionG sample_g_function(const LshParams& params, std::uint64_t seed) {
    params.validate();
    return HashFunctionG::sample(params.k, params.D, seed);
}

MachineKey gh(const HashFamilyH& H, const HashFunctionG& G, std::span<const double> v) {
    return G.hash(H.hash(v));
}

MachineKey gh(const HashFamilyH& H, const HashFunctionG& G, std::span<const float> v) {
    return G.hash(H.hash(v));
}

// ---------------------------------------------------------------------------
// Probability helpers

double collision_p(double z) {
    if (!(z > 0)) {
        throw DomainError("collision_p requires z > 0");
    }
    if (std::isinf(z)) {
        return 1.0;
    }
    // -expm1 keeps 1 - exp(-z^2) accurate for small z.
    return std::erf(z) + std::expm1(-z * z) / (std::sqrt(std::numbers::pi) * z);
}

double collision_p_inverse(double xi) {
    if (!(xi > 0 && xi < 1)) {
        throw DomainError("collision_p_inverse requires xi in (0, 1)");
    }
    double lo = 0.0;
    double hi = 1.0;
    while (collision_p(hi) < xi) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1e12) {
            throw DomainError("collision_p_inverse: xi too close to 1");
        }
    }
    for (int it = 0; it < 200 && hi - lo > 1e-15 * hi; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= 0) {
            break;
        }
        (collision_p(mid) < xi ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::size_t suggest_k(std::size_t n, double p2) {
    require(n >= 2, "suggest_k requires n >= 2");
    require(p2 > 0 && p2 < 1, "suggest_k requires p2 in (0, 1)");
    const double k = std::ceil(std::log(static_cast<double>(n)) / std::log(1.0 / p2));
    return k < 1 ? 1 : static_cast<std::size_t>(k);
}

std::pair<double, double> nominal_p1_p2(const LshParams& params) {
    params.validate();
    const double p1 = collision_p(params.W / (std::numbers::sqrt2 * params.r));
    const double p2 = collision_p(params.W / (std::numbers::sqrt2 * params.c * params.r));
    return {p1, p2};
}

double load_balance_radius(std::size_t k, double W, double D, double xi, double epsilon) {
    require(k >= 1, "k must be >= 1");
    require(W > 0 && D > 0, "W and D must be positive");
    require(epsilon >= 0 && epsilon < 1, "epsilon must be in [0, 1)");
    const double z = collision_p_inverse(xi);
    return (1.0 + D / (z * std::sqrt(2.0 * static_cast<double>(k)))) * W / (1.0 - epsilon);
}

double outer_key_count_bound(std::size_t k, double W, double c, double D) {
    require(k >= 1 && W > 0 && c > 1 && D > 0, "invalid arguments to outer_key_count_bound");
    return 2.0 * (1.0 + 4.0 / (c * W)) * static_cast<double>(k) / D + 1.0;
}

}  // namespace dlsh
