#pragma once

// Task environment: synthetic generating functions, Gaussian label noise,
// deterministic sampling and train/test splitting, plus the affine
// transformation family that defines relatedness between tasks.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include "contrail/errors.hpp"
#include "contrail/rng.hpp"

namespace contrail {

// ---------------------------------------------------------------------------
// Generating functions
// ---------------------------------------------------------------------------

enum class FunctionKind { linear, quadratic };

/// True labeling rule of one task: a*x + b, or x^2 (a and b ignored).
struct FunctionSpec {
    FunctionKind kind = FunctionKind::linear;
    double a = 1.0;
    double b = 0.0;

    double operator()(double x) const {
        return kind == FunctionKind::linear ? a * x + b : x * x;
    }

    static FunctionSpec linear(double a, double b) { return {FunctionKind::linear, a, b}; }
    static FunctionSpec quadratic() { return {FunctionKind::quadratic, 0.0, 0.0}; }
};

inline void validate(const FunctionSpec& f) {
    if (f.kind == FunctionKind::linear && (!std::isfinite(f.a) || f.a == 0.0))
        throw ValidationError("linear FunctionSpec requires finite nonzero slope");
    if (!std::isfinite(f.b))
        throw ValidationError("FunctionSpec intercept must be finite");
}

struct NoiseModel {
    double mean = 0.0;
    double std = 0.0;
    bool enabled = false;
};

inline void validate(const NoiseModel& n) {
    if (!(n.std >= 0.0) || !std::isfinite(n.std) || !std::isfinite(n.mean))
        throw ValidationError("NoiseModel requires finite mean and std >= 0");
}

struct TaskSpec {
    std::string id;
    FunctionSpec function;
    NoiseModel noise;
    double domain_lo = 0.0;
    double domain_hi = 1.0;
    int sample_size = 2;
};

inline void validate(const TaskSpec& t) {
    validate(t.function);
    validate(t.noise);
    if (!(t.domain_lo < t.domain_hi))
        throw ValidationError("TaskSpec domain is empty: " + t.id);
    if (t.sample_size < 2)
        throw ValidationError("TaskSpec sample_size must be >= 2: " + t.id);
}

// ---------------------------------------------------------------------------
// Samples
// ---------------------------------------------------------------------------

struct Point {
    double x;
    double y;
};

struct Sample {
    std::vector<Point> points;
    std::uint64_t seed = 0;
    std::string source_task;

    std::size_t size() const { return points.size(); }
    bool empty() const { return points.empty(); }
};

/// Draw spec.sample_size labeled points: x uniform on [domain_lo, domain_hi),
/// y = f(x) plus Gaussian noise when enabled. Per point the draw order is
/// fixed (x first, then the noise term), so identical (spec, seed) inputs
/// give bit-identical samples.
inline Sample generate_sample(const TaskSpec& spec, std::uint64_t seed) {
    validate(spec);
    Rng rng(seed);
    Sample s;
    s.seed = seed;
    s.source_task = spec.id;
    s.points.reserve(static_cast<std::size_t>(spec.sample_size));
    for (int i = 0; i < spec.sample_size; ++i) {
        const double x = rng.uniform(spec.domain_lo, spec.domain_hi);
        double y = spec.function(x);
        if (spec.noise.enabled) y += rng.gaussian(spec.noise.mean, spec.noise.std);
        s.points.push_back({x, y});
    }
    return s;
}

/// Disjoint shuffled partition; |train| = round-half-up(train_fraction * |s|).
/// Fisher-Yates with Rng::below keeps the permutation platform-stable.
inline std::pair<Sample, Sample> split_sample(const Sample& s, double train_fraction,
                                              std::uint64_t seed) {
    if (s.empty()) throw ValidationError("split_sample: empty sample");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw ValidationError("split_sample: train_fraction must lie in (0,1)");

    const std::size_t n = s.size();
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    Rng rng(seed);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t j = static_cast<std::size_t>(rng.below(i + 1));
        std::swap(order[i], order[j]);
    }

    const auto n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(n) + 0.5));

    Sample train{{}, seed, s.source_task};
    Sample test{{}, seed, s.source_task};
    train.points.reserve(n_train);
    test.points.reserve(n - n_train);
    for (std::size_t i = 0; i < n; ++i)
        (i < n_train ? train : test).points.push_back(s.points[order[i]]);
    return {std::move(train), std::move(test)};
}

/// CSV with header `x,y`, one point per row, 17 significant digits.
inline void write_sample_csv(const Sample& s, std::ostream& out) {
    out << "x,y\n";
    char buf[80];
    for (const Point& p : s.points) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", p.x, p.y);
        out << buf;
    }
}

// ---------------------------------------------------------------------------
// Affine transformation family F
// ---------------------------------------------------------------------------

/// x -> scale * x + shift, scale != 0. Closed under composition and
/// inverses, so the family acts as a group on inputs.
struct AffineTransform {
    double scale = 1.0;
    double shift = 0.0;

    double operator()(double x) const { return scale * x + shift; }

    static AffineTransform identity() { return {1.0, 0.0}; }
};

inline void validate(const AffineTransform& f) {
    if (f.scale == 0.0 || !std::isfinite(f.scale) || !std::isfinite(f.shift))
        throw ValidationError("AffineTransform requires finite scale != 0");
}

/// h with h(x) = f(g(x)).
inline AffineTransform compose(const AffineTransform& f, const AffineTransform& g) {
    return {f.scale * g.scale, f.scale * g.shift + f.shift};
}

inline AffineTransform invert(const AffineTransform& f) {
    validate(f);
    return {1.0 / f.scale, -f.shift / f.scale};
}

/// Input transform t with target(x) = source(t(x)), when one exists in the
/// affine family. Absent for any pair involving the quadratic task: no
/// affine re-parametrisation of the input maps a line onto x^2 over a
/// nondegenerate interval.
inline std::optional<AffineTransform> relating_transform(const FunctionSpec& source,
                                                         const FunctionSpec& target) {
    validate(source);
    validate(target);
    if (source.kind != FunctionKind::linear || target.kind != FunctionKind::linear)
        return std::nullopt;
    return AffineTransform{target.a / source.a, (target.b - source.b) / source.a};
}

} // namespace contrail
