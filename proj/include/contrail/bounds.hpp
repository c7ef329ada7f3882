#pragma once

// Closed-form sample-complexity and error-gap bounds.
//
// All logarithms are natural logarithms; every rendered report carries a
// `log_base = natural` line. Sample-size and task-count bounds report the
// exact real value plus its integer ceiling (floored at 1); comparisons in
// tests use the real value.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "contrail/errors.hpp"

namespace contrail {

/// User-supplied log-capacity handle: (epsilon, n) -> log C >= 0.
using CapacityLog = std::function<double(double eps, long n)>;

inline CapacityLog capacity_constant(double k) {
    return [k](double, long) { return k; };
}
inline CapacityLog capacity_linear(double k) {
    return [k](double, long n) { return k * static_cast<double>(n); };
}
inline CapacityLog capacity_sqrt(double k) {
    return [k](double, long n) { return k * std::sqrt(static_cast<double>(n)); };
}

struct BoundReport {
    std::string name;
    double value = 0.0;
    long long ceiling = 0;
    std::vector<std::pair<std::string, double>> params; // inputs echo
};

namespace detail {

inline void check_eps(const char* what, double v) {
    if (!(v > 0.0) || !std::isfinite(v))
        throw ValidationError(std::string(what) + " must be a positive finite real");
}

inline void check_delta(double v) {
    if (!(v > 0.0 && v < 1.0))
        throw ValidationError("delta must lie in (0,1)");
}

inline void check_dim(const char* what, double v) {
    if (!(v >= 0.0) || !std::isfinite(v))
        throw ValidationError(std::string(what) + " must be a finite real >= 0");
}

inline double capacity_value(const CapacityLog& cap, double eps, long n) {
    const double c = cap(eps, n);
    if (!(c >= 0.0) || !std::isfinite(c))
        throw ValidationError("capacity_log returned a negative or non-finite value");
    return c;
}

inline BoundReport make_report(std::string name, double value, bool size_bound,
                               std::vector<std::pair<std::string, double>> params) {
    BoundReport r;
    r.name = std::move(name);
    r.value = value;
    r.ceiling = static_cast<long long>(std::ceil(value));
    if (size_bound) r.ceiling = std::max<long long>(r.ceiling, 1);
    r.params = std::move(params);
    std::sort(r.params.begin(), r.params.end());
    return r;
}

} // namespace detail

/// |S(t)| >= 64/eps1^2 * (2 d_max ln(12/eps1) + ln(8/delta))
inline BoundReport min_target_sample(double eps1, double delta, double d_max) {
    detail::check_eps("eps1", eps1);
    detail::check_delta(delta);
    detail::check_dim("d_max", d_max);
    const double v =
        64.0 / (eps1 * eps1) * (2.0 * d_max * std::log(12.0 / eps1) + std::log(8.0 / delta));
    return detail::make_report("min_target_sample", v, true,
                               {{"eps1", eps1}, {"delta", delta}, {"d_max", d_max}});
}

/// |S(s)_i| >= 88/eps2^2 * (2 d_H(n) ln(22/eps2) + 1/2 ln(8/delta))
inline BoundReport min_source_sample(double eps2, double delta, double d_H_n) {
    detail::check_eps("eps2", eps2);
    detail::check_delta(delta);
    detail::check_dim("d_H_n", d_H_n);
    const double v = 88.0 / (eps2 * eps2) *
                     (2.0 * d_H_n * std::log(22.0 / eps2) + 0.5 * std::log(8.0 / delta));
    return detail::make_report("min_source_sample", v, true,
                               {{"eps2", eps2}, {"delta", delta}, {"d_H_n", d_H_n}});
}

/// |S| scaling with the number of tasks: (1/n) * log-capacity(eps, n).
/// Decreases with n exactly when the capacity grows sublinearly.
inline BoundReport examples_per_task_scaling(long n, double eps, const CapacityLog& capacity_log) {
    if (n < 1) throw ValidationError("examples_per_task_scaling: n must be >= 1");
    detail::check_eps("eps", eps);
    const double c = detail::capacity_value(capacity_log, eps, n);
    const double v = c / static_cast<double>(n);
    return detail::make_report("examples_per_task_scaling", v, true,
                               {{"n", static_cast<double>(n)}, {"eps", eps}, {"capacity_log", c}});
}

/// Error-gap term for task i of n: (i-1) eps_f + (n-i) eps_b.
inline BoundReport per_task_transfer_gap(long i, long n, double eps_f, double eps_b) {
    if (n < 1) throw ValidationError("per_task_transfer_gap: n must be >= 1");
    if (i < 1 || i > n) throw ValidationError("per_task_transfer_gap: need 1 <= i <= n");
    detail::check_eps("eps_f", eps_f);
    detail::check_eps("eps_b", eps_b);
    const double v = static_cast<double>(i - 1) * eps_f + static_cast<double>(n - i) * eps_b;
    return detail::make_report("per_task_transfer_gap", v, false,
                               {{"i", static_cast<double>(i)},
                                {"n", static_cast<double>(n)},
                                {"eps_f", eps_f},
                                {"eps_b", eps_b}});
}

/// The two printed readings of the continual-learner epsilon disagree; both
/// are evaluated and labeled, no guess is made about intent.
enum class EpsilonVariant {
    as_eq35,        // (n(n-1)/2) eps_f + n(n-1) eps_b, the literal sum
    as_eq31_summed, // (n(n-1)/2) (eps_f + eps_b), summing the per-task gap
};

inline const char* epsilon_variant_name(EpsilonVariant v) {
    return v == EpsilonVariant::as_eq35 ? "as_eq35" : "as_eq31_summed";
}

inline BoundReport continual_epsilon(long n, double eps_f, double eps_b, EpsilonVariant variant) {
    if (n < 1) throw ValidationError("continual_epsilon: n must be >= 1");
    detail::check_eps("eps_f", eps_f);
    detail::check_eps("eps_b", eps_b);
    const double nn = static_cast<double>(n);
    const double pairs = nn * (nn - 1.0) / 2.0;
    const double v = variant == EpsilonVariant::as_eq35
                         ? pairs * eps_f + nn * (nn - 1.0) * eps_b
                         : pairs * (eps_f + eps_b);
    return detail::make_report(std::string("continual_epsilon.") + epsilon_variant_name(variant),
                               v, false,
                               {{"n", nn}, {"eps_f", eps_f}, {"eps_b", eps_b}});
}

/// n >= max( 256/eps^2 * ln(8 C(eps/32, H*) / delta), 64/eps^2 ), capacity
/// supplied in log form so the first term is ln 8 + log-capacity - ln delta.
inline BoundReport min_tasks(double eps, double delta, const CapacityLog& capacity_log_star) {
    detail::check_eps("eps", eps);
    detail::check_delta(delta);
    const double c = detail::capacity_value(capacity_log_star, eps / 32.0, 1);
    const double first = 256.0 / (eps * eps) * (std::log(8.0) + c - std::log(delta));
    const double second = 64.0 / (eps * eps);
    return detail::make_report("min_tasks", std::max(first, second), true,
                               {{"eps", eps}, {"delta", delta}, {"capacity_log", c}});
}

/// |S_i| >= max( 256/(n eps^2) * ln(8 C(eps/32, H_l^n) / delta), 64/eps^2 ).
inline BoundReport min_examples_theorem3(long n, double eps, double delta,
                                         const CapacityLog& capacity_log_n) {
    if (n < 1) throw ValidationError("min_examples_theorem3: n must be >= 1");
    detail::check_eps("eps", eps);
    detail::check_delta(delta);
    const double c = detail::capacity_value(capacity_log_n, eps / 32.0, n);
    const double first = 256.0 / (static_cast<double>(n) * eps * eps) *
                         (std::log(8.0) + c - std::log(delta));
    const double second = 64.0 / (eps * eps);
    return detail::make_report("min_examples_theorem3", std::max(first, second), true,
                               {{"n", static_cast<double>(n)},
                                {"eps", eps},
                                {"delta", delta},
                                {"capacity_log", c}});
}

/// Generalization gap sqrt(32/m * (d ln(2 eps m / d) + ln(2/delta))).
/// Requires 2 eps m / d > 1 so the log term stays nonnegative.
inline BoundReport generalization_gap(long m, double d, double eps, double delta) {
    if (m < 1) throw ValidationError("generalization_gap: m must be >= 1");
    if (!(d > 0.0)) throw ValidationError("generalization_gap: d must be > 0");
    detail::check_eps("eps", eps);
    detail::check_delta(delta);
    const double log_arg = 2.0 * eps * static_cast<double>(m) / d;
    if (!(log_arg > 1.0))
        throw DomainError("generalization_gap: guard 2*eps*m/d > 1 violated");
    const double v = std::sqrt(32.0 / static_cast<double>(m) *
                               (d * std::log(log_arg) + std::log(2.0 / delta)));
    return detail::make_report("generalization_gap", v, false,
                               {{"m", static_cast<double>(m)},
                                {"d", d},
                                {"eps", eps},
                                {"delta", delta}});
}

// ---------------------------------------------------------------------------
// Rendering
// ---------------------------------------------------------------------------

inline std::string format_float(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string render_bound_text(const BoundReport& r) {
    std::ostringstream os;
    os << "bound = " << r.name << "\n";
    os << "value = " << format_float(r.value) << "\n";
    os << "ceiling = " << r.ceiling << "\n";
    os << "log_base = natural\n";
    for (const auto& [k, v] : r.params) os << "param." << k << " = " << format_float(v) << "\n";
    return os.str();
}

/// CSV row `bound,value,ceiling,params` with params as a sorted `k=v;` list.
inline std::string render_bound_csv(const BoundReport& r) {
    std::ostringstream os;
    os << r.name << "," << format_float(r.value) << "," << r.ceiling << ",";
    for (const auto& [k, v] : r.params) os << k << "=" << format_float(v) << ";";
    os << "\n";
    return os.str();
}

} // namespace contrail
