#pragma once

// One-hidden-layer tanh regression network with analytic backprop and
// full-batch gradient descent.
//
// Training internals: inputs and targets are z-scored with statistics taken
// from the first training split a model ever sees (fit_norm below). The
// statistics live inside the model record and are never refit once set, so a
// model fine-tuned on a later task keeps the parameter space it was born in;
// predictions are mapped back to the original scale through the same record.
//
// Parameter vector layout everywhere (gradients, snapshots):
//   w1[0..h-1], b1[0..h-1], w2[0..h-1], b2

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "contrail/environment.hpp"
#include "contrail/errors.hpp"
#include "contrail/rng.hpp"

namespace contrail {

enum class Activation { tanh };

inline const char* activation_name(Activation a) {
    (void)a;
    return "tanh";
}

/// z-score statistics captured from a training split. Identity until fitted.
struct Standardizer {
    bool fitted = false;
    double x_mean = 0.0, x_std = 1.0;
    double y_mean = 0.0, y_std = 1.0;

    double to_x(double x) const { return (x - x_mean) / x_std; }
    double from_y(double y) const { return y_mean + y_std * y; }
    double to_y(double y) const { return (y - y_mean) / y_std; }
};

inline Standardizer fit_standardizer(const Sample& s) {
    Standardizer n;
    n.fitted = true;
    double sx = 0.0, sy = 0.0;
    for (const Point& p : s.points) {
        sx += p.x;
        sy += p.y;
    }
    const double m = static_cast<double>(s.size());
    n.x_mean = sx / m;
    n.y_mean = sy / m;
    double vx = 0.0, vy = 0.0;
    for (const Point& p : s.points) {
        vx += (p.x - n.x_mean) * (p.x - n.x_mean);
        vy += (p.y - n.y_mean) * (p.y - n.y_mean);
    }
    n.x_std = std::sqrt(vx / m);
    n.y_std = std::sqrt(vy / m);
    if (n.x_std < 1e-12) n.x_std = 1.0;
    if (n.y_std < 1e-12) n.y_std = 1.0;
    return n;
}

struct MlpModel {
    int hidden_units = 10;
    std::vector<double> w1;
    std::vector<double> b1;
    std::vector<double> w2;
    double b2 = 0.0;
    Activation activation = Activation::tanh;
    long epochs_trained = 0;
    bool converged = false;
    Standardizer norm;
};

inline std::size_t param_count(const MlpModel& m) {
    return 3 * static_cast<std::size_t>(m.hidden_units) + 1;
}

inline std::vector<double> get_params(const MlpModel& m) {
    std::vector<double> p;
    p.reserve(param_count(m));
    p.insert(p.end(), m.w1.begin(), m.w1.end());
    p.insert(p.end(), m.b1.begin(), m.b1.end());
    p.insert(p.end(), m.w2.begin(), m.w2.end());
    p.push_back(m.b2);
    return p;
}

inline void set_params(MlpModel& m, const std::vector<double>& p) {
    const auto h = static_cast<std::size_t>(m.hidden_units);
    if (p.size() != 3 * h + 1)
        throw ValidationError("set_params: parameter vector size mismatch");
    std::copy(p.begin(), p.begin() + h, m.w1.begin());
    std::copy(p.begin() + h, p.begin() + 2 * h, m.b1.begin());
    std::copy(p.begin() + 2 * h, p.begin() + 3 * h, m.w2.begin());
    m.b2 = p.back();
}

inline void validate(const MlpModel& m) {
    const auto h = static_cast<std::size_t>(m.hidden_units);
    if (m.hidden_units < 1 || m.w1.size() != h || m.b1.size() != h || m.w2.size() != h)
        throw ValidationError("MlpModel has inconsistent shapes");
    for (const double* v : {&m.b2, &m.norm.x_mean, &m.norm.x_std, &m.norm.y_mean, &m.norm.y_std})
        if (!std::isfinite(*v)) throw ValidationError("MlpModel has non-finite values");
    for (std::size_t j = 0; j < h; ++j)
        if (!std::isfinite(m.w1[j]) || !std::isfinite(m.b1[j]) || !std::isfinite(m.w2[j]))
            throw ValidationError("MlpModel has non-finite parameters");
}

/// Fresh model: weights uniform on [-1/sqrt(fan_in), +1/sqrt(fan_in)]
/// (fan_in 1 for the hidden layer, hidden_units for the output layer),
/// biases zero. Draw order: w1[0..h-1] then w2[0..h-1].
inline MlpModel init_model(int hidden_units, std::uint64_t seed) {
    if (hidden_units < 1) throw ValidationError("init_model: hidden_units must be >= 1");
    MlpModel m;
    m.hidden_units = hidden_units;
    const auto h = static_cast<std::size_t>(hidden_units);
    m.w1.resize(h);
    m.b1.assign(h, 0.0);
    m.w2.resize(h);
    Rng rng(seed);
    for (std::size_t j = 0; j < h; ++j) m.w1[j] = rng.uniform(-1.0, 1.0);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hidden_units));
    for (std::size_t j = 0; j < h; ++j) m.w2[j] = rng.uniform(-bound, bound);
    return m;
}

/// Raw network map: w2 . tanh(w1*x + b1) + b2. No standardization.
inline double forward(const MlpModel& m, double x) {
    double out = m.b2;
    for (std::size_t j = 0; j < m.w1.size(); ++j)
        out += m.w2[j] * std::tanh(m.w1[j] * x + m.b1[j]);
    return out;
}

/// Prediction on the original data scale, routed through the model's
/// standardization record.
inline double predict(const MlpModel& m, double x) {
    if (!m.norm.fitted) return forward(m, x);
    return m.norm.from_y(forward(m, m.norm.to_x(x)));
}

inline double mse_loss(const MlpModel& m, const Sample& s) {
    if (s.empty()) throw ValidationError("mse_loss: empty sample");
    double acc = 0.0;
    for (const Point& p : s.points) {
        const double r = forward(m, p.x) - p.y;
        acc += r * r;
    }
    return acc / static_cast<double>(s.size());
}

namespace detail {

/// Fused loss + gradient of mse_loss at the current parameters.
/// grad uses the flat layout documented at the top of this header.
inline double loss_and_grad(const MlpModel& m, const std::vector<double>& xs,
                            const std::vector<double>& ys, std::vector<double>& grad,
                            std::vector<double>& act_scratch) {
    const auto h = static_cast<std::size_t>(m.hidden_units);
    grad.assign(3 * h + 1, 0.0);
    act_scratch.resize(h);
    const std::size_t n = xs.size();
    double loss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = xs[i];
        double pred = m.b2;
        for (std::size_t j = 0; j < h; ++j) {
            const double a = std::tanh(m.w1[j] * x + m.b1[j]);
            act_scratch[j] = a;
            pred += m.w2[j] * a;
        }
        const double r = pred - ys[i];
        loss += r * r;
        for (std::size_t j = 0; j < h; ++j) {
            const double a = act_scratch[j];
            const double t = r * m.w2[j] * (1.0 - a * a);
            grad[j] += t * x;            // w1
            grad[h + j] += t;            // b1
            grad[2 * h + j] += r * a;    // w2
        }
        grad[3 * h] += r;                // b2
    }
    const double scale = 2.0 / static_cast<double>(n);
    for (double& g : grad) g *= scale;
    return loss / static_cast<double>(n);
}

} // namespace detail

/// Analytic gradient of mse_loss w.r.t. every parameter, on the sample as
/// given (no standardization).
inline std::vector<double> gradient(const MlpModel& m, const Sample& s) {
    if (s.empty()) throw ValidationError("gradient: empty sample");
    std::vector<double> xs(s.size()), ys(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        xs[i] = s.points[i].x;
        ys[i] = s.points[i].y;
    }
    std::vector<double> grad, scratch;
    detail::loss_and_grad(m, xs, ys, grad, scratch);
    return grad;
}

/// Central-difference gradient, (L(p+step) - L(p-step)) / (2 step) per
/// parameter. Test oracle for the analytic path.
inline std::vector<double> numeric_gradient(const MlpModel& m, const Sample& s, double step) {
    if (!(step > 0.0)) throw ValidationError("numeric_gradient: step must be > 0");
    MlpModel probe = m;
    std::vector<double> p = get_params(m);
    std::vector<double> g(p.size());
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double orig = p[k];
        p[k] = orig + step;
        set_params(probe, p);
        const double up = mse_loss(probe, s);
        p[k] = orig - step;
        set_params(probe, p);
        const double dn = mse_loss(probe, s);
        p[k] = orig;
        g[k] = (up - dn) / (2.0 * step);
    }
    return g;
}

enum class TrainMode { full, partial };

struct TrainConfig {
    double learning_rate = 0.1;
    long max_epochs = 100000;
    double convergence_tol = 1e-8;      // relative training-loss improvement
    int convergence_patience = 40;      // consecutive epochs below tol
    double partial_fraction = 0.001;    // of the full run's epoch count
    double hidden_lr_factor = 0.0;      // scales the w1/b1 learning rate only
    double aux_hidden_lr_factor = 0.03; // same, for joint auxiliary training
    std::uint64_t seed = 0;
};

inline void validate(const TrainConfig& c) {
    if (!(c.learning_rate > 0.0)) throw ValidationError("TrainConfig: learning_rate must be > 0");
    if (c.max_epochs < 1) throw ValidationError("TrainConfig: max_epochs must be >= 1");
    if (!(c.convergence_tol > 0.0)) throw ValidationError("TrainConfig: convergence_tol must be > 0");
    if (c.convergence_patience < 1) throw ValidationError("TrainConfig: convergence_patience must be >= 1");
    if (!(c.partial_fraction > 0.0 && c.partial_fraction <= 1.0))
        throw ValidationError("TrainConfig: partial_fraction must lie in (0,1]");
    if (!(c.hidden_lr_factor >= 0.0 && c.hidden_lr_factor <= 1.0))
        throw ValidationError("TrainConfig: hidden_lr_factor must lie in [0,1]");
    if (!(c.aux_hidden_lr_factor >= 0.0 && c.aux_hidden_lr_factor <= 1.0))
        throw ValidationError("TrainConfig: aux_hidden_lr_factor must lie in [0,1]");
}

namespace detail {

struct GdResult {
    long steps = 0;
    bool converged = false;
};

/// Plain full-batch gradient descent on (xs, ys). Stops after max_steps, or
/// as soon as the relative loss improvement stays below tol for `patience`
/// consecutive steps (only when check_convergence is set).
inline GdResult run_gd(MlpModel& m, const std::vector<double>& xs, const std::vector<double>& ys,
                       const TrainConfig& cfg, long max_steps, bool check_convergence) {
    const auto h = static_cast<std::size_t>(m.hidden_units);
    std::vector<double> grad, scratch;
    double prev = detail::loss_and_grad(m, xs, ys, grad, scratch);
    if (!std::isfinite(prev)) throw TrainingError("non-finite loss before training", 0);

    const double lr_out = cfg.learning_rate;
    const double lr_hid = cfg.learning_rate * cfg.hidden_lr_factor;

    GdResult res;
    int streak = 0;
    while (res.steps < max_steps) {
        for (std::size_t j = 0; j < h; ++j) {
            m.w1[j] -= lr_hid * grad[j];
            m.b1[j] -= lr_hid * grad[h + j];
            m.w2[j] -= lr_out * grad[2 * h + j];
        }
        m.b2 -= lr_out * grad[3 * h];
        ++res.steps;

        const double cur = detail::loss_and_grad(m, xs, ys, grad, scratch);
        if (!std::isfinite(cur))
            throw TrainingError("training diverged (non-finite loss)", res.steps);
        if (check_convergence) {
            const double rel = (prev - cur) / std::max(std::abs(prev), 1e-300);
            if (rel < cfg.convergence_tol) {
                if (++streak >= cfg.convergence_patience) {
                    res.converged = true;
                    break;
                }
            } else {
                streak = 0;
            }
        }
        prev = cur;
    }
    return res;
}

} // namespace detail

/// Full-batch gradient descent on s. Full mode runs until the convergence
/// criterion fires (converged=true) or max_epochs is exhausted. Partial mode
/// first measures E*, the epoch count of a full run from the same start, then
/// trains a fresh copy for ceil(partial_fraction * E*) epochs with
/// converged=false (rule id "fraction_of_full_epochs" in run_config.txt).
/// Standardization statistics are fitted from s on a model's first training
/// and reused verbatim afterwards.
inline MlpModel train(const MlpModel& model, const Sample& s, const TrainConfig& cfg,
                      TrainMode mode) {
    validate(cfg);
    validate(model);
    if (s.empty()) throw ValidationError("train: empty sample");

    MlpModel out = model;
    if (!out.norm.fitted) out.norm = fit_standardizer(s);

    std::vector<double> xs(s.size()), ys(s.size());
    for (std::size_t i = 0; i < s.size(); ++i) {
        xs[i] = out.norm.to_x(s.points[i].x);
        ys[i] = out.norm.to_y(s.points[i].y);
    }

    if (mode == TrainMode::full) {
        const auto res = detail::run_gd(out, xs, ys, cfg, cfg.max_epochs, true);
        out.epochs_trained += res.steps;
        out.converged = res.converged;
        return out;
    }

    MlpModel probe = out;
    const auto full = detail::run_gd(probe, xs, ys, cfg, cfg.max_epochs, true);
    const long budget = static_cast<long>(
        std::ceil(cfg.partial_fraction * static_cast<double>(full.steps)));
    const auto res = detail::run_gd(out, xs, ys, cfg, std::max<long>(budget, 1), false);
    out.epochs_trained += res.steps;
    out.converged = false;
    return out;
}

struct EvalReport {
    double r2 = 0.0;
    double mse = 0.0;
    int n_points = 0;
};

/// Coefficient of determination on the original data scale.
inline EvalReport r_squared(const MlpModel& m, const Sample& s) {
    if (s.size() < 2) throw ValidationError("r_squared: need at least 2 points");
    double mean = 0.0;
    for (const Point& p : s.points) mean += p.y;
    mean /= static_cast<double>(s.size());
    double ss_res = 0.0, ss_tot = 0.0;
    for (const Point& p : s.points) {
        const double r = p.y - predict(m, p.x);
        ss_res += r * r;
        ss_tot += (p.y - mean) * (p.y - mean);
    }
    if (ss_tot == 0.0) throw ValidationError("r_squared: zero target variance");
    return {1.0 - ss_res / ss_tot, ss_res / static_cast<double>(s.size()),
            static_cast<int>(s.size())};
}

// ---------------------------------------------------------------------------
// Snapshot format: `contrail-model v1`, activation, hidden_units, the
// standardization record (fitted flag + 4 statistics), then parameters in
// flat layout order. One value per line, 17 significant digits.
// ---------------------------------------------------------------------------

inline void save_model(const MlpModel& m, std::ostream& out) {
    validate(m);
    char buf[64];
    auto put = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g\n", v);
        out << buf;
    };
    out << "contrail-model v1\n";
    out << activation_name(m.activation) << "\n";
    out << m.hidden_units << "\n";
    out << (m.norm.fitted ? 1 : 0) << "\n";
    put(m.norm.x_mean);
    put(m.norm.x_std);
    put(m.norm.y_mean);
    put(m.norm.y_std);
    for (double v : m.w1) put(v);
    for (double v : m.b1) put(v);
    for (double v : m.w2) put(v);
    put(m.b2);
}

inline std::string model_to_string(const MlpModel& m) {
    std::ostringstream os;
    save_model(m, os);
    return os.str();
}

inline MlpModel load_model(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "contrail-model v1")
        throw IoError("model snapshot: bad header '" + line + "'");
    if (!std::getline(in, line) || line != "tanh")
        throw IoError("model snapshot: unknown activation '" + line + "'");

    auto next_value = [&](const char* what) -> double {
        if (!std::getline(in, line)) throw IoError(std::string("model snapshot: missing ") + what);
        try {
            return std::stod(line);
        } catch (const std::exception&) {
            throw IoError(std::string("model snapshot: bad value for ") + what);
        }
    };

    MlpModel m;
    const int h = static_cast<int>(next_value("hidden_units"));
    if (h < 1) throw IoError("model snapshot: hidden_units < 1");
    m.hidden_units = h;
    m.norm.fitted = next_value("norm flag") != 0.0;
    m.norm.x_mean = next_value("x_mean");
    m.norm.x_std = next_value("x_std");
    m.norm.y_mean = next_value("y_mean");
    m.norm.y_std = next_value("y_std");
    m.w1.resize(h);
    m.b1.resize(h);
    m.w2.resize(h);
    for (double& v : m.w1) v = next_value("w1");
    for (double& v : m.b1) v = next_value("b1");
    for (double& v : m.w2) v = next_value("w2");
    m.b2 = next_value("b2");
    validate(m);
    return m;
}

} // namespace contrail
