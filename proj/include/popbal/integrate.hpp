#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

namespace popbal {

struct IntegratorConfig {
    double rtol = 1e-6;
    double atol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    bool dense_output = true;  // linear interpolation between accepted steps
    double first_step = 0;     // 0 = automatic
};

enum class OdeStatus { ok, step_underflow, non_finite };

struct OdeResult {
    OdeStatus status = OdeStatus::ok;
    double t = 0;
    std::vector<double> y;  // state at t (last good state on failure)
    std::vector<double> sample_t;
    std::vector<std::vector<double>> sample_y;
    long n_accepted = 0;
    long n_rejected = 0;
    long n_rhs = 0;
    std::string message;
};

// Called after each accepted step; may adjust the state in place (return true
// if it did, which invalidates the FSAL stage).
using PostStepFn = std::function<bool(double t, std::span<double> y)>;

namespace detail {

// Dormand-Prince 5(4) tableau.
inline constexpr double dp_c[7] = {0.0, 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9, 1.0, 1.0};
inline constexpr double dp_a[7][6] = {
    {},
    {1.0 / 5},
    {3.0 / 40, 9.0 / 40},
    {44.0 / 45, -56.0 / 15, 32.0 / 9},
    {19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729},
    {9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656},
    {35.0 / 384, 0.0, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84},
};
// b (order 5) equals the last a-row; e = b - b_hat (order 4) gives the error.
inline constexpr double dp_e[7] = {
    35.0 / 384 - 5179.0 / 57600, 0.0,
    500.0 / 1113 - 7571.0 / 16695, 125.0 / 192 - 393.0 / 640,
    -2187.0 / 6784 + 92097.0 / 339200, 11.0 / 84 - 187.0 / 2100, -1.0 / 40,
};

inline bool all_finite(std::span<const double> v) {
    for (double x : v)
        if (!std::isfinite(x)) return false;
    return true;
}

}  // namespace detail

// Adaptive explicit Runge-Kutta 5(4) with PI step control. Supports forward
// and backward time spans; local error per step is kept below
// atol + rtol*|y|. Optional sample_times (monotone in the direction of
// integration) are filled by linear interpolation between accepted steps.
template <class RHS>
OdeResult integrate(RHS&& rhs, std::span<const double> y0, double t0, double t1,
                    const IntegratorConfig& cfg = {}, std::span<const double> sample_times = {},
                    const PostStepFn& post_step = nullptr) {
    const std::size_t n = y0.size();
    const double dir = (t1 >= t0) ? 1.0 : -1.0;

    OdeResult res;
    res.t = t0;
    res.y.assign(y0.begin(), y0.end());

    std::vector<double> k[7];
    for (auto& ki : k) ki.assign(n, 0.0);
    std::vector<double> y_stage(n), y_new(n), err(n);

    auto call_rhs = [&](double t, const std::vector<double>& y, std::vector<double>& out) {
        rhs(t, y.data(), out.data());
        ++res.n_rhs;
    };

    std::size_t next_sample = 0;
    auto emit_samples_upto = [&](double t_prev, const std::vector<double>& y_prev, double t_now,
                                 const std::vector<double>& y_now) {
        while (next_sample < sample_times.size() && dir * (sample_times[next_sample] - t_now) <= 0) {
            const double ts = sample_times[next_sample];
            const double span = t_now - t_prev;
            const double theta = span == 0 ? 1.0 : (ts - t_prev) / span;
            std::vector<double> row(n);
            for (std::size_t i = 0; i < n; ++i) row[i] = y_prev[i] + theta * (y_now[i] - y_prev[i]);
            res.sample_t.push_back(ts);
            res.sample_y.push_back(std::move(row));
            ++next_sample;
        }
    };
    emit_samples_upto(t0, res.y, t0, res.y);

    if (t1 == t0) return res;

    call_rhs(t0, res.y, k[0]);

    // Initial step size: a simplified version of the standard heuristic based
    // on the magnitude of y0 and f(y0).
    double h;
    if (cfg.first_step > 0) {
        h = cfg.first_step;
    } else {
        double d0 = 0, d1 = 0;
        for (std::size_t i = 0; i < n; ++i) {
            const double sc = cfg.atol + cfg.rtol * std::abs(res.y[i]);
            d0 += (res.y[i] / sc) * (res.y[i] / sc);
            d1 += (k[0][i] / sc) * (k[0][i] / sc);
        }
        d0 = std::sqrt(d0 / n);
        d1 = std::sqrt(d1 / n);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
        h = std::min(h, 0.1 * std::abs(t1 - t0));
    }
    h = std::min(h, cfg.max_step);

    double err_prev = 1.0;
    bool fsal_valid = true;
    const double eps = std::numeric_limits<double>::epsilon();

    while (dir * (t1 - res.t) > 0) {
        bool last_step = false;
        if (h >= std::abs(t1 - res.t)) {
            h = std::abs(t1 - res.t);
            last_step = true;
        }
        const double h_min = 16.0 * eps * std::max(std::abs(res.t), std::abs(t1));
        if (h < h_min && !last_step) {
            res.status = OdeStatus::step_underflow;
            res.message = "step size underflow at t=" + std::to_string(res.t);
            return res;
        }
        const double hs = dir * h;

        if (!fsal_valid) {
            call_rhs(res.t, res.y, k[0]);
            fsal_valid = true;
        }

        for (int s = 1; s < 7; ++s) {
            for (std::size_t i = 0; i < n; ++i) {
                double acc = 0;
                for (int j = 0; j < s; ++j) acc += detail::dp_a[s][j] * k[j][i];
                y_stage[i] = res.y[i] + hs * acc;
            }
            call_rhs(res.t + detail::dp_c[s] * hs, y_stage, k[s]);
        }
        // Stage 7 was evaluated at y_new (FSAL): y_stage now holds y_new.
        y_new = y_stage;

        double err_norm = 0;
        bool finite = detail::all_finite(y_new);
        if (finite) {
            for (std::size_t i = 0; i < n; ++i) {
                double e = 0;
                for (int s = 0; s < 7; ++s) e += detail::dp_e[s] * k[s][i];
                e *= hs;
                const double sc = cfg.atol + cfg.rtol * std::max(std::abs(res.y[i]), std::abs(y_new[i]));
                err_norm += (e / sc) * (e / sc);
            }
            err_norm = std::sqrt(err_norm / n);
            finite = std::isfinite(err_norm);
        }

        if (!finite) {
            // Retry with a much smaller step; give up if it cannot shrink.
            ++res.n_rejected;
            h *= 0.1;
            fsal_valid = false;
            if (h < h_min) {
                res.status = OdeStatus::non_finite;
                res.message = "non-finite right-hand side at t=" + std::to_string(res.t);
                return res;
            }
            continue;
        }

        if (err_norm <= 1.0) {
            const double t_prev = res.t;
            std::swap(res.y, y_new);  // y_new now holds the previous state
            res.t = last_step ? t1 : t_prev + hs;
            ++res.n_accepted;
            emit_samples_upto(t_prev, y_new, res.t, res.y);

            bool modified = false;
            if (post_step) modified = post_step(res.t, std::span<double>(res.y));
            if (modified)
                fsal_valid = false;
            else
                std::swap(k[0], k[6]);  // FSAL

            // PI controller (Hairer's beta = 0.04 variant for DOPRI5).
            const double fac = 0.9 * std::pow(std::max(err_norm, 1e-10), -0.17) * std::pow(err_prev, 0.04);
            h = std::min(h * std::clamp(fac, 0.2, 10.0), cfg.max_step);
            err_prev = std::max(err_norm, 1e-10);
        } else {
            ++res.n_rejected;
            h *= std::clamp(0.9 * std::pow(err_norm, -0.2), 0.1, 0.9);
            fsal_valid = true;  // k[0] still matches res.y
        }
    }
    return res;
}

}  // namespace popbal
