// fit.cpp - floor estimate, log-log linearisation and damped Gauss-Newton refinement
#include "coherence/fit.h"

#include "coherence/errors.h"
#include "coherence/io.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace coh {

double decay_profile(double t, double t_d, double exponent, double floor) {
    if (t <= 0.0) return 1.0;
    return (1.0 - floor) * std::exp(-std::pow(t / t_d, exponent)) + floor;
}

namespace {

void check_trace(const CoherenceTrace& trace) {
    if (trace.times.empty() || trace.times.size() != trace.values.size()) {
        throw InvalidArgument("trace is empty or its columns differ in length");
    }
}

double interpolate(const CoherenceTrace& tr, std::size_t i, double t) {
    const double t0 = tr.times[i], t1 = tr.times[i + 1];
    const double f = (t - t0) / (t1 - t0);
    return tr.values[i] + f * (tr.values[i + 1] - tr.values[i]);
}

} // namespace

double estimate_floor(const CoherenceTrace& trace, double t1, double t2) {
    check_trace(trace);
    const auto& ts = trace.times;
    if (!(t1 < t2) || t1 < ts.front() || t2 > ts.back()) {
        throw InvalidArgument("floor window must satisfy t_first <= t1 < t2 <= t_last");
    }
    // segment index containing t: ts[i] <= t <= ts[i+1]
    auto segment = [&](double t) {
        auto it = std::upper_bound(ts.begin(), ts.end(), t);
        std::size_t i = static_cast<std::size_t>(it - ts.begin());
        return std::min(i == 0 ? 0 : i - 1, ts.size() - 2);
    };
    const std::size_t a = segment(t1);
    const std::size_t b = segment(t2);
    double area = 0.0;
    double prev_t = t1;
    double prev_v = interpolate(trace, a, t1);
    for (std::size_t i = a + 1; i <= b; ++i) {
        area += 0.5 * (prev_v + trace.values[i]) * (ts[i] - prev_t);
        prev_t = ts[i];
        prev_v = trace.values[i];
    }
    area += 0.5 * (prev_v + interpolate(trace, b, t2)) * (t2 - prev_t);
    return area / (t2 - t1);
}

double crude_decay_scale(const CoherenceTrace& trace) {
    check_trace(trace);
    const double threshold = std::exp(-1.0);
    for (std::size_t i = 0; i < trace.times.size(); ++i)
        if (trace.values[i] < threshold) return trace.times[i];
    return trace.times.back();
}

FloorWindow default_floor_window(const CoherenceTrace& trace, double crude_scale) {
    check_trace(trace);
    FloorWindow w{50.0 * crude_scale, 150.0 * crude_scale, false};
    const double t_end = trace.times.back();
    if (w.t2 > t_end) {
        w = FloorWindow{t_end / 3.0, t_end, true};
    }
    w.t1 = std::max(w.t1, trace.times.front());
    if (!(w.t1 < w.t2)) throw InsufficientData("trace too short for a floor window");
    return w;
}

namespace {

struct Params {
    double log_td;
    double exponent;
};

double chi_square(const CoherenceTrace& tr, double floor, const Params& p) {
    const double td = std::exp(p.log_td);
    double s = 0.0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double r = tr.values[i] - decay_profile(tr.times[i], td, p.exponent, floor);
        s += r * r;
    }
    return s;
}

/// Stage 1: regress ln(-ln y) on ln t over points inside the band.
Params linearised_estimate(const CoherenceTrace& tr, double floor, double delta) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < tr.times.size(); ++i) {
        const double t = tr.times[i];
        if (!(t > 0.0)) continue;
        const double y = (tr.values[i] - floor) / (1.0 - floor);
        if (!(y > delta && y < 1.0 - delta)) continue;
        const double x = std::log(t);
        const double v = std::log(-std::log(y));
        sx += x;
        sy += v;
        sxx += x * x;
        sxy += x * v;
        ++n;
    }
    if (n < 3) throw InsufficientData("fewer than three usable points for the decay fit");
    const double dn = static_cast<double>(n);
    const double denom = dn * sxx - sx * sx;
    if (!(denom > 0.0)) throw InsufficientData("usable points share a single time");
    const double slope = (dn * sxy - sx * sy) / denom;
    const double intercept = (sy - slope * sx) / dn;
    if (!(slope > 0.0) || !std::isfinite(slope)) throw InsufficientData("trace does not decay");
    return Params{-intercept / slope, slope};
}

} // namespace

FitResult fit_decay(const CoherenceTrace& trace, double floor, const FitOptions& options) {
    check_trace(trace);
    if (!(floor >= 0.0 && floor < 1.0)) throw InvalidArgument("floor must lie in [0, 1)");

    const Params start = linearised_estimate(trace, floor, options.delta);
    Params p = start;
    double chi = chi_square(trace, floor, p);
    double lambda = 1e-3;
    bool converged = false;
    int iter = 0;
    const auto& ts = trace.times;
    const auto& ys = trace.values;

    while (iter < options.max_iterations && !converged) {
        ++iter;
        // normal equations for residual r = xi - y in (log t_d, C)
        double a11 = 0, a12 = 0, a22 = 0, g1 = 0, g2 = 0;
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!(ts[i] > 0.0)) continue;
            const double lt = std::log(ts[i]) - p.log_td;
            const double q = std::exp(p.exponent * lt);
            const double e = std::exp(-q);
            const double r = (1.0 - floor) * e + floor - ys[i];
            const double dxi_dq = -(1.0 - floor) * e;
            const double j1 = dxi_dq * (-p.exponent * q);
            const double j2 = dxi_dq * (q * lt);
            a11 += j1 * j1;
            a12 += j1 * j2;
            a22 += j2 * j2;
            g1 += j1 * r;
            g2 += j2 * r;
        }
        bool accepted = false;
        while (!accepted) {
            const double b11 = a11 * (1.0 + lambda), b22 = a22 * (1.0 + lambda);
            const double det = b11 * b22 - a12 * a12;
            if (!(det > 0.0) || !std::isfinite(det)) {
                lambda *= 10.0;
                if (lambda > 1e16) break;
                continue;
            }
            const double d1 = -(b22 * g1 - a12 * g2) / det;
            const double d2 = -(b11 * g2 - a12 * g1) / det;
            const Params trial{p.log_td + d1, p.exponent + d2};
            const double trial_chi = trial.exponent > 0.0 ? chi_square(trace, floor, trial)
                                                          : std::numeric_limits<double>::infinity();
            if (trial_chi <= chi) {
                const bool tiny = std::abs(d1) < options.relative_step &&
                                  std::abs(d2) < options.relative_step * std::abs(trial.exponent);
                p = trial;
                chi = trial_chi;
                lambda = std::max(lambda / 10.0, 1e-12);
                accepted = true;
                if (tiny) converged = true;
            } else {
                lambda *= 10.0;
                if (lambda > 1e16) break;
            }
        }
        // no downhill step exists at any damping: p is stationary to working precision
        if (!accepted) converged = true;
    }

    FitResult out;
    out.c_floor = floor;
    out.iterations = iter;
    out.converged = converged;
    const Params final_p = converged ? p : start;
    out.t_d = std::exp(final_p.log_td);
    out.c_exponent = final_p.exponent;
    out.chi_sq = converged ? chi : chi_square(trace, floor, start);
    out.weight = out.chi_sq > 0.0 ? 1.0 / out.chi_sq : std::numeric_limits<double>::infinity();
    return out;
}

FitResult fit_trace(const CoherenceTrace& trace, const FitOptions& options) {
    const double scale = crude_decay_scale(trace);
    const FloorWindow w = default_floor_window(trace, scale);
    const double floor = std::max(0.0, estimate_floor(trace, w.t1, w.t2));
    if (floor >= 1.0 - options.delta) throw InsufficientData("trace does not decay below its floor");
    return fit_decay(trace, floor, options);
}

std::string fit_record(const FitResult& fit) {
    std::string s;
    s += "t_d=" + fmt_double(fit.t_d) + "\n";
    s += "C=" + fmt_double(fit.c_exponent) + "\n";
    s += "c=" + fmt_double(fit.c_floor) + "\n";
    s += "chi_sq=" + fmt_double(fit.chi_sq) + "\n";
    s += "weight=" + fmt_double(fit.weight) + "\n";
    s += std::string("converged=") + (fit.converged ? "1" : "0") + "\n";
    return s;
}

} // namespace coh
