// fit.h - stretched-exponential decay fits of coherence traces
#pragma once

#include "coherence/spin_model.h"

#include <string>

namespace coh {

/// Decay profile xi(t) = (1 - c) exp(-(t/t_d)^C) + c.
double decay_profile(double t, double t_d, double exponent, double floor);

struct FitResult {
    double t_d = 0.0;         ///< decoherence-time estimate, trace time units
    double c_exponent = 0.0;  ///< stretching exponent C
    double c_floor = 0.0;     ///< fluctuation level c (held fixed during the fit)
    double chi_sq = 0.0;      ///< sum of squared residuals over all grid points
    double weight = 0.0;      ///< 1 / chi_sq
    bool converged = false;
    int iterations = 0;
};

struct FitOptions {
    double delta = 1e-6;           ///< linearisation band: y in (delta, 1 - delta)
    double relative_step = 1e-10;  ///< refinement stops once both parameter steps are below this
    int max_iterations = 200;
};

/// Trapezoidal time average of the trace over [t1, t2], interpolating linearly at the ends.
double estimate_floor(const CoherenceTrace& trace, double t1, double t2);

/// First grid time where the value drops below 1/e; the final time if it never does.
double crude_decay_scale(const CoherenceTrace& trace);

struct FloorWindow {
    double t1 = 0.0;
    double t2 = 0.0;
    bool clamped = false;  ///< true when [50 s, 150 s] did not fit inside the trace
};

/// [50 s, 150 s] for crude scale s. When the trace ends earlier the window
/// becomes [t_end / 3, t_end].
FloorWindow default_floor_window(const CoherenceTrace& trace, double crude_scale);

/// Least-squares (t_d, C) with the floor c held fixed. Throws InsufficientData
/// when fewer than three points fall inside the linearisation band.
FitResult fit_decay(const CoherenceTrace& trace, double floor, const FitOptions& options = {});

/// Floor from the default window, then fit_decay.
FitResult fit_trace(const CoherenceTrace& trace, const FitOptions& options = {});

/// Flat "key=value" lines: t_d, C, c, chi_sq, weight, converged.
std::string fit_record(const FitResult& fit);

} // namespace coh
