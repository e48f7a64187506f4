#ifndef FVTAXIS_STEPPER_HPP
#define FVTAXIS_STEPPER_HPP

#include <functional>
#include <limits>
#include <vector>

#include "fvtaxis/field.hpp"
#include "fvtaxis/motility.hpp"

namespace fvtaxis {

/// Model constants for u_t = div((u+eps)^m phi(v) grad stuff) coupling.
struct ModelParams {
    double m = 2.0;    ///< diffusion exponent, must exceed 1
    double eps = 1e-3; ///< regularization, in [0, 1)
    int dim = 1;

    /// Degenerate-diffusion exponent strong enough for uniform-in-time bounds.
    bool boundedness_regime() const { return m > 0.5 * static_cast<double>(dim); }
};

/// Both unknowns at one time level.
struct State {
    ScalarField u;
    ScalarField v;
    double t = 0.0;
};

/// Step-size and solver knobs.
struct StepControl {
    double cfl_safety = 0.9;
    double dt_min = 1e-12;
    double dt_max = 1e-2;
    double cg_tol = 1e-10;        ///< relative residual for the implicit v solve
    int cg_max_iter_factor = 10;  ///< cap = factor * cell count
    double tol_neg_rel = 1e-10;   ///< undershoot budget, relative to sup u0
};

/// Per-accepted-step diagnostics.
struct StepRecord {
    double t = 0.0;   ///< time after the step
    double dt = 0.0;
    int cg_iterations = 0;
    int rejections = 0;
};

/// Nonlinear mobility w = (max(u,0) + eps)^m * phi(v).
/// Throws hypothesis_violation if phi(v) is not positive somewhere.
ScalarField mobility_field(const ScalarField& u, const ScalarField& v,
                           const ModelParams& p, const Motility& phi);

/// Conservative explicit update u' = u + dt * laplacian(mobility).
/// Throws step_rejected if min u' < -tol_neg (dt too large for positivity).
ScalarField step_u_explicit(const State& s, const ModelParams& p, const Motility& phi,
                            double dt, double tol_neg);

/// Backward-Euler solve of (I - dt L + dt R) v' = v with absorption
/// R = u/(1 + eps u) >= 0, by matrix-free conjugate gradients. The matrix is
/// a symmetric M-matrix, so the exact solution obeys 0 <= v' <= max v for
/// nonnegative input; the returned field is projected onto that interval to
/// strip solver-tolerance noise off the guarantee.
/// Throws solver_failure if CG misses cg_tol within the iteration cap.
ScalarField step_v_implicit(const State& s, const ModelParams& p, double dt,
                            const StepControl& ctl, int* iterations = nullptr);

/// Largest stable explicit step: cfl_safety * min_h^2 / (2 d D_max) with
/// D_max = max m (max(u,0)+eps)^(m-1) phi(v), clipped to [dt_min, dt_max].
/// Returns dt_max when D_max vanishes (eps = 0 with u == 0).
double stable_dt(const State& s, const ModelParams& p, const Motility& phi,
                 const StepControl& ctl);

using StepObserver = std::function<void(const State& before, const State& after,
                                        const StepRecord& rec)>;
using SnapshotObserver = std::function<void(const State& s)>;

/// Marches from s.t to t_end with adaptive dt: u first, then v, both from
/// time-n data. On u-undershoot the step is halved and retried; dt underflow
/// below dt_min raises solver_failure. Snapshot times are exact multiples of
/// dt_out (dt is capped to land on them); on_snapshot also fires at the
/// initial state and at t_end. Returns the final state.
State advance(State s, const ModelParams& p, const Motility& phi,
              const StepControl& ctl, double t_end, double dt_out,
              const StepObserver& on_step = {},
              const SnapshotObserver& on_snapshot = {});

/// Snapshot sequence from advance(), spacing dt_out, first entry at the
/// initial time, last entry at t_end.
struct Trajectory {
    std::vector<State> snaps;
    double dt_out = 0.0;

    const State& front() const { return snaps.front(); }
    const State& back() const { return snaps.back(); }
};

/// advance() variant that collects the snapshots.
Trajectory advance_collect(State s, const ModelParams& p, const Motility& phi,
                           const StepControl& ctl, double t_end, double dt_out,
                           const StepObserver& on_step = {});

}  // namespace fvtaxis

#endif
