#include "fvtaxis/stepper.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <utility>

#include "fvtaxis/errors.hpp"

namespace fvtaxis {

namespace {

double powr(double x, double e) {
    if (e == 0.0) return 1.0;
    if (e == 1.0) return x;
    if (e == 2.0) return x * x;
    if (e == 3.0) return x * x * x;
    return std::pow(x, e);
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", x);
    return buf;
}

double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

void require_pair(const State& s, const char* where) {
    if (!(s.u.grid() == s.v.grid()))
        throw std::invalid_argument(std::string(where) + ": u and v live on different grids");
}

}  // namespace

ScalarField mobility_field(const ScalarField& u, const ScalarField& v,
                           const ModelParams& p, const Motility& phi) {
    if (!(u.grid() == v.grid()))
        throw std::invalid_argument("mobility_field: u and v live on different grids");
    ScalarField w(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double phiv = phi(v[i]);
        if (!(phiv > 0.0) || !std::isfinite(phiv))
            throw hypothesis_violation("motility '" + phi.name() + "' is not positive at v = " +
                                       fmt(v[i]) + " (value " + fmt(phiv) + ")");
        w[i] = powr(std::max(u[i], 0.0) + p.eps, p.m) * phiv;
    }
    return w;
}

ScalarField step_u_explicit(const State& s, const ModelParams& p, const Motility& phi,
                            double dt, double tol_neg) {
    require_pair(s, "step_u_explicit");
    if (!(dt > 0.0)) throw std::invalid_argument("step_u_explicit: dt must be positive");
    ScalarField w = mobility_field(s.u, s.v, p, phi);
    ScalarField lw(s.u.grid());
    laplacian_noflux(w, lw);
    ScalarField out(s.u.grid());
    double lowest = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = s.u[i] + dt * lw[i];
        lowest = std::min(lowest, out[i]);
    }
    if (lowest < -tol_neg) throw step_rejected(lowest, dt);
    return out;
}

ScalarField step_v_implicit(const State& s, const ModelParams& p, double dt,
                            const StepControl& ctl, int* iterations) {
    require_pair(s, "step_v_implicit");
    if (!(dt > 0.0)) throw std::invalid_argument("step_v_implicit: dt must be positive");
    const Grid& g = s.v.grid();
    if (iterations) *iterations = 0;

    std::vector<double> absorb(g.cells);
    for (std::size_t i = 0; i < g.cells; ++i) {
        const double ui = std::max(s.u[i], 0.0);
        absorb[i] = ui / (1.0 + p.eps * ui);
    }

    const auto b = s.v.values();
    const double bb = dot(b, b);
    if (bb == 0.0) return ScalarField(g, 0.0);

    ScalarField x = s.v;
    ScalarField r(g), dir(g), adir(g);
    auto apply = [&](const ScalarField& in, ScalarField& out) {
        laplacian_noflux(in, out);
        for (std::size_t i = 0; i < g.cells; ++i)
            out[i] = in[i] * (1.0 + dt * absorb[i]) - dt * out[i];
    };

    apply(x, adir);
    for (std::size_t i = 0; i < g.cells; ++i) r[i] = b[i] - adir[i];
    double rr = dot(r.values(), r.values());
    double rr_prev = 0.0;
    const double stop = ctl.cg_tol * ctl.cg_tol * bb;
    const long max_iter = static_cast<long>(ctl.cg_max_iter_factor) *
                          static_cast<long>(g.cells);
    long it = 0;
    while (rr > stop) {
        if (it >= max_iter)
            throw solver_failure("implicit signal solve stalled at relative residual " +
                                 fmt(std::sqrt(rr / bb)) + " after " + std::to_string(it) +
                                 " iterations");
        if (it == 0) {
            dir = r;
        } else {
            const double beta = rr / rr_prev;
            for (std::size_t i = 0; i < g.cells; ++i) dir[i] = r[i] + beta * dir[i];
        }
        apply(dir, adir);
        const double dad = dot(dir.values(), adir.values());
        if (!(dad > 0.0))
            throw solver_failure("implicit signal solve lost positive curvature");
        const double alpha = rr / dad;
        for (std::size_t i = 0; i < g.cells; ++i) {
            x[i] += alpha * dir[i];
            r[i] -= alpha * adir[i];
        }
        rr_prev = rr;
        rr = dot(r.values(), r.values());
        ++it;
    }
    if (iterations) *iterations = static_cast<int>(it);

    const double lo = std::min(0.0, field_min(s.v));
    const double hi = std::max(0.0, field_max(s.v));
    for (std::size_t i = 0; i < g.cells; ++i) x[i] = std::clamp(x[i], lo, hi);
    return x;
}

double stable_dt(const State& s, const ModelParams& p, const Motility& phi,
                 const StepControl& ctl) {
    require_pair(s, "stable_dt");
    const Grid& g = s.u.grid();
    double dmax = 0.0;
    for (std::size_t i = 0; i < g.cells; ++i) {
        const double base = std::max(s.u[i], 0.0) + p.eps;
        dmax = std::max(dmax, p.m * powr(base, p.m - 1.0) * phi(s.v[i]));
    }
    if (!(dmax > 0.0)) return ctl.dt_max;
    const double h = g.min_h();
    const double dt = ctl.cfl_safety * h * h / (2.0 * g.dim * dmax);
    return std::clamp(dt, ctl.dt_min, ctl.dt_max);
}

State advance(State s, const ModelParams& p, const Motility& phi,
              const StepControl& ctl, double t_end, double dt_out,
              const StepObserver& on_step, const SnapshotObserver& on_snapshot) {
    require_pair(s, "advance");
    if (!(dt_out > 0.0)) throw std::invalid_argument("advance: dt_out must be positive");
    if (!std::isfinite(t_end) || t_end < s.t)
        throw std::invalid_argument("advance: t_end must be finite and >= the start time");
    if (!field_finite(s.u) || !field_finite(s.v))
        throw invariant_violation("advance: non-finite initial state");

    const double tol_neg = ctl.tol_neg_rel * std::max(field_max(s.u), p.eps);
    const double guard = 1e-12 * std::max(1.0, std::abs(t_end));

    if (on_snapshot) on_snapshot(s);
    double last_emitted = s.t;
    long k = static_cast<long>(std::floor(s.t / dt_out + 1e-9)) + 1;

    while (s.t < t_end - guard) {
        double dt = stable_dt(s, p, phi, ctl);
        const double t_snap = dt_out * static_cast<double>(k);
        const double t_event = std::min(t_snap, t_end);
        bool hit = false;
        if (s.t + dt >= t_event - guard) {
            dt = t_event - s.t;
            hit = true;
        }

        int rejections = 0;
        ScalarField u_next;
        for (;;) {
            try {
                u_next = step_u_explicit(s, p, phi, dt, tol_neg);
                break;
            } catch (const step_rejected&) {
                ++rejections;
                dt *= 0.5;
                hit = false;
                if (dt < ctl.dt_min)
                    throw solver_failure("advance: dt underflowed below dt_min at t = " +
                                         fmt(s.t));
            }
        }
        int iters = 0;
        ScalarField v_next = step_v_implicit(s, p, dt, ctl, &iters);

        State next{std::move(u_next), std::move(v_next), hit ? t_event : s.t + dt};
        if (!field_finite(next.u) || !field_finite(next.v))
            throw invariant_violation("advance: non-finite state at t = " + fmt(next.t));
        if (on_step) on_step(s, next, StepRecord{next.t, dt, iters, rejections});
        s = std::move(next);

        if (hit && t_event == t_snap) {
            if (on_snapshot) on_snapshot(s);
            last_emitted = s.t;
            ++k;
        }
    }

    if (std::abs(s.t - t_end) <= guard) s.t = t_end;
    if (on_snapshot && std::abs(last_emitted - t_end) > guard) on_snapshot(s);
    return s;
}

Trajectory advance_collect(State s, const ModelParams& p, const Motility& phi,
                           const StepControl& ctl, double t_end, double dt_out,
                           const StepObserver& on_step) {
    Trajectory traj;
    traj.dt_out = dt_out;
    advance(std::move(s), p, phi, ctl, t_end, dt_out, on_step,
            [&](const State& snap) { traj.snaps.push_back(snap); });
    return traj;
}

}  // namespace fvtaxis
