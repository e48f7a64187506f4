#include "fvtaxis/verification.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
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

double smoothstep(double z) { return z * z * z * (10.0 + z * (6.0 * z - 15.0)); }

double smoothstep_deriv(double z) {
    const double w = z * (1.0 - z);
    return 30.0 * w * w;
}

std::vector<double> trapezoid_weights(const std::vector<State>& snaps) {
    std::vector<double> w(snaps.size(), 0.0);
    for (std::size_t k = 0; k + 1 < snaps.size(); ++k) {
        const double half = 0.5 * (snaps[k + 1].t - snaps[k].t);
        w[k] += half;
        w[k + 1] += half;
    }
    return w;
}

void require_weak_inputs(const Trajectory& traj, const BumpTestFunction& psi) {
    if (traj.snaps.size() < 2)
        throw std::invalid_argument("weak residual needs at least two snapshots");
    const Grid& g = traj.front().u.grid();
    double prev = traj.front().t;
    for (std::size_t k = 0; k < traj.snaps.size(); ++k) {
        const State& s = traj.snaps[k];
        if (!(s.u.grid() == g) || !(s.v.grid() == g))
            throw std::invalid_argument("weak residual needs a single grid");
        if (k > 0 && !(s.t > prev))
            throw std::invalid_argument("weak residual needs increasing snapshot times");
        prev = s.t;
    }
    const double T = traj.back().t;
    if (psi.time_end() > T + 1e-12 * std::max(1.0, std::abs(T)))
        throw std::invalid_argument("test function must vanish before the trajectory ends");
}

double clamp_base(double s, double eps) { return std::max(s, 0.0) + eps; }

/// Chord slope of s -> (max(s,0) + eps)^e between a and b; collapses to the
/// midpoint derivative when a and b nearly coincide.
double power_secant(double a, double b, double eps, double e) {
    if (e == 0.0) return 0.0;
    const double d = b - a;
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    if (std::abs(d) > 1e-8 * scale)
        return (powr(clamp_base(b, eps), e) - powr(clamp_base(a, eps), e)) / d;
    const double mid = clamp_base(0.5 * (a + b), eps);
    if (mid == 0.0) return 0.0;
    return e * powr(mid, e - 1.0);
}

double motility_secant(const Motility& phi, double a, double b) {
    const double d = b - a;
    const double scale = std::max({1.0, std::abs(a), std::abs(b)});
    if (std::abs(d) > 1e-8 * scale) return (phi(b) - phi(a)) / d;
    return phi.deriv(0.5 * (a + b));
}

/// Runs fn(0..count-1) on up to `workers` threads; the first exception thrown
/// by any worker is rethrown on the caller after all threads joined.
void run_indexed(int count, int workers, const std::function<void(int)>& fn) {
    if (workers <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::mutex mtx;
    std::exception_ptr first;
    std::vector<std::thread> pool;
    int next = 0;
    const int w = std::min(workers, count);
    pool.reserve(static_cast<std::size_t>(w));
    for (int t = 0; t < w; ++t)
        pool.emplace_back([&] {
            for (;;) {
                int i;
                {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (first || next >= count) return;
                    i = next++;
                }
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(mtx);
                    if (!first) first = std::current_exception();
                    return;
                }
            }
        });
    for (auto& th : pool) th.join();
    if (first) std::rethrow_exception(first);
}

/// L^2 distance of the (u, v) pair between two states on the same grid.
double state_distance_sq(const State& a, const State& b) {
    const Grid& g = a.u.grid();
    CompensatedSum s;
    for (std::size_t i = 0; i < g.cells; ++i) {
        const double du = a.u[i] - b.u[i];
        const double dv = a.v[i] - b.v[i];
        s.add((du * du + dv * dv) * g.cell_volume);
    }
    return s.value();
}

double log2_ratio(double coarse, double fine) {
    if (!(coarse > 0.0) || !(fine > 0.0)) return 0.0;
    return std::log2(coarse / fine);
}

}  // namespace

BumpTestFunction::BumpTestFunction(const Grid& g, std::array<double, 3> center,
                                   std::array<double, 3> radius, double t_end)
    : dim_(g.dim), center_(center), radius_(radius), t_end_(t_end) {
    for (int a = 0; a < dim_; ++a) {
        if (!(radius_[a] > 0.0))
            throw std::invalid_argument("bump radius must be positive on axis " +
                                        std::to_string(a));
        if (!(center_[a] - radius_[a] > 0.0) ||
            !(center_[a] + radius_[a] < g.length[a]))
            throw std::invalid_argument(
                "bump support must stay strictly inside the box on axis " +
                std::to_string(a));
    }
    if (!(t_end_ > 0.0))
        throw std::invalid_argument("bump time horizon must be positive");
}

double BumpTestFunction::bump(int axis, double x) const {
    const double z = 1.0 - std::abs(x - center_[axis]) / radius_[axis];
    if (z <= 0.0) return 0.0;
    if (z >= 1.0) return 1.0;
    return smoothstep(z);
}

double BumpTestFunction::bump_deriv(int axis, double x) const {
    const double d = x - center_[axis];
    const double z = 1.0 - std::abs(d) / radius_[axis];
    if (z <= 0.0 || z >= 1.0) return 0.0;
    const double sign = d > 0.0 ? 1.0 : -1.0;
    return -sign * smoothstep_deriv(z) / radius_[axis];
}

double BumpTestFunction::time_factor(double t) const {
    if (t >= t_end_) return 0.0;
    if (t <= 0.0) return 1.0;
    return smoothstep(1.0 - t / t_end_);
}

double BumpTestFunction::time_factor_deriv(double t) const {
    if (t <= 0.0 || t >= t_end_) return 0.0;
    return -smoothstep_deriv(1.0 - t / t_end_) / t_end_;
}

double BumpTestFunction::psi(const std::array<double, 3>& x, double t) const {
    double b = time_factor(t);
    for (int a = 0; a < dim_ && b != 0.0; ++a) b *= bump(a, x[a]);
    return b;
}

double BumpTestFunction::psi_t(const std::array<double, 3>& x, double t) const {
    double b = time_factor_deriv(t);
    for (int a = 0; a < dim_ && b != 0.0; ++a) b *= bump(a, x[a]);
    return b;
}

double BumpTestFunction::dpsi(int axis, const std::array<double, 3>& x, double t) const {
    double b = time_factor(t) * bump_deriv(axis, x[axis]);
    for (int a = 0; a < dim_ && b != 0.0; ++a)
        if (a != axis) b *= bump(a, x[a]);
    return b;
}

ScalarField BumpTestFunction::sample_spatial(const Grid& g) const {
    if (g.dim != dim_)
        throw std::invalid_argument("bump sampled on a grid of different dimension");
    ScalarField out(g);
    for (std::size_t i = 0; i < g.cells; ++i) {
        const auto x = g.cell_center(i);
        double b = 1.0;
        for (int a = 0; a < dim_ && b != 0.0; ++a) b *= bump(a, x[a]);
        out[i] = b;
    }
    return out;
}

ResidualReport weak_residual_u(const Trajectory& traj, const BumpTestFunction& psi,
                               const ModelParams& p, const Motility& phi) {
    require_weak_inputs(traj, psi);
    const Grid& g = traj.front().u.grid();
    const double vol = g.cell_volume;
    const std::vector<double> wts = trapezoid_weights(traj.snaps);

    CompensatedSum term_ut, term_diff, term_chem, term_init;
    std::vector<double> um(g.cells);
    for (std::size_t k = 0; k < traj.snaps.size(); ++k) {
        const State& s = traj.snaps[k];
        const double wk = wts[k];
        for (std::size_t i = 0; i < g.cells; ++i) {
            um[i] = powr(std::max(s.u[i], 0.0), p.m);
            term_ut.add(wk * s.u[i] * psi.psi_t(g.cell_center(i), s.t) * vol);
        }
        for_each_interior_face(g, [&](int a, std::size_t l, std::size_t r) {
            std::array<double, 3> xf = g.cell_center(l);
            xf[a] += 0.5 * g.h[a];
            const double dps = psi.dpsi(a, xf, s.t);
            if (dps == 0.0) return;
            const double gum = (um[r] - um[l]) / g.h[a];
            const double gv = (s.v[r] - s.v[l]) / g.h[a];
            const double phif = 0.5 * (phi(s.v[l]) + phi(s.v[r]));
            const double chemf =
                0.5 * (phi.deriv(s.v[l]) * um[l] + phi.deriv(s.v[r]) * um[r]);
            term_diff.add(wk * phif * gum * dps * vol);
            term_chem.add(wk * chemf * gv * dps * vol);
        });
    }
    const State& s0 = traj.front();
    for (std::size_t i = 0; i < g.cells; ++i)
        term_init.add(s0.u[i] * psi.psi(g.cell_center(i), s0.t) * vol);

    const double ut = term_ut.value();
    const double init = term_init.value();
    const double diff = term_diff.value();
    const double chem = term_chem.value();
    ResidualReport rep;
    rep.residual = (-ut - init) + (diff + chem);
    rep.normalizer = std::abs(ut) + std::abs(init) + std::abs(diff) + std::abs(chem);
    return rep;
}

ResidualReport weak_residual_v(const Trajectory& traj, const BumpTestFunction& psi) {
    require_weak_inputs(traj, psi);
    const Grid& g = traj.front().u.grid();
    const double vol = g.cell_volume;
    const std::vector<double> wts = trapezoid_weights(traj.snaps);

    CompensatedSum term_vt, term_grad, term_cons, term_init;
    for (std::size_t k = 0; k < traj.snaps.size(); ++k) {
        const State& s = traj.snaps[k];
        const double wk = wts[k];
        for (std::size_t i = 0; i < g.cells; ++i) {
            const auto x = g.cell_center(i);
            term_vt.add(wk * s.v[i] * psi.psi_t(x, s.t) * vol);
            term_cons.add(wk * s.u[i] * s.v[i] * psi.psi(x, s.t) * vol);
        }
        for_each_interior_face(g, [&](int a, std::size_t l, std::size_t r) {
            std::array<double, 3> xf = g.cell_center(l);
            xf[a] += 0.5 * g.h[a];
            const double dps = psi.dpsi(a, xf, s.t);
            if (dps == 0.0) return;
            term_grad.add(wk * (s.v[r] - s.v[l]) / g.h[a] * dps * vol);
        });
    }
    const State& s0 = traj.front();
    for (std::size_t i = 0; i < g.cells; ++i)
        term_init.add(s0.v[i] * psi.psi(g.cell_center(i), s0.t) * vol);

    const double vt = term_vt.value();
    const double init = term_init.value();
    const double grad = term_grad.value();
    const double cons = term_cons.value();
    ResidualReport rep;
    rep.residual = (-vt - init) + (grad + cons);
    rep.normalizer = std::abs(vt) + std::abs(init) + std::abs(grad) + std::abs(cons);
    return rep;
}

double moment_identity_residual(const State& before, const State& after,
                                const ModelParams& p, const Motility& phi,
                                double dt, double power, const ScalarField& vphi) {
    if (!(power >= 1.0))
        throw std::invalid_argument("moment exponent must satisfy p >= 1");
    if (!(dt > 0.0)) throw std::invalid_argument("moment identity needs dt > 0");
    const Grid& g = before.u.grid();
    if (!(after.u.grid() == g) || !(vphi.grid() == g))
        throw std::invalid_argument("moment identity needs matching grids");

    const double vol = g.cell_volume;
    CompensatedSum change;
    for (std::size_t i = 0; i < g.cells; ++i) {
        const double gb = powr(clamp_base(before.u[i], p.eps), power);
        const double ga = powr(clamp_base(after.u[i], p.eps), power);
        change.add((ga - gb) * vphi[i] * vol);
    }
    const double rate = change.value() / (power * dt);

    std::vector<double> bfac(g.cells), afac(g.cells), phiv(g.cells);
    for (std::size_t i = 0; i < g.cells; ++i) {
        const double base = clamp_base(before.u[i], p.eps);
        bfac[i] = powr(base, power - 1.0);
        afac[i] = powr(base, p.m);
        phiv[i] = phi(before.v[i]);
    }

    CompensatedSum rhs;
    for_each_interior_face(g, [&](int a, std::size_t l, std::size_t r) {
        const double du = before.u[r] - before.u[l];
        const double dv = before.v[r] - before.v[l];
        const double dz =
            0.5 * (vphi[l] + vphi[r]) * power_secant(before.u[l], before.u[r], p.eps, power - 1.0) * du +
            0.5 * (bfac[l] + bfac[r]) * (vphi[r] - vphi[l]);
        const double dw =
            0.5 * (afac[l] + afac[r]) * motility_secant(phi, before.v[l], before.v[r]) * dv +
            0.5 * (phiv[l] + phiv[r]) * power_secant(before.u[l], before.u[r], p.eps, p.m) * du;
        rhs.add(-(dz * dw) / (g.h[a] * g.h[a]) * vol);
    });

    return std::abs(rate - rhs.value());
}

Trajectory simulate(const SimConfig& cfg) {
    auto [u0, v0] = initial_fields(cfg);
    return advance_collect(State{std::move(u0), std::move(v0), 0.0}, cfg.params(),
                           cfg.motility(), cfg.control, cfg.t_end, cfg.dt_out);
}

double space_time_l2_distance(const Trajectory& a, const Trajectory& b) {
    if (a.snaps.size() != b.snaps.size() || a.snaps.size() < 2)
        throw std::invalid_argument("space-time distance needs equally many snapshots");
    const Grid& g = a.front().u.grid();
    if (!(b.front().u.grid() == g))
        throw std::invalid_argument("space-time distance needs a common grid");
    const double T = std::max(std::abs(a.back().t), 1.0);
    CompensatedSum acc;
    for (std::size_t k = 0; k < a.snaps.size(); ++k) {
        if (std::abs(a.snaps[k].t - b.snaps[k].t) > 1e-12 * T)
            throw std::invalid_argument("space-time distance needs aligned snapshot times");
        double wk = 0.0;
        if (k > 0) wk += 0.5 * (a.snaps[k].t - a.snaps[k - 1].t);
        if (k + 1 < a.snaps.size()) wk += 0.5 * (a.snaps[k + 1].t - a.snaps[k].t);
        acc.add(wk * state_distance_sq(a.snaps[k], b.snaps[k]));
    }
    return std::sqrt(std::max(acc.value(), 0.0));
}

std::vector<EpsStudyRow> eps_limit_study(const SimConfig& base,
                                         std::span<const double> eps_list,
                                         int workers) {
    std::vector<std::string> issues;
    if (eps_list.size() < 2)
        issues.push_back("eps study needs at least two eps values");
    for (std::size_t j = 0; j < eps_list.size(); ++j) {
        if (!(eps_list[j] >= 0.0) || !std::isfinite(eps_list[j]))
            issues.push_back("eps study values must be finite and nonnegative");
        if (j > 0 && !(eps_list[j] < eps_list[j - 1]))
            issues.push_back("eps study values must decrease strictly");
    }
    if (!issues.empty()) throw validation_error(issues);

    const int count = static_cast<int>(eps_list.size());
    std::vector<Trajectory> trajs(static_cast<std::size_t>(count));
    run_indexed(count, workers, [&](int i) {
        SimConfig cfg = base;
        cfg.eps = eps_list[static_cast<std::size_t>(i)];
        trajs[static_cast<std::size_t>(i)] = simulate(cfg);
    });

    std::vector<EpsStudyRow> rows;
    rows.reserve(static_cast<std::size_t>(count) - 1);
    for (int j = 0; j + 1 < count; ++j)
        rows.push_back({eps_list[static_cast<std::size_t>(j)],
                        eps_list[static_cast<std::size_t>(j) + 1],
                        space_time_l2_distance(trajs[static_cast<std::size_t>(j)],
                                               trajs[static_cast<std::size_t>(j) + 1])});
    return rows;
}

namespace {

ConvergenceResult richardson_study(const SimConfig& base, int levels, int workers,
                                   bool spatial) {
    if (levels < 2)
        throw validation_error({"convergence study needs at least two levels"});

    std::vector<SimConfig> cfgs;
    cfgs.reserve(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
        SimConfig c = base;
        const double shrink = spatial ? std::pow(4.0, l) : std::pow(2.0, l);
        if (spatial)
            for (int a = 0; a < c.dim; ++a) c.n[static_cast<std::size_t>(a)] <<= l;
        c.control.dt_max = base.control.dt_max / shrink;
        c.control.dt_min = base.control.dt_min / shrink;
        c.dt_out = c.t_end;
        cfgs.push_back(std::move(c));
    }

    std::vector<State> finals(static_cast<std::size_t>(levels));
    run_indexed(levels, workers, [&](int l) {
        finals[static_cast<std::size_t>(l)] =
            simulate(cfgs[static_cast<std::size_t>(l)]).back();
    });

    ConvergenceResult res;
    res.rows.resize(static_cast<std::size_t>(levels));
    for (int l = 0; l < levels; ++l) {
        auto& row = res.rows[static_cast<std::size_t>(l)];
        row.level = l;
        row.h = finals[static_cast<std::size_t>(l)].u.grid().min_h();
        row.dt = cfgs[static_cast<std::size_t>(l)].control.dt_max;
    }
    for (int l = 0; l + 1 < levels; ++l) {
        const State& coarse = finals[static_cast<std::size_t>(l)];
        const State& fine = finals[static_cast<std::size_t>(l) + 1];
        State probe;
        if (spatial) {
            probe = State{restrict_to_coarse(fine.u, coarse.u.grid()),
                          restrict_to_coarse(fine.v, coarse.v.grid()), fine.t};
        } else {
            probe = fine;
        }
        res.rows[static_cast<std::size_t>(l)].error =
            std::sqrt(std::max(state_distance_sq(coarse, probe), 0.0));
    }
    bool decreasing = levels >= 3;
    for (int l = 1; l + 1 < levels; ++l) {
        const double prev = res.rows[static_cast<std::size_t>(l) - 1].error;
        const double cur = res.rows[static_cast<std::size_t>(l)].error;
        res.rows[static_cast<std::size_t>(l)].order = log2_ratio(prev, cur);
        if (!(cur < prev)) decreasing = false;
    }
    if (levels >= 3) {
        res.order_estimate = res.rows[static_cast<std::size_t>(levels) - 2].order;
        res.conclusive = decreasing && res.order_estimate > 0.0;
    }
    return res;
}

}  // namespace

ConvergenceResult self_convergence_spatial(const SimConfig& base, int levels,
                                           int workers) {
    return richardson_study(base, levels, workers, true);
}

ConvergenceResult self_convergence_temporal(const SimConfig& base, int levels,
                                            int workers) {
    auto [u0, v0] = initial_fields(base);
    StepControl probe = base.control;
    probe.dt_min = 0.0;
    probe.dt_max = std::numeric_limits<double>::infinity();
    const double bound =
        stable_dt(State{std::move(u0), std::move(v0), 0.0}, base.params(),
                  base.motility(), probe);
    if (std::isfinite(bound) && base.control.dt_max >= bound)
        throw validation_error(
            {"temporal study: dt_max must sit below the explicit stability bound"});
    return richardson_study(base, levels, workers, false);
}

}  // namespace fvtaxis
