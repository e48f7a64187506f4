#include "fvtaxis/monitors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <stdexcept>

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

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void require_alpha(double alpha, double m) {
    if (!(alpha > 0.5 * m))
        throw hypothesis_violation("dissipation exponent alpha = " + num(alpha) +
                                   " must exceed m/2 = " + num(0.5 * m));
}

ScalarField shifted_power(const ScalarField& u, double eps, double alpha) {
    ScalarField f(u.grid());
    for (std::size_t i = 0; i < u.size(); ++i)
        f[i] = powr(std::max(u[i], 0.0) + eps, alpha);
    return f;
}

}  // namespace

MonitorConfig default_monitor_config(const ModelParams& p) {
    MonitorConfig cfg;
    cfg.p_list = {2.0, p.m + 1.0, 4.0};
    std::sort(cfg.p_list.begin(), cfg.p_list.end());
    cfg.p_list.erase(std::unique(cfg.p_list.begin(), cfg.p_list.end()),
                     cfg.p_list.end());
    cfg.q = static_cast<double>(p.dim) + 1.0;
    cfg.alpha_list = {0.5 * p.m + 0.25, p.m, p.m + 1.0};
    std::sort(cfg.alpha_list.begin(), cfg.alpha_list.end());
    cfg.alpha_list.erase(std::unique(cfg.alpha_list.begin(), cfg.alpha_list.end()),
                         cfg.alpha_list.end());
    cfg.window = 1.0;
    return cfg;
}

double alpha_dissipation(const State&, const State& after, const ModelParams& p,
                         double dt, double alpha) {
    require_alpha(alpha, p.m);
    return dt * gradient_energy(shifted_power(after.u, p.eps, alpha));
}

MonitorAccumulator::MonitorAccumulator(const ModelParams& p, const Motility& phi,
                                       const MotilityBounds& bounds, MonitorConfig cfg)
    : params_(p), phi_(phi), bounds_(bounds), cfg_(std::move(cfg)) {
    for (double alpha : cfg_.alpha_list) require_alpha(alpha, params_.m);
    if (!(cfg_.window > 0.0))
        throw std::invalid_argument("monitor window must be positive");
    alpha_cum_.resize(cfg_.alpha_list.size());
}

void MonitorAccumulator::on_step(const State&, const State& after, double dt) {
    cum_grad_v_.add(dt * gradient_energy(after.v));
    for (std::size_t i = 0; i < cfg_.alpha_list.size(); ++i)
        alpha_cum_[i].add(
            dt * gradient_energy(shifted_power(after.u, params_.eps, cfg_.alpha_list[i])));
}

MonitorReport MonitorAccumulator::observe(const State& s) {
    MonitorReport r;
    r.t = s.t;
    r.mass_u = integral(s.u);
    r.sup_u = field_max(s.u);
    r.sup_v = field_max(s.v);
    r.min_v = field_min(s.v);
    r.lp_u.reserve(cfg_.p_list.size());
    for (double p : cfg_.p_list) r.lp_u.push_back(lp_norm(s.u, p));
    r.grad_v_energy = gradient_energy(s.v);
    r.cum_grad_v = cum_grad_v_.value();
    r.grad_v_lq = gradient_lq(s.v, cfg_.q);
    r.grad_alpha_cum.reserve(alpha_cum_.size());
    for (const auto& a : alpha_cum_) r.grad_alpha_cum.push_back(a.value());

    const double mp1 = params_.m + 1.0;
    window_samples_.emplace_back(s.t, std::pow(lp_norm(s.u, mp1), mp1));
    const double guard = 1e-12 * std::max(1.0, std::abs(s.t));
    const double lo = s.t - cfg_.window;
    while (window_samples_.size() > 1 && window_samples_[0].first < lo - guard)
        window_samples_.pop_front();
    CompensatedSum trap;
    for (std::size_t k = 0; k + 1 < window_samples_.size(); ++k) {
        const auto& [ta, fa] = window_samples_[k];
        const auto& [tb, fb] = window_samples_[k + 1];
        trap.add(0.5 * (tb - ta) * (fa + fb));
    }
    r.window_lm1 = trap.value();

    r.kappa_ok = true;
    for (std::size_t i = 0; i < s.v.size(); ++i) {
        const double f = phi_(s.v[i]);
        const double d = std::abs(phi_.deriv(s.v[i]));
        if (!(f >= bounds_.kappa1) || !(f <= bounds_.kappa2) || !(d <= bounds_.kappa3)) {
            r.kappa_ok = false;
            break;
        }
    }

    reports_.push_back(r);
    return r;
}

BoundednessVerdict boundedness_verdict(std::span<const MonitorReport> reports,
                                       double split) {
    if (reports.empty())
        throw std::invalid_argument("boundedness verdict needs at least one report");
    const double t0 = reports.front().t;
    const double cut = t0 + split * (reports.back().t - t0);
    BoundednessVerdict v;
    bool has_early = false;
    for (const MonitorReport& r : reports) {
        v.sup_all = std::max(v.sup_all, r.sup_u);
        if (r.t < cut) {
            v.sup_early = std::max(v.sup_early, r.sup_u);
            has_early = true;
        } else {
            v.sup_late = std::max(v.sup_late, r.sup_u);
        }
    }
    if (!has_early) v.sup_early = v.sup_late;
    if (v.sup_early > 0.0)
        v.growth_ratio = v.sup_late / v.sup_early;
    else
        v.growth_ratio = v.sup_late == 0.0
                             ? 1.0
                             : std::numeric_limits<double>::infinity();
    v.bounded = v.growth_ratio <= 1.01;
    return v;
}

std::string monitor_csv_header(const MonitorConfig& cfg) {
    std::string h = "t,mass_u,sup_u,sup_v,min_v";
    for (double p : cfg.p_list) h += ",lp_u@" + num(p);
    h += ",grad_v_energy,cum_grad_v,window_Lm1,grad_v_lq";
    for (double a : cfg.alpha_list) h += ",grad_alpha_cum@" + num(a);
    h += ",kappa_ok";
    return h;
}

void write_monitor_csv_row(std::ostream& os, const MonitorReport& r) {
    os << num(r.t) << ',' << num(r.mass_u) << ',' << num(r.sup_u) << ','
       << num(r.sup_v) << ',' << num(r.min_v);
    for (double x : r.lp_u) os << ',' << num(x);
    os << ',' << num(r.grad_v_energy) << ',' << num(r.cum_grad_v) << ','
       << num(r.window_lm1) << ',' << num(r.grad_v_lq);
    for (double x : r.grad_alpha_cum) os << ',' << num(x);
    os << ',' << (r.kappa_ok ? '1' : '0') << '\n';
}

void write_monitor_csv(std::ostream& os, std::span<const MonitorReport> reports,
                       const MonitorConfig& cfg) {
    os << monitor_csv_header(cfg) << '\n';
    for (const MonitorReport& r : reports) write_monitor_csv_row(os, r);
}

}  // namespace fvtaxis
