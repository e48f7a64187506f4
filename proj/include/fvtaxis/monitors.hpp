#ifndef FVTAXIS_MONITORS_HPP
#define FVTAXIS_MONITORS_HPP

#include <deque>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "fvtaxis/motility.hpp"
#include "fvtaxis/stepper.hpp"

namespace fvtaxis {

/// Which functionals to track alongside a run.
struct MonitorConfig {
    std::vector<double> p_list;      ///< L^p norms of u
    double q = 2.0;                  ///< exponent for the grad-v L^q norm
    std::vector<double> alpha_list;  ///< exponents for dissipation accumulators
    double window = 1.0;             ///< trailing window length for the u^(m+1) integral
};

/// Defaults: p in {2, m+1, 4} (sorted, deduplicated), q = dim + 1,
/// alpha in {m/2 + 1/4, m, m + 1}.
MonitorConfig default_monitor_config(const ModelParams& p);

/// One row of the monitor time series.
struct MonitorReport {
    double t = 0.0;
    double mass_u = 0.0;
    double sup_u = 0.0;
    double sup_v = 0.0;
    double min_v = 0.0;
    std::vector<double> lp_u;
    double grad_v_energy = 0.0;
    double cum_grad_v = 0.0;
    double window_lm1 = 0.0;
    double grad_v_lq = 0.0;
    std::vector<double> grad_alpha_cum;
    bool kappa_ok = true;
};

/// Dissipation increment dt * gradient_energy((max(u,0)+eps)^alpha) evaluated
/// on the post-step field. Throws hypothesis_violation unless alpha > m/2.
double alpha_dissipation(const State& before, const State& after,
                         const ModelParams& p, double dt, double alpha);

/// Accumulates the per-step time integrals and produces snapshot-time rows.
/// Wire on_step to every accepted step and observe at snapshot times.
class MonitorAccumulator {
public:
    MonitorAccumulator(const ModelParams& p, const Motility& phi,
                       const MotilityBounds& bounds, MonitorConfig cfg);

    void on_step(const State& before, const State& after, double dt);

    /// Builds the row at the state's time and appends it to reports().
    MonitorReport observe(const State& s);

    const std::vector<MonitorReport>& reports() const { return reports_; }
    const MonitorConfig& config() const { return cfg_; }
    const MotilityBounds& bounds() const { return bounds_; }
    double cum_grad_v() const { return cum_grad_v_.value(); }

private:
    ModelParams params_;
    Motility phi_;
    MotilityBounds bounds_;
    MonitorConfig cfg_;
    CompensatedSum cum_grad_v_;
    std::vector<CompensatedSum> alpha_cum_;
    std::deque<std::pair<double, double>> window_samples_;  ///< (t, int u^(m+1))
    std::vector<MonitorReport> reports_;
};

/// Growth audit over a monitor series: sup of sup_u over everything, over the
/// early window [0, split*T) and the late window [split*T, T], their ratio,
/// and the bounded flag (ratio <= 1.01). Throws std::invalid_argument on an
/// empty series.
struct BoundednessVerdict {
    double sup_all = 0.0;
    double sup_early = 0.0;
    double sup_late = 0.0;
    double growth_ratio = 0.0;
    bool bounded = false;
};

BoundednessVerdict boundedness_verdict(std::span<const MonitorReport> reports,
                                       double split = 0.5);

/// Fixed CSV layout:
/// t,mass_u,sup_u,sup_v,min_v,lp_u@<p>...,grad_v_energy,cum_grad_v,window_Lm1,
/// grad_v_lq,grad_alpha_cum@<alpha>...,kappa_ok
/// All floats are printed with 17 significant digits; kappa_ok is 0/1.
std::string monitor_csv_header(const MonitorConfig& cfg);
void write_monitor_csv_row(std::ostream& os, const MonitorReport& r);
void write_monitor_csv(std::ostream& os, std::span<const MonitorReport> reports,
                       const MonitorConfig& cfg);

}  // namespace fvtaxis

#endif
