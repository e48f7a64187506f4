#ifndef FVTAXIS_VERIFICATION_HPP
#define FVTAXIS_VERIFICATION_HPP

#include <array>
#include <span>
#include <vector>

#include "fvtaxis/config.hpp"
#include "fvtaxis/field.hpp"
#include "fvtaxis/motility.hpp"
#include "fvtaxis/stepper.hpp"

namespace fvtaxis {

/// Separable space-time test function psi(x,t) = s(t) * prod_k b_k(x_k) built
/// from quintic smoothstep bumps: C^2, compactly supported strictly inside the
/// box and in [0, t_end), with closed-form time derivative and gradient.
class BumpTestFunction {
public:
    /// center/radius per active axis; support [c-r, c+r] must stay strictly
    /// inside (0, L) (throws std::invalid_argument otherwise).
    BumpTestFunction(const Grid& g, std::array<double, 3> center,
                     std::array<double, 3> radius, double t_end);

    double psi(const std::array<double, 3>& x, double t) const;
    double psi_t(const std::array<double, 3>& x, double t) const;
    double dpsi(int axis, const std::array<double, 3>& x, double t) const;

    double time_end() const { return t_end_; }

    /// Spatial part sampled at cell centers (time factor excluded).
    ScalarField sample_spatial(const Grid& g) const;

private:
    double bump(int axis, double x) const;
    double bump_deriv(int axis, double x) const;
    double time_factor(double t) const;
    double time_factor_deriv(double t) const;

    int dim_;
    std::array<double, 3> center_;
    std::array<double, 3> radius_;
    double t_end_;
};

/// Weak-form defect of one identity over a trajectory, with the magnitudes
/// that normalize it.
struct ResidualReport {
    double residual = 0.0;
    double normalizer = 0.0;  ///< sum of absolute term magnitudes
    double normalized() const { return normalizer > 0.0 ? residual / normalizer : residual; }
};

/// Mass-equation identity: compares -int int u psi_t - int u0 psi(.,0) against
/// -int int phi(v) grad(u^m).grad(psi) - int int phi'(v) u^m grad(v).grad(psi),
/// with grad(u^m) and grad(v) as face differences, face coefficients as
/// adjacent-cell means, analytic psi derivatives, midpoint-in-space and
/// trapezoid-in-time quadrature. The test function must vanish before the
/// trajectory ends (throws std::invalid_argument otherwise).
ResidualReport weak_residual_u(const Trajectory& traj, const BumpTestFunction& psi,
                               const ModelParams& p, const Motility& phi);

/// Signal-equation identity: -int int v psi_t - int v0 psi(.,0) against
/// -int int grad(v).grad(psi) - int int u v psi. Uses the limit-form
/// consumption u v, so regularized trajectories show an O(eps) defect.
ResidualReport weak_residual_v(const Trajectory& traj, const BumpTestFunction& psi);

/// Discrete testing identity for the weighted p-th moment of u + eps: the
/// change rate (1/p) d/dt int (u+eps)^p vphi against its four-term
/// integration-by-parts expansion, assembled with exact secant-slope face
/// coefficients so the defect isolates the time-discretization error.
/// before/after must be one explicit u-step apart (dt given); with p = 1 and
/// vphi == 1 the expansion vanishes and the value reduces to |mass drift|/dt.
/// Requires p >= 1.
double moment_identity_residual(const State& before, const State& after,
                                const ModelParams& p, const Motility& phi,
                                double dt, double power, const ScalarField& vphi);

/// Runs a config to its horizon and returns the snapshot trajectory.
Trajectory simulate(const SimConfig& cfg);

/// Space-time L^2 distance between aligned trajectories (same grid, same
/// snapshot times): trapezoid in time of the squared L^2 cell distance.
double space_time_l2_distance(const Trajectory& a, const Trajectory& b);

/// Regularization study: runs the base config once per eps and reports the
/// space-time L^2 gaps between consecutive members.
struct EpsStudyRow {
    double eps_hi = 0.0;
    double eps_lo = 0.0;
    double delta = 0.0;
};
std::vector<EpsStudyRow> eps_limit_study(const SimConfig& base,
                                         std::span<const double> eps_list,
                                         int workers = 1);

/// Grid/step refinement study via Richardson comparison of final states.
struct ConvergenceRow {
    int level = 0;
    double h = 0.0;
    double dt = 0.0;
    double error = 0.0;  ///< distance to the next-finer level; 0 for the finest
    double order = 0.0;  ///< log2 ratio of consecutive errors; 0 where undefined
};
struct ConvergenceResult {
    std::vector<ConvergenceRow> rows;
    double order_estimate = 0.0;  ///< from the last usable pair
    bool conclusive = false;      ///< errors strictly decreasing
};

/// Spatial study: each level halves h and quarters dt_max (keeps the CFL
/// margin); errors restrict the finer final state onto the coarser grid.
ConvergenceResult self_convergence_spatial(const SimConfig& base, int levels,
                                           int workers = 1);

/// Temporal study: fixed grid, dt_max halved per level; dt_max must sit below
/// the CFL bound so the step size actually binds.
ConvergenceResult self_convergence_temporal(const SimConfig& base, int levels,
                                            int workers = 1);

}  // namespace fvtaxis

#endif
