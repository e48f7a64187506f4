#ifndef FVTAXIS_MOTILITY_HPP
#define FVTAXIS_MOTILITY_HPP

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace fvtaxis {

/// Signal-dependent motility phi: [0, inf) -> (0, inf) with derivative.
/// Instances are immutable; name/params identify the builtin for config echo.
class Motility {
public:
    using Fn = std::function<double(double)>;

    Motility(std::string name, std::vector<double> params, Fn eval, Fn deriv)
        : name_(std::move(name)), params_(std::move(params)),
          eval_(std::move(eval)), deriv_(std::move(deriv)) {}

    double operator()(double xi) const { return eval_(xi); }
    double deriv(double xi) const { return deriv_(xi); }

    const std::string& name() const { return name_; }
    const std::vector<double>& params() const { return params_; }

private:
    std::string name_;
    std::vector<double> params_;
    Fn eval_;
    Fn deriv_;
};

/// Builtins:
///   constant(c)     phi = c,          c > 0
///   exp_decay(a)    phi = exp(-a xi)
///   rational(a)     phi = 1/(1 + a xi), a >= 0
///   affine(a, b)    phi = a + b xi,   a > 0, b >= 0
/// Throws hypothesis_violation on unknown names, wrong arity, or parameters
/// that break positivity on [0, inf).
Motility builtin_motility(const std::string& name, std::span<const double> params);

/// Extrema of phi and |phi'| over the invariant signal range [0, vbar].
struct MotilityBounds {
    double kappa1 = 0.0;  ///< lower bound for phi
    double kappa2 = 0.0;  ///< upper bound for phi
    double kappa3 = 0.0;  ///< upper bound for |phi'|
    double vbar = 0.0;
};

/// Dense sampling of [0, vbar] (samples + 1 points including both endpoints),
/// padded outward by one local Lipschitz step (the largest adjacent-sample
/// variation) so the bounds certify values between sample points as well.
/// Throws hypothesis_violation if a sampled phi value is not positive.
MotilityBounds compute_bounds(const Motility& phi, double vbar, int samples = 4096);

}  // namespace fvtaxis

#endif
