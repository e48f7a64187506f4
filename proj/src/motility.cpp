#include "fvtaxis/motility.hpp"

#include <cmath>
#include <stdexcept>

#include "fvtaxis/errors.hpp"

namespace fvtaxis {

namespace {

void require_arity(const std::string& name, std::span<const double> params,
                   std::size_t arity) {
    if (params.size() != arity)
        throw hypothesis_violation("motility " + name + " takes " +
                                   std::to_string(arity) + " parameter(s), got " +
                                   std::to_string(params.size()));
    for (double p : params)
        if (!std::isfinite(p))
            throw hypothesis_violation("motility " + name + ": non-finite parameter");
}

}  // namespace

Motility builtin_motility(const std::string& name, std::span<const double> params) {
    if (name == "constant") {
        require_arity(name, params, 1);
        double c = params[0];
        if (!(c > 0.0))
            throw hypothesis_violation("motility constant(c): c must be positive");
        return Motility(name, {c}, [c](double) { return c; }, [](double) { return 0.0; });
    }
    if (name == "exp_decay") {
        require_arity(name, params, 1);
        double a = params[0];
        return Motility(name, {a},
                        [a](double xi) { return std::exp(-a * xi); },
                        [a](double xi) { return -a * std::exp(-a * xi); });
    }
    if (name == "rational") {
        require_arity(name, params, 1);
        double a = params[0];
        if (!(a >= 0.0))
            throw hypothesis_violation(
                "motility rational(a): a must be nonnegative to keep phi positive");
        return Motility(name, {a},
                        [a](double xi) { return 1.0 / (1.0 + a * xi); },
                        [a](double xi) {
                            double d = 1.0 + a * xi;
                            return -a / (d * d);
                        });
    }
    if (name == "affine") {
        require_arity(name, params, 2);
        double a = params[0], b = params[1];
        if (!(a > 0.0))
            throw hypothesis_violation("motility affine(a,b): a must be positive");
        if (!(b >= 0.0))
            throw hypothesis_violation("motility affine(a,b): b must be nonnegative");
        return Motility(name, {a, b},
                        [a, b](double xi) { return a + b * xi; },
                        [b](double) { return b; });
    }
    throw hypothesis_violation("unknown motility '" + name +
                               "' (builtins: constant, exp_decay, rational, affine)");
}

MotilityBounds compute_bounds(const Motility& phi, double vbar, int samples) {
    if (!(vbar >= 0.0) || !std::isfinite(vbar))
        throw std::invalid_argument("compute_bounds: vbar must be finite and nonnegative");
    if (samples < 1) throw std::invalid_argument("compute_bounds: samples must be >= 1");

    double lo = phi(0.0), hi = lo;
    double dprev = phi.deriv(0.0);
    double dmax = std::abs(dprev);
    double fprev = lo;
    double pad_f = 0.0, pad_d = 0.0;
    if (!(lo > 0.0))
        throw hypothesis_violation("motility must be positive on [0, vbar]; phi(0) <= 0");

    if (vbar > 0.0) {
        for (int j = 1; j <= samples; ++j) {
            double xi = vbar * static_cast<double>(j) / static_cast<double>(samples);
            double f = phi(xi);
            double d = phi.deriv(xi);
            if (!(f > 0.0) || !std::isfinite(f) || !std::isfinite(d))
                throw hypothesis_violation(
                    "motility must be positive and finite on [0, vbar]; fails near xi = " +
                    std::to_string(xi));
            lo = std::min(lo, f);
            hi = std::max(hi, f);
            dmax = std::max(dmax, std::abs(d));
            pad_f = std::max(pad_f, std::abs(f - fprev));
            pad_d = std::max(pad_d, std::abs(d - dprev));
            fprev = f;
            dprev = d;
        }
    }

    MotilityBounds b;
    b.kappa1 = lo - pad_f > 0.0 ? lo - pad_f : 0.5 * lo;
    b.kappa2 = hi + pad_f;
    b.kappa3 = dmax + pad_d;
    b.vbar = vbar;
    return b;
}

}  // namespace fvtaxis
