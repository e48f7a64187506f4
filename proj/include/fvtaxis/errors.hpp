#ifndef FVTAXIS_ERRORS_HPP
#define FVTAXIS_ERRORS_HPP

#include <stdexcept>
#include <string>
#include <vector>

namespace fvtaxis {

/// Invalid run configuration. Carries the full list of issues found so a
/// caller can report everything at once instead of one error per attempt.
class validation_error : public std::runtime_error {
public:
    explicit validation_error(std::vector<std::string> issues)
        : std::runtime_error(join(issues)), issues_(std::move(issues)) {}

    const std::vector<std::string>& issues() const { return issues_; }

private:
    static std::string join(const std::vector<std::string>& issues) {
        std::string msg = "invalid configuration";
        for (const auto& s : issues) msg += "\n  - " + s;
        return msg;
    }
    std::vector<std::string> issues_;
};

/// Iterative solve or time stepping failed to converge (CG stall, dt underflow).
class solver_failure : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A discrete invariant that should hold by construction was violated
/// (mass drift, maximum principle, energy inequality, non-finite values).
class invariant_violation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A standing model hypothesis does not hold for the supplied data
/// (non-positive motility, exponent out of admissible range, ...).
class hypothesis_violation : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Explicit u-step produced an undershoot below the negativity budget;
/// the caller is expected to halve dt and retry.
class step_rejected : public std::runtime_error {
public:
    step_rejected(double undershoot, double dt)
        : std::runtime_error("explicit step rejected: undershoot " +
                             std::to_string(undershoot) + " at dt " + std::to_string(dt)),
          undershoot_(undershoot), dt_(dt) {}

    double undershoot() const { return undershoot_; }
    double dt() const { return dt_; }

private:
    double undershoot_;
    double dt_;
};

namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int failure = 1;
inline constexpr int invalid_config = 2;
inline constexpr int nonconvergence = 3;
inline constexpr int invariant = 4;
}  // namespace exit_code

}  // namespace fvtaxis

#endif
