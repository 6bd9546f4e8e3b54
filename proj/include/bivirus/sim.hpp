#pragma once

// Simulation of the bivirus flow over the admissible set, convergence
// detection, the K_m order (x1 up, x2 down) and the corner "sandwich" harness.

#include "bivirus/equilibria.hpp"
#include "bivirus/errors.hpp"
#include "bivirus/model.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

namespace bivirus::sim {

inline constexpr double kClampFloor = 1e-12;     // negatives down to this are rounded to 0
inline constexpr double kDefaultEta = 1e-3;
inline constexpr double kDefaultTEnd = 2000.0;
inline constexpr double kConvergenceTol = 1e-9;
inline constexpr double kLabelRadius = 1e-3;

struct IntegratorOptions {
    double rtol = 1e-10;
    double atol = 1e-200;      // error-scale floor; the control is effectively relative
    double h0 = 1e-3;
    double h_min = 1e-14;
    double sample_dt = 0.0;    // > 0: record exactly on the grid t = k * sample_dt
    std::size_t stride = 1;    // sample_dt == 0: record every stride-th accepted step
    std::size_t max_steps = 20'000'000;
    bool enforce_admissible = true;
};

enum class OutcomeKind { converged, limit_cycle_suspected, budget_exhausted };

inline const char* to_string(OutcomeKind k) {
    switch (k) {
        case OutcomeKind::converged: return "converged";
        case OutcomeKind::limit_cycle_suspected: return "limit_cycle_suspected";
        case OutcomeKind::budget_exhausted: return "budget_exhausted";
    }
    return "?";
}

struct Outcome {
    OutcomeKind kind = OutcomeKind::budget_exhausted;
    State limit;           // final state (the equilibrium candidate when converged)
    double residual = 0;   // field norm at the final state
    double drift = 0;      // max distance to the final state over the trailing window
};

struct Trajectory {
    std::vector<double> times;
    std::vector<State> states;
    Outcome outcome;
    std::size_t accepted_steps = 0;
    std::size_t rejected_steps = 0;

    const State& final_state() const { return states.back(); }
};

/// Integration aborted: step-size underflow or an invariant violation beyond slack.
class IntegrationError : public NumericError {
public:
    using NumericError::NumericError;
};

/// Classifies the tail of a trajectory. `residual_fn(state)` returns the field norm.
///   converged:              residual <= tol and drift over the window <= tol;
///   limit_cycle_suspected:  residual >= 10 tol and the trajectory returns close to its
///                           final state (well below the drift) earlier in the window;
///   budget_exhausted:       anything else.
template <class ResidualFn>
Outcome detect_convergence(const std::vector<double>& times, const std::vector<State>& states,
                           ResidualFn&& residual_fn, double window, double tol) {
    Outcome out;
    if (states.empty()) return out;
    const State& last = states.back();
    const double t_last = times.back();
    out.limit = last;
    out.residual = residual_fn(last);

    double drift = 0.0;
    double early_return = std::numeric_limits<double>::infinity();
    std::size_t in_window = 0;
    for (std::size_t i = 0; i < states.size(); ++i) {
        if (times[i] < t_last - window) continue;
        ++in_window;
        const double d = distance_inf(states[i], last);
        drift = std::max(drift, d);
        if (times[i] <= t_last - 0.25 * window) early_return = std::min(early_return, d);
    }
    out.drift = drift;
    if (out.residual <= tol && drift <= tol) {
        out.kind = OutcomeKind::converged;
    } else if (out.residual >= 10.0 * tol && in_window >= 3 && drift > 0.0 && early_return < 0.1 * drift) {
        out.kind = OutcomeKind::limit_cycle_suspected;
    } else {
        out.kind = OutcomeKind::budget_exhausted;
    }
    return out;
}

namespace detail {

// Dormand-Prince 5(4) tableau.
struct Dopri5 {
    static constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static constexpr double a21 = 1.0 / 5;
    static constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                            a54 = -212.0 / 729;
    static constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                            a65 = -5103.0 / 18656;
    static constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                            a76 = 11.0 / 84;
    // error coefficients: b5 - b4
    static constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                            e6 = 22.0 / 525, e7 = -1.0 / 40;
};

}  // namespace detail

/// Adaptive Dormand-Prince 4(5) integration of dy/dt = field(y) on stacked state
/// vectors y = [x1; x2], starting at t = 0. `field(y, dy)` writes the derivative.
/// When `enforce_admissible` is set, tiny negative entries are clamped to zero
/// after each accepted step and larger excursions abort.
template <class Field, class ResidualFn>
Trajectory integrate_field(Field&& field, ResidualFn&& residual_fn, const State& s0, double t_end,
                           const IntegratorOptions& opt = {}) {
    using T = detail::Dopri5;
    if (!(t_end > 0.0)) throw DomainError("integrate: t_end must be positive");
    if (opt.enforce_admissible && !is_admissible(s0))
        throw DomainError("integrate: initial state outside the admissible set");

    Trajectory traj;
    const Eigen::Index dim = 2 * s0.n();
    Vec y = s0.stacked();
    Vec k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim), tmp(dim), ynew(dim), err(dim);

    traj.times.push_back(0.0);
    traj.states.push_back(s0);

    double t = 0.0;
    double h = std::min(opt.h0, t_end);
    double next_sample = opt.sample_dt > 0.0 ? opt.sample_dt : t_end;
    std::size_t since_record = 0;
    field(y, k1);

    while (t < t_end) {
        if (traj.accepted_steps + traj.rejected_steps >= opt.max_steps)
            throw IntegrationError("integrate: step budget exhausted", y);
        const double target = std::min(next_sample, t_end);
        double h_try = h;
        bool lands = false;
        if (t + h_try >= target - 1e-12 * std::max(1.0, target)) {
            h_try = target - t;
            lands = true;
        }
        if (h_try < opt.h_min) {
            if (!lands) throw IntegrationError("integrate: step size underflow", y);
        }

        tmp = y + h_try * T::a21 * k1;
        field(tmp, k2);
        tmp = y + h_try * (T::a31 * k1 + T::a32 * k2);
        field(tmp, k3);
        tmp = y + h_try * (T::a41 * k1 + T::a42 * k2 + T::a43 * k3);
        field(tmp, k4);
        tmp = y + h_try * (T::a51 * k1 + T::a52 * k2 + T::a53 * k3 + T::a54 * k4);
        field(tmp, k5);
        tmp = y + h_try * (T::a61 * k1 + T::a62 * k2 + T::a63 * k3 + T::a64 * k4 + T::a65 * k5);
        field(tmp, k6);
        ynew = y + h_try * (T::a71 * k1 + T::a73 * k3 + T::a74 * k4 + T::a75 * k5 + T::a76 * k6);
        field(ynew, k7);
        err = h_try * (T::e1 * k1 + T::e3 * k3 + T::e4 * k4 + T::e5 * k5 + T::e6 * k6 + T::e7 * k7);

        double acc = 0.0;
        for (Eigen::Index i = 0; i < dim; ++i) {
            const double sc = opt.atol + opt.rtol * std::max(std::abs(y(i)), std::abs(ynew(i)));
            const double r = err(i) / sc;
            acc += r * r;
        }
        const double enorm = std::sqrt(acc / static_cast<double>(dim));
        if (!std::isfinite(enorm)) throw IntegrationError("integrate: non-finite error estimate", y);

        const double factor = enorm == 0.0 ? 5.0 : std::clamp(0.9 * std::pow(enorm, -0.2), 0.2, 5.0);
        if (enorm > 1.0) {
            ++traj.rejected_steps;
            h = h_try * factor;
            if (h < opt.h_min) throw IntegrationError("integrate: step size underflow", y);
            continue;
        }

        ++traj.accepted_steps;
        t = lands ? target : t + h_try;
        y = ynew;
        k1 = k7;
        if (opt.enforce_admissible) {
            bool clamped = false;
            for (Eigen::Index i = 0; i < dim; ++i)
                if (y(i) < 0.0 && y(i) >= -kClampFloor) {
                    y(i) = 0.0;
                    clamped = true;
                }
            if (clamped) field(y, k1);
            const State s = State::from_stacked(y);
            if (!is_admissible(s)) {
                std::ostringstream os;
                os << "integrate: admissible set left by " << admissibility_violation(s) << " at t = " << t;
                throw IntegrationError(os.str(), y);
            }
        }
        // Grow from the attempted step, not the truncated one, when landing on a sample.
        h = lands ? std::max(h, h_try * factor) : h_try * factor;

        bool record = false;
        if (opt.sample_dt > 0.0) {
            if (lands && t >= next_sample - 1e-12 * std::max(1.0, next_sample)) {
                record = true;
                next_sample += opt.sample_dt;
            }
        } else if (++since_record >= std::max<std::size_t>(1, opt.stride)) {
            record = true;
            since_record = 0;
        }
        if (t >= t_end) record = true;
        if (record && traj.times.back() < t) {
            traj.times.push_back(t);
            traj.states.push_back(State::from_stacked(y));
        }
    }

    traj.outcome = detect_convergence(traj.times, traj.states, residual_fn, 0.1 * t_end, kConvergenceTol);
    return traj;
}

/// Integrates the bivirus flow from `s0` over [0, t_end].
inline Trajectory integrate(const BivirusSystem& sys, const State& s0, double t_end,
                            const IntegratorOptions& opt = {}) {
    if (s0.n() != sys.n()) throw DomainError("integrate: state dimension does not match system");
    const Eigen::Index n = sys.n();
    const Vec d1 = sys.D1().diagonal();
    const Vec d2 = sys.D2().diagonal();
    auto field = [&](const Vec& y, Vec& dy) {
        const auto x1 = y.head(n);
        const auto x2 = y.tail(n);
        const Vec susceptible = Vec::Ones(n) - x1 - x2;
        dy.head(n) = susceptible.cwiseProduct(sys.B1() * x1) - d1.cwiseProduct(x1);
        dy.tail(n) = susceptible.cwiseProduct(sys.B2() * x2) - d2.cwiseProduct(x2);
    };
    auto res = [&](const State& s) {
        FieldValue f;
        bivirus::detail::field_unchecked(sys, s.x1, s.x2, f.dx1, f.dx2);
        return f.norm_inf();
    };
    return integrate_field(field, res, s0, t_end, opt);
}

/// Re-run convergence detection with a custom window and tolerance.
inline Outcome detect_convergence(const BivirusSystem& sys, const Trajectory& traj, double window, double tol) {
    auto res = [&](const State& s) {
        FieldValue f;
        bivirus::detail::field_unchecked(sys, s.x1, s.x2, f.dx1, f.dx2);
        return f.norm_inf();
    };
    return detect_convergence(traj.times, traj.states, res, window, tol);
}

/// s1 <=_K s2 for the cone with m = (0, 1): s2.x1 >= s1.x1 and s2.x2 <= s1.x2.
inline bool order_leq(const State& s1, const State& s2, double slack = 0.0) {
    if (s1.n() != s2.n()) throw DomainError("order_leq: dimension mismatch");
    return (s2.x1 - s1.x1).minCoeff() >= -slack && (s1.x2 - s2.x2).minCoeff() >= -slack;
}

/// Sets entries below `threshold` to exactly zero; used to label limits that
/// approach a face of the admissible set.
inline State snap_to_faces(State s, double threshold = 1e-6) {
    if (s.x1.cwiseAbs().maxCoeff() <= threshold) s.x1.setZero();
    if (s.x2.cwiseAbs().maxCoeff() <= threshold) s.x2.setZero();
    return s;
}

// ---------------------------------------------------------------------------
// Sandwich harness

enum class SandwichStatus { agree, disagree, inconclusive };

inline const char* to_string(SandwichStatus s) {
    switch (s) {
        case SandwichStatus::agree: return "agree";
        case SandwichStatus::disagree: return "disagree";
        case SandwichStatus::inconclusive: return "inconclusive";
    }
    return "?";
}

/// Axis-parallel box spanned by two corner limits. Membership uses per-coordinate
/// min/max so it does not depend on which corner is which.
struct Hyperrectangle {
    State lo;
    State hi;

    static Hyperrectangle spanning(const State& a, const State& b) {
        return {{a.x1.cwiseMin(b.x1), a.x2.cwiseMin(b.x2)}, {a.x1.cwiseMax(b.x1), a.x2.cwiseMax(b.x2)}};
    }

    bool contains(const State& s, double slack = 0.0) const {
        return (s.x1 - lo.x1).minCoeff() >= -slack && (hi.x1 - s.x1).minCoeff() >= -slack &&
               (s.x2 - lo.x2).minCoeff() >= -slack && (hi.x2 - s.x2).minCoeff() >= -slack;
    }

    bool is_point(double tol) const { return distance_inf(lo, hi) <= tol; }
};

struct SandwichOptions {
    double eta = kDefaultEta;
    double t_end = kDefaultTEnd;
    double tol = kConvergenceTol;  // residual / drift tolerance for convergence
    double agree_tol = 1e-6;       // corner limits closer than this agree
    IntegratorOptions integrator{};
};

struct SandwichResult {
    SandwichStatus status = SandwichStatus::inconclusive;
    bool agree = false;
    double eta = 0.0;
    State start_A, start_B;
    State limit_A, limit_B;
    Hyperrectangle hyperrectangle;
    bool jittered_A = false;
    bool jittered_B = false;
    bool line_degenerate = false;  // a limit sits on a singular (non-isolated) equilibrium
    Trajectory trajectory_A, trajectory_B;
};

/// Corner initial conditions: A = (eta/2 * 1, (1 - eta) * 1), B = ((1 - eta) * 1, eta/2 * 1).
inline std::pair<State, State> sandwich_corners(Eigen::Index n, double eta) {
    State a{Vec::Constant(n, 0.5 * eta), Vec::Constant(n, 1.0 - eta)};
    State b{Vec::Constant(n, 1.0 - eta), Vec::Constant(n, 0.5 * eta)};
    return {a, b};
}

/// Deterministic perturbation of magnitude eta/10 with alternating signs over the
/// stacked state.
inline State jitter(const State& s, double eta) {
    Vec y = s.stacked();
    for (Eigen::Index i = 0; i < y.size(); ++i) y(i) += (i % 2 == 0 ? 1.0 : -1.0) * eta / 10.0;
    return State::from_stacked(y);
}

inline SandwichResult sandwich_test(const BivirusSystem& sys, const SandwichOptions& opt = {}) {
    if (!(opt.eta > 0.0 && opt.eta <= 0.1)) throw DomainError("sandwich_test: eta must lie in (0, 0.1]");
    SandwichResult out;
    out.eta = opt.eta;
    std::tie(out.start_A, out.start_B) = sandwich_corners(sys.n(), opt.eta);

    auto run = [&](const State& start, bool& jittered) {
        Trajectory tr = integrate(sys, start, opt.t_end, opt.integrator);
        tr.outcome = detect_convergence(sys, tr, 0.1 * opt.t_end, opt.tol);
        if (tr.outcome.kind != OutcomeKind::converged) {
            jittered = true;
            tr = integrate(sys, jitter(start, opt.eta), opt.t_end, opt.integrator);
            tr.outcome = detect_convergence(sys, tr, 0.1 * opt.t_end, opt.tol);
        }
        return tr;
    };
    out.trajectory_A = run(out.start_A, out.jittered_A);
    out.trajectory_B = run(out.start_B, out.jittered_B);
    out.limit_A = out.trajectory_A.final_state();
    out.limit_B = out.trajectory_B.final_state();
    out.hyperrectangle = Hyperrectangle::spanning(out.limit_A, out.limit_B);

    const bool conv_A = out.trajectory_A.outcome.kind == OutcomeKind::converged;
    const bool conv_B = out.trajectory_B.outcome.kind == OutcomeKind::converged;
    if (!conv_A || !conv_B) {
        out.status = SandwichStatus::inconclusive;
        return out;
    }
    out.agree = distance_inf(out.limit_A, out.limit_B) <= opt.agree_tol;
    out.status = out.agree ? SandwichStatus::agree : SandwichStatus::disagree;
    for (const State* lim : {&out.limit_A, &out.limit_B}) {
        const double s = speclin::spectral_abscissa(transformed_jacobian(sys, snap_to_faces(*lim)));
        if (std::abs(s) <= 1e-6) out.line_degenerate = true;
    }
    return out;
}

/// Seeded random starts inside the corner order interval: every coordinate in
/// [eta/2, 1 - eta] with x1_i + x2_i <= 1, sampled by reflecting the unit square
/// onto its lower triangle.
inline std::vector<State> random_interior_starts(Eigen::Index n, double eta, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double lo = 0.5 * eta;
    const double hi = 1.0 - eta;
    std::vector<State> starts;
    starts.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        State s{Vec(n), Vec(n)};
        for (Eigen::Index i = 0; i < n; ++i) {
            double u = unit(rng);
            double v = unit(rng);
            if (u + v > 1.0) {
                u = 1.0 - u;
                v = 1.0 - v;
            }
            s.x1(i) = std::clamp(u, lo, hi);
            s.x2(i) = std::clamp(v, lo, hi);
            if (s.x1(i) + s.x2(i) > 1.0) s.x2(i) = 1.0 - s.x1(i);
        }
        starts.push_back(std::move(s));
    }
    return starts;
}

// ---------------------------------------------------------------------------
// Basin probing

struct GridSpec {
    std::size_t steps = 10;
    Vec x2_slice;  // fixed x2 for every start; x1 is gridded inside [0, 1 - x2]
};

/// Grid of starts: x1_i = (k_i + 1/2) / steps * (1 - x2_i) over all multi-indices k.
inline std::vector<State> grid_starts(const GridSpec& spec) {
    const Eigen::Index n = spec.x2_slice.size();
    if (n == 0 || spec.steps == 0) throw DomainError("grid_starts: empty grid");
    const double total = std::pow(static_cast<double>(spec.steps), static_cast<double>(n));
    if (total > 1e6) throw DomainError("grid_starts: grid too large");
    std::vector<State> starts;
    std::vector<std::size_t> k(static_cast<std::size_t>(n), 0);
    while (true) {
        State s{Vec(n), spec.x2_slice};
        for (Eigen::Index i = 0; i < n; ++i)
            s.x1(i) = (static_cast<double>(k[static_cast<std::size_t>(i)]) + 0.5) /
                      static_cast<double>(spec.steps) * (1.0 - spec.x2_slice(i));
        starts.push_back(std::move(s));
        Eigen::Index d = n - 1;
        while (d >= 0 && ++k[static_cast<std::size_t>(d)] == spec.steps) k[static_cast<std::size_t>(d--)] = 0;
        if (d < 0) break;
    }
    return starts;
}

struct BasinResult {
    std::vector<State> starts;
    std::vector<State> limits;
    std::vector<int> labels;            // index into the equilibrium list, -1 = unresolved
    std::vector<std::size_t> counts;    // starts per equilibrium
    std::size_t unresolved = 0;

    std::size_t distinct_labels() const {
        return static_cast<std::size_t>(std::count_if(counts.begin(), counts.end(), [](std::size_t c) { return c > 0; }));
    }
};

/// Integrates from every start and labels it by the equilibrium its final state
/// lies within `radius` of (infinity norm), or -1.
inline BasinResult basin_probe(const BivirusSystem& sys, const std::vector<Equilibrium>& equilibria,
                               const std::vector<State>& starts, double t_end = kDefaultTEnd,
                               double radius = kLabelRadius, const IntegratorOptions& opt = {}) {
    BasinResult out;
    out.starts = starts;
    out.counts.assign(equilibria.size(), 0);
    for (const State& s0 : starts) {
        const Trajectory tr = integrate(sys, s0, t_end, opt);
        const State& last = tr.final_state();
        int label = -1;
        double best = radius;
        for (std::size_t e = 0; e < equilibria.size(); ++e) {
            const double d = distance_inf(last, equilibria[e].state);
            if (d <= best) {
                best = d;
                label = static_cast<int>(e);
            }
        }
        out.limits.push_back(last);
        out.labels.push_back(label);
        if (label < 0) ++out.unresolved;
        else ++out.counts[static_cast<std::size_t>(label)];
    }
    return out;
}

inline BasinResult basin_probe(const BivirusSystem& system, const std::vector<Equilibrium>& equilibria,
                               const GridSpec& grid, double t_end = kDefaultTEnd) {
    return basin_probe(system, equilibria, grid_starts(grid), t_end);
}

}  // namespace bivirus::sim
