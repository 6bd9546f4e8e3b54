#pragma once

// Locating and classifying equilibria of the bivirus system:
//   * single-virus endemic profiles and the boundary equilibria built from them,
//   * the spectral boundary-stability test and the cheap sufficient conditions,
//   * the closed-form two-node coexistence solver,
//   * a damped Newton multi-start search for general n,
//   * the nongeneric construction B2 = mu (I - Z)^-1 C producing a line of
//     equilibria {(a z, (1 - a) z) : a in [0, 1]} at mu = 1.

#include "bivirus/errors.hpp"
#include "bivirus/model.hpp"
#include "bivirus/speclin.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

namespace bivirus {

inline constexpr double kResidualTol = 1e-12;
inline constexpr double kDedupRadius = 1e-6;
inline constexpr double kZeroTol = 1e-12;

enum class EquilibriumKind { healthy, boundary_virus1, boundary_virus2, coexistence };
enum class SpectrumClass { stable, unstable, singular_boundary };

inline const char* to_string(EquilibriumKind k) {
    switch (k) {
        case EquilibriumKind::healthy: return "healthy";
        case EquilibriumKind::boundary_virus1: return "boundary_virus1";
        case EquilibriumKind::boundary_virus2: return "boundary_virus2";
        case EquilibriumKind::coexistence: return "coexistence";
    }
    return "?";
}

inline const char* to_string(SpectrumClass c) {
    switch (c) {
        case SpectrumClass::stable: return "stable";
        case SpectrumClass::unstable: return "unstable";
        case SpectrumClass::singular_boundary: return "singular_boundary";
    }
    return "?";
}

inline SpectrumClass to_spectrum_class(speclin::MetzlerClass c) {
    switch (c) {
        case speclin::MetzlerClass::hurwitz: return SpectrumClass::stable;
        case speclin::MetzlerClass::unstable: return SpectrumClass::unstable;
        case speclin::MetzlerClass::singular_boundary: break;
    }
    return SpectrumClass::singular_boundary;
}

struct Equilibrium {
    State state;
    EquilibriumKind kind = EquilibriumKind::healthy;
    double residual = 0.0;
    SpectrumClass spectrum_class = SpectrumClass::unstable;
    double abscissa = 0.0;  // spectral abscissa of the transformed Jacobian
};

/// Kind from the zero pattern: each xi must be identically zero or entrywise positive.
inline EquilibriumKind equilibrium_kind(const State& s, double zero_tol = kZeroTol) {
    auto pattern = [zero_tol](const Vec& x) -> int {
        if (x.cwiseAbs().maxCoeff() <= zero_tol) return 0;
        if (x.minCoeff() > zero_tol) return 1;
        return -1;
    };
    const int p1 = pattern(s.x1);
    const int p2 = pattern(s.x2);
    if (p1 < 0 || p2 < 0) throw DomainError("state violates the zero-pattern dichotomy of equilibria");
    if (p1 == 0 && p2 == 0) return EquilibriumKind::healthy;
    if (p2 == 0) return EquilibriumKind::boundary_virus1;
    if (p1 == 0) return EquilibriumKind::boundary_virus2;
    return EquilibriumKind::coexistence;
}

/// Attaches kind, residual and spectral class to an equilibrium location.
inline Equilibrium classify_equilibrium(const BivirusSystem& sys, State s,
                                        double class_tol = speclin::kClassifyTol) {
    Equilibrium e;
    e.kind = equilibrium_kind(s);
    e.residual = residual(sys, s);
    e.abscissa = speclin::spectral_abscissa(transformed_jacobian(sys, s));
    e.spectrum_class = to_spectrum_class(speclin::classify_abscissa(e.abscissa, class_tol));
    e.state = std::move(s);
    return e;
}

namespace detail {

inline double single_residual(const Mat& B, const Vec& delta, const Vec& x) {
    const Vec bx = B * x;
    return (-(delta.cwiseProduct(x)) + (Vec::Ones(x.size()) - x).cwiseProduct(bx)).cwiseAbs().maxCoeff();
}

inline std::optional<Vec> newton_single(const Mat& B, const Vec& delta, Vec x, double tol) {
    const Eigen::Index n = x.size();
    for (int it = 0; it < 30; ++it) {
        const Vec bx = B * x;
        const Vec f = -(delta.cwiseProduct(x)) + (Vec::Ones(n) - x).cwiseProduct(bx);
        if (f.cwiseAbs().maxCoeff() <= tol) break;
        Mat J = (Vec::Ones(n) - x).asDiagonal() * B;
        J.diagonal() -= delta + bx;
        x -= J.partialPivLu().solve(f);
        if (!x.allFinite()) return std::nullopt;
    }
    if (!(x.minCoeff() > 0.0 && x.maxCoeff() < 1.0)) return std::nullopt;
    if (single_residual(B, delta, x) > tol) return std::nullopt;
    return x;
}

}  // namespace detail

/// Endemic equilibrium of the single-virus system dx/dt = [-D + (I - X) B] x, or
/// nullopt when rho(D^-1 B) <= 1. Uses the fixed-point map
/// x_i <- (Bx)_i / (delta_i + (Bx)_i) from 0.5 * 1, polished by Newton.
inline std::optional<Vec> single_virus_endemic(const Mat& B, const Mat& D, double tol = kResidualTol) {
    speclin::require_square(B, "single_virus_endemic");
    const Vec delta = speclin::positive_diagonal(D).diagonal();
    if (delta.size() != B.rows()) throw DomainError("single_virus_endemic: dimension mismatch");
    const Mat scaled = delta.cwiseInverse().asDiagonal() * B;
    if (speclin::spectral_radius(scaled) <= 1.0) return std::nullopt;

    const Eigen::Index n = B.rows();
    Vec x = Vec::Constant(n, 0.5);
    constexpr int kMaxIterations = 200000;
    for (int it = 1; it <= kMaxIterations; ++it) {
        const Vec bx = B * x;
        Vec next = bx.cwiseQuotient(delta + bx);
        const double change = (next - x).cwiseAbs().maxCoeff();
        x = std::move(next);
        if (change <= 1e-8 || it % 1000 == 0) {
            if (auto polished = detail::newton_single(B, delta, x, tol)) return polished;
        }
        if (change == 0.0) break;
    }
    if (detail::single_residual(B, delta, x) <= tol) return x;
    throw NumericError("single_virus_endemic: iteration cap exceeded", x);
}

// ---------------------------------------------------------------------------
// Boundary equilibria

enum class BoundaryClass { locally_stable, unstable, critical };

inline const char* to_string(BoundaryClass v) {
    switch (v) {
        case BoundaryClass::locally_stable: return "locally_stable";
        case BoundaryClass::unstable: return "unstable";
        case BoundaryClass::critical: return "critical";
    }
    return "?";
}

struct BoundaryVerdict {
    Vec profile;           // the surviving virus' endemic profile
    double rho_cross = 0;  // rho((I - Xi) Bj) for the absent virus j
    BoundaryClass verdict = BoundaryClass::critical;
};

/// Verdicts for (x1bar, 0) and (0, x2bar). A side is nullopt when that virus is
/// subcritical, i.e. the boundary equilibrium does not exist.
struct BoundaryStability {
    std::optional<BoundaryVerdict> virus1;
    std::optional<BoundaryVerdict> virus2;
};

/// (x_i, 0) is locally exponentially stable iff rho((I - X_i) B_j) < 1 and
/// unstable if > 1. Works on the recovery-normalized system.
inline BoundaryStability boundary_stability(const BivirusSystem& system, double tol = speclin::kClassifyTol) {
    const BivirusSystem sys = normalize_recovery(system);
    const Mat I = Mat::Identity(sys.n(), sys.n());
    BoundaryStability out;
    auto verdict_for = [&](int present, int absent) -> std::optional<BoundaryVerdict> {
        auto profile = single_virus_endemic(sys.B(present), I);
        if (!profile) return std::nullopt;
        BoundaryVerdict v;
        const Mat cross = (Vec::Ones(sys.n()) - *profile).asDiagonal() * sys.B(absent);
        v.rho_cross = speclin::spectral_radius(cross);
        if (v.rho_cross < 1.0 - tol) v.verdict = BoundaryClass::locally_stable;
        else if (v.rho_cross > 1.0 + tol) v.verdict = BoundaryClass::unstable;
        else v.verdict = BoundaryClass::critical;
        v.profile = std::move(*profile);
        return v;
    };
    out.virus1 = verdict_for(1, 2);
    out.virus2 = verdict_for(2, 1);
    return out;
}

enum class TriState { holds_for_virus2, holds_for_virus1, inconclusive };

inline const char* to_string(TriState t) {
    switch (t) {
        case TriState::holds_for_virus2: return "holds_for_virus2";
        case TriState::holds_for_virus1: return "holds_for_virus1";
        case TriState::inconclusive: return "inconclusive";
    }
    return "?";
}

/// Sufficient conditions under which one virus' boundary equilibrium is stable,
/// the other's unstable (and, for the first two, no coexistence equilibrium exists).
/// "holds_for_virus2" means virus 2 dominates.
struct SufficientConditions {
    TriState entrywise_dominance = TriState::inconclusive;  // B2 > B1
    TriState row_sum_gap = TriState::inconclusive;          // min row sum B2 > max row sum B1
    TriState profile_dominance = TriState::inconclusive;    // x2bar > x1bar
};

namespace detail {

// a > b in the partial order: a >= b entrywise and a != b (beyond tol).
template <class A, class B>
bool strictly_dominates(const A& a, const B& b, double tol) {
    const auto diff = (a - b).eval();
    return diff.minCoeff() >= -tol && diff.maxCoeff() > tol;
}

}  // namespace detail

inline SufficientConditions sufficient_conditions(const BivirusSystem& system, double tol = speclin::kClassifyTol) {
    const BivirusSystem sys = normalize_recovery(system);
    const Mat I = Mat::Identity(sys.n(), sys.n());
    const auto x1 = single_virus_endemic(sys.B1(), I);
    const auto x2 = single_virus_endemic(sys.B2(), I);
    if (!x1 || !x2) throw DomainError("sufficient_conditions: both viruses must be supercritical");

    SufficientConditions out;
    if (detail::strictly_dominates(sys.B2(), sys.B1(), 0.0)) out.entrywise_dominance = TriState::holds_for_virus2;
    else if (detail::strictly_dominates(sys.B1(), sys.B2(), 0.0)) out.entrywise_dominance = TriState::holds_for_virus1;

    const Vec rows1 = sys.B1().rowwise().sum();
    const Vec rows2 = sys.B2().rowwise().sum();
    if (rows2.minCoeff() > rows1.maxCoeff()) out.row_sum_gap = TriState::holds_for_virus2;
    else if (rows1.minCoeff() > rows2.maxCoeff()) out.row_sum_gap = TriState::holds_for_virus1;

    if (detail::strictly_dominates(*x2, *x1, tol)) out.profile_dominance = TriState::holds_for_virus2;
    else if (detail::strictly_dominates(*x1, *x2, tol)) out.profile_dominance = TriState::holds_for_virus1;
    return out;
}

// ---------------------------------------------------------------------------
// Coexistence equilibria

namespace detail {

// Drops points within `radius` of an earlier point, after a lexicographic sort
// so the result does not depend on input order.
inline std::vector<State> deduplicate(std::vector<State> points, double radius) {
    std::sort(points.begin(), points.end(), [](const State& a, const State& b) {
        const Vec va = a.stacked(), vb = b.stacked();
        return std::lexicographical_compare(va.data(), va.data() + va.size(), vb.data(), vb.data() + vb.size());
    });
    std::vector<State> kept;
    for (auto& p : points) {
        const bool dup = std::any_of(kept.begin(), kept.end(),
                                     [&](const State& q) { return distance_inf(p, q) <= radius; });
        if (!dup) kept.push_back(std::move(p));
    }
    return kept;
}

}  // namespace detail

/// Result of the closed-form two-node solver.
struct N2Solution {
    std::vector<Equilibrium> roots;  // strictly interior coexistence equilibria
    bool line_degenerate = false;    // linear recovery step singular: equilibria are not isolated
    bool double_root = false;        // discriminant inside the tie band
    std::vector<double> alphas;      // every real root of the quadratic, before filtering
    std::vector<std::string> diagnostics;
};

/// Two-node coexistence equilibria. With a = x1_2 / x1_1 and g = x2_2 / x2_1 the
/// equilibrium equations reduce to
///   b1_11 + b1_12 a = b2_11 + b2_12 g,   b1_21 / a + b1_22 = b2_21 / g + b2_22;
/// eliminating g gives a quadratic in a. Each root yields the susceptible
/// fractions s_i and a 2x2 linear system for (x1_1, x2_1).
inline N2Solution solve_coexistence_n2(const BivirusSystem& system) {
    if (system.n() != 2) throw DomainError("solve_coexistence_n2: requires n = 2");
    const BivirusSystem sys = normalize_recovery(system);
    const Mat& P = sys.B1();
    const Mat& Q = sys.B2();
    N2Solution out;

    // Q(0,1) > 0 because a 2x2 irreducible matrix has positive off-diagonals.
    const double p = P(1, 1) - Q(1, 1);
    const double q = P(0, 0) - Q(0, 0);
    const double a2 = p * P(0, 1);
    const double a1 = P(1, 0) * P(0, 1) + p * q - Q(1, 0) * Q(0, 1);
    const double a0 = P(1, 0) * q;

    std::vector<double> alphas;
    const double scale = std::abs(a1) + std::abs(a0);
    if (std::abs(a2) <= 1e-12 * std::max(scale, 1.0)) {
        if (std::abs(a1) <= 1e-12 * std::max(std::abs(a0), 1.0)) {
            if (std::abs(a0) <= 1e-12) {
                out.line_degenerate = true;
                out.diagnostics.push_back("quadratic vanishes identically: a continuum of ratios solves the system");
            }
            return out;
        }
        alphas.push_back(-a0 / a1);
        out.diagnostics.push_back("leading coefficient vanishes: using the linear root");
    } else {
        const double disc = a1 * a1 - 4.0 * a2 * a0;
        if (disc < -1e-12) return out;
        if (std::abs(disc) <= 1e-12) {
            out.double_root = true;
            alphas.push_back(-a1 / (2.0 * a2));
        } else {
            // Cancellation-free pair of roots.
            const double t = -0.5 * (a1 + std::copysign(std::sqrt(disc), a1));
            alphas.push_back(t / a2);
            if (t != 0.0) alphas.push_back(a0 / t);
            else alphas.push_back(-a1 / a2);
        }
    }
    out.alphas = alphas;

    std::vector<State> found;
    for (const double alpha : alphas) {
        if (!(std::abs(alpha) > 1e-12)) {
            out.diagnostics.push_back("root a ~ 0 rejected (division by near-zero ratio)");
            continue;
        }
        if (alpha < 0.0) continue;  // x1 would change sign between nodes
        const double gamma = (q + P(0, 1) * alpha) / Q(0, 1);
        if (!(gamma > 0.0)) continue;
        const double s1 = 1.0 / (P(0, 0) + P(0, 1) * alpha);
        const double s2 = 1.0 / (P(1, 0) / alpha + P(1, 1));
        const double det = gamma - alpha;
        if (std::abs(det) <= 1e-9 * std::max(1.0, std::abs(alpha))) {
            out.line_degenerate = true;
            std::ostringstream os;
            os << "ratios coincide (a = g = " << alpha << "): equilibria form a segment";
            out.diagnostics.push_back(os.str());
            continue;
        }
        // [1 1; a g] [u; v] = [1 - s1; 1 - s2]
        const double r1 = 1.0 - s1, r2 = 1.0 - s2;
        const double u = (gamma * r1 - r2) / det;
        const double v = (r2 - alpha * r1) / det;
        State s{Vec(2), Vec(2)};
        s.x1 << u, alpha * u;
        s.x2 << v, gamma * v;
        if (is_strictly_interior(s)) found.push_back(std::move(s));
    }
    for (auto& s : detail::deduplicate(std::move(found), kDedupRadius))
        out.roots.push_back(classify_equilibrium(system, std::move(s)));
    return out;
}

struct SeedFailure {
    std::size_t seed_index = 0;
    std::string reason;
};

struct NewtonSearch {
    std::vector<Equilibrium> roots;
    std::vector<SeedFailure> failures;
    bool line_degenerate = false;  // some root has a singular transformed Jacobian
};

struct NewtonOptions {
    double tol = kResidualTol;
    int max_iterations = 100;
    double dedup_radius = kDedupRadius;
};

namespace detail {

// Damped Newton on the full 2n-dimensional residual. The step is the minimum-norm
// least-squares solution so a singular Jacobian (continuum of roots) still yields
// a usable direction.
inline std::optional<Vec> damped_newton(const BivirusSystem& sys, Vec x, const NewtonOptions& opt,
                                        std::string& why) {
    const Eigen::Index n = sys.n();
    Vec f1(n), f2(n);
    auto eval = [&](const Vec& v) {
        Vec f(2 * n);
        field_unchecked(sys, v.head(n), v.tail(n), f1, f2);
        f << f1, f2;
        return f;
    };
    Vec f = eval(x);
    double norm = f.cwiseAbs().maxCoeff();
    for (int it = 0; it < opt.max_iterations; ++it) {
        if (norm <= opt.tol) return x;
        const Mat J = jacobian_unchecked(sys, x.head(n), x.tail(n));
        Eigen::CompleteOrthogonalDecomposition<Mat> cod(J);
        cod.setThreshold(1e-10);
        const Vec step = cod.solve(-f);
        if (!step.allFinite()) {
            why = "non-finite Newton step";
            return std::nullopt;
        }
        double lambda = 1.0;
        Vec trial = x + step;
        Vec ft = eval(trial);
        double tnorm = ft.cwiseAbs().maxCoeff();
        while (!(tnorm < (1.0 - 1e-4 * lambda) * norm) && lambda > 1e-6) {
            lambda *= 0.5;
            trial = x + lambda * step;
            ft = eval(trial);
            tnorm = ft.cwiseAbs().maxCoeff();
        }
        if (!(tnorm < norm)) {
            if (norm <= 100.0 * opt.tol) return x;
            why = "line search stalled";
            return std::nullopt;
        }
        x = std::move(trial);
        f = std::move(ft);
        norm = tnorm;
    }
    if (norm <= opt.tol) return x;
    why = "iteration cap reached";
    return std::nullopt;
}

}  // namespace detail

/// Multi-start damped Newton for coexistence equilibria. Roots outside the open
/// admissible set or with a zero entry are discarded; the rest are deduplicated.
inline NewtonSearch find_coexistence_newton(const BivirusSystem& system, const std::vector<State>& seeds,
                                            const NewtonOptions& opt = {}) {
    const BivirusSystem sys = normalize_recovery(system);
    NewtonSearch out;
    std::vector<State> found;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
        const State& seed = seeds[i];
        if (seed.n() != sys.n()) throw DomainError("find_coexistence_newton: seed dimension mismatch");
        std::string why;
        auto root = detail::damped_newton(sys, seed.stacked(), opt, why);
        if (!root) {
            out.failures.push_back({i, why});
            continue;
        }
        State s = State::from_stacked(*root);
        if (s.x1.minCoeff() > kZeroTol && s.x2.minCoeff() > kZeroTol && (s.x1 + s.x2).maxCoeff() < 1.0)
            found.push_back(std::move(s));
    }
    for (auto& s : detail::deduplicate(std::move(found), opt.dedup_radius)) {
        Equilibrium e = classify_equilibrium(system, std::move(s));
        if (e.spectrum_class == SpectrumClass::singular_boundary) out.line_degenerate = true;
        out.roots.push_back(std::move(e));
    }
    return out;
}

/// Seeds (a x1bar, b x2bar) for a, b in {0.1, ..., 0.9}, keeping those inside the
/// open admissible set.
inline std::vector<State> profile_seed_grid(const Vec& x1bar, const Vec& x2bar) {
    std::vector<State> seeds;
    for (int i = 1; i <= 9; ++i)
        for (int j = 1; j <= 9; ++j) {
            State s{0.1 * i * x1bar, 0.1 * j * x2bar};
            if (is_strictly_interior(s)) seeds.push_back(std::move(s));
        }
    return seeds;
}

struct EquilibriumSet {
    ReproductionNumbers R;
    std::vector<Equilibrium> equilibria;  // healthy, boundary 1, boundary 2, coexistence...
    bool degenerate = false;              // line of equilibria suspected
    std::vector<std::string> notes;

    const Equilibrium* find(EquilibriumKind k) const {
        for (const auto& e : equilibria)
            if (e.kind == k) return &e;
        return nullptr;
    }

    std::size_t count(EquilibriumKind k) const {
        return static_cast<std::size_t>(
            std::count_if(equilibria.begin(), equilibria.end(), [k](const Equilibrium& e) { return e.kind == k; }));
    }
};

/// All equilibria, located on the recovery-normalized system and classified on
/// the original one.
inline EquilibriumSet enumerate_equilibria(const BivirusSystem& system, double tol = kResidualTol) {
    const BivirusSystem sys = normalize_recovery(system);
    const Eigen::Index n = sys.n();
    const Mat I = Mat::Identity(n, n);
    EquilibriumSet out;
    out.R = reproduction_numbers(sys);
    out.equilibria.push_back(classify_equilibrium(system, State::healthy(n)));

    const auto x1 = single_virus_endemic(sys.B1(), I, tol);
    const auto x2 = single_virus_endemic(sys.B2(), I, tol);
    if (x1) out.equilibria.push_back(classify_equilibrium(system, State{*x1, Vec::Zero(n)}));
    if (x2) out.equilibria.push_back(classify_equilibrium(system, State{Vec::Zero(n), *x2}));
    for (const auto& e : out.equilibria)
        if (e.spectrum_class == SpectrumClass::singular_boundary)
            out.notes.push_back(std::string(to_string(e.kind)) + " equilibrium is critical (nongeneric parameters)");
    if (!x1 || !x2) return out;

    if (n == 2) {
        N2Solution sol = solve_coexistence_n2(system);
        if (sol.line_degenerate) out.degenerate = true;
        for (auto& d : sol.diagnostics) out.notes.push_back(std::move(d));
        for (auto& e : sol.roots) out.equilibria.push_back(std::move(e));
    } else {
        NewtonOptions opt;
        opt.tol = tol;
        NewtonSearch search = find_coexistence_newton(system, profile_seed_grid(*x1, *x2), opt);
        if (search.line_degenerate) out.degenerate = true;
        for (auto& e : search.roots) out.equilibria.push_back(std::move(e));
    }
    for (const auto& e : out.equilibria)
        if (e.kind == EquilibriumKind::coexistence && e.spectrum_class == SpectrumClass::singular_boundary)
            out.degenerate = true;
    if (out.degenerate) out.notes.push_back("line of equilibria suspected");
    return out;
}

// ---------------------------------------------------------------------------
// Line-of-equilibria construction

namespace line_strategy {

/// C = z q^T with q = z / (z^T z).
struct RankOne {};

/// C = (1 - weight) z q^T + weight * diag(z ./ (U z)) U. The second term is U
/// row-scaled so that it fixes z.
struct Blend {
    Mat U;
    double weight = 0.5;
};

/// User-supplied C; must be nonnegative, irreducible and satisfy C z = z.
struct Explicit {
    Mat C;
};

}  // namespace line_strategy

using LineStrategy = std::variant<line_strategy::RankOne, line_strategy::Blend, line_strategy::Explicit>;

struct LineFamily {
    Vec z;      // endemic profile of virus 1 alone
    Mat C;      // nonnegative irreducible, C z = z
    Mat B2;     // mu (I - Z)^-1 C
    double mu = 1.0;

    State point(double alpha) const { return {alpha * z, (1.0 - alpha) * z}; }
};

struct ConstructedLine {
    BivirusSystem system;
    LineFamily family;
};

inline ConstructedLine construct_equilibrium_line(const Mat& B1, double mu, const LineStrategy& strategy = {}) {
    speclin::require_square(B1, "construct_equilibrium_line");
    if (!speclin::is_nonnegative(B1) || !speclin::pattern_irreducible(B1))
        throw DomainError("construct_equilibrium_line: B1 must be nonnegative and irreducible");
    if (!(mu > 0.0)) throw DomainError("construct_equilibrium_line: mu must be positive");
    const Eigen::Index n = B1.rows();
    const Mat I = Mat::Identity(n, n);
    auto zopt = single_virus_endemic(B1, I);
    if (!zopt) throw DomainError("construct_equilibrium_line: B1 is subcritical (rho(B1) <= 1)");
    const Vec z = *zopt;
    const Mat rank_one = z * (z / z.squaredNorm()).transpose();

    Mat C = std::visit(
        [&](const auto& s) -> Mat {
            using S = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<S, line_strategy::RankOne>) {
                return rank_one;
            } else if constexpr (std::is_same_v<S, line_strategy::Blend>) {
                if (s.U.rows() != n || s.U.cols() != n || !speclin::is_nonnegative(s.U) ||
                    !speclin::pattern_irreducible(s.U))
                    throw DomainError("construct_equilibrium_line: blend matrix must be nonnegative irreducible n x n");
                if (!(s.weight >= 0.0 && s.weight <= 1.0))
                    throw DomainError("construct_equilibrium_line: blend weight must lie in [0, 1]");
                const Vec Uz = s.U * z;
                const Mat projected = z.cwiseQuotient(Uz).asDiagonal() * s.U;
                return (1.0 - s.weight) * rank_one + s.weight * projected;
            } else {
                if (s.C.rows() != n || s.C.cols() != n || !speclin::is_nonnegative(s.C) ||
                    !speclin::pattern_irreducible(s.C))
                    throw DomainError("construct_equilibrium_line: C must be nonnegative irreducible n x n");
                if ((s.C * z - z).cwiseAbs().maxCoeff() > 1e-9)
                    throw DomainError("construct_equilibrium_line: C z = z violated");
                return s.C;
            }
        },
        strategy);

    Mat B2 = mu * (Vec::Ones(n) - z).cwiseInverse().asDiagonal() * C;
    LineFamily family{z, std::move(C), B2, mu};
    return {make_system(B1, std::move(B2)), std::move(family)};
}

/// Stability of (z, 0) in a constructed system: stable for mu < 1, a saddle for
/// mu > 1, critical at the bifurcation mu = 1.
inline SpectrumClass line_endpoint_class(const ConstructedLine& line) {
    const Eigen::Index n = line.system.n();
    return classify_equilibrium(line.system, State{line.family.z, Vec::Zero(n)}).spectrum_class;
}

}  // namespace bivirus
