#pragma once

// The networked bivirus SIS system: parameters, state space, vector field and
// Jacobians.
//
//   dx1/dt = [-D1 + (I - X1 - X2) B1] x1
//   dx2/dt = [-D2 + (I - X1 - X2) B2] x2
//
// with Xi = diag(xi). States live in the closed set
//   { 0 <= x1, 0 <= x2, x1 + x2 <= 1 }  (entrywise).

#include "bivirus/errors.hpp"
#include "bivirus/speclin.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bivirus {

/// States may leave the admissible set by this much before being rejected.
inline constexpr double kStateSlack = 1e-9;

struct State {
    Vec x1;
    Vec x2;

    Eigen::Index n() const { return x1.size(); }

    Vec stacked() const {
        Vec out(2 * n());
        out << x1, x2;
        return out;
    }

    static State from_stacked(const Vec& v) {
        const Eigen::Index n = v.size() / 2;
        return {v.head(n), v.tail(n)};
    }

    static State healthy(Eigen::Index n) { return {Vec::Zero(n), Vec::Zero(n)}; }
};

inline double distance_inf(const State& a, const State& b) {
    return std::max((a.x1 - b.x1).cwiseAbs().maxCoeff(), (a.x2 - b.x2).cwiseAbs().maxCoeff());
}

/// Largest amount by which `s` violates the admissible set (0 when inside).
inline double admissibility_violation(const State& s) {
    double v = 0.0;
    v = std::max(v, -s.x1.minCoeff());
    v = std::max(v, -s.x2.minCoeff());
    v = std::max(v, (s.x1 + s.x2).maxCoeff() - 1.0);
    v = std::max(v, s.x1.maxCoeff() - 1.0);
    v = std::max(v, s.x2.maxCoeff() - 1.0);
    return v;
}

inline bool is_admissible(const State& s, double slack = kStateSlack) {
    return s.x1.allFinite() && s.x2.allFinite() && admissibility_violation(s) <= slack;
}

/// Strict interior: every entry positive and x1 + x2 << 1.
inline bool is_strictly_interior(const State& s) {
    return s.x1.minCoeff() > 0.0 && s.x2.minCoeff() > 0.0 && (s.x1 + s.x2).maxCoeff() < 1.0;
}

/// Parameters as read from a config, before any checking.
struct SystemCandidate {
    Mat B1, D1, B2, D2;
};

struct ValidationReport {
    std::vector<std::string> violations;
    bool ok() const { return violations.empty(); }
};

namespace detail {

inline void check_infection(const Mat& B, const char* name, std::vector<std::string>& out) {
    if (!B.allFinite()) {
        out.push_back(std::string(name) + ": non-finite entry");
        return;
    }
    if (!speclin::is_nonnegative(B)) {
        out.push_back(std::string(name) + ": negative infection rate");
        return;
    }
    if (!speclin::pattern_irreducible(B)) out.push_back(std::string(name) + ": irreducibility violated");
}

inline void check_recovery(const Mat& D, const char* name, std::vector<std::string>& out) {
    if (!D.allFinite()) {
        out.push_back(std::string(name) + ": non-finite entry");
        return;
    }
    for (Eigen::Index i = 0; i < D.rows(); ++i)
        for (Eigen::Index j = 0; j < D.cols(); ++j) {
            if (i == j && !(D(i, i) > 0.0)) {
                std::ostringstream os;
                os << name << ": nonpositive recovery rate at node " << i;
                out.push_back(os.str());
            } else if (i != j && D(i, j) != 0.0) {
                std::ostringstream os;
                os << name << ": off-diagonal entry (" << i << "," << j << ") must be zero";
                out.push_back(os.str());
            }
        }
}

}  // namespace detail

/// Lists every violated standing assumption of a candidate system.
inline ValidationReport check_system(const SystemCandidate& c) {
    ValidationReport report;
    const Eigen::Index n = c.B1.rows();
    const std::pair<const Mat*, const char*> mats[] = {
        {&c.B1, "B1"}, {&c.D1, "D1"}, {&c.B2, "B2"}, {&c.D2, "D2"}};
    bool shapes_ok = n > 0;
    for (const auto& [m, name] : mats) {
        if (m->rows() != n || m->cols() != n) {
            std::ostringstream os;
            os << "dimension mismatch: " << name << " is " << m->rows() << "x" << m->cols()
               << ", expected " << n << "x" << n;
            report.violations.push_back(os.str());
            shapes_ok = false;
        }
    }
    if (n == 0) report.violations.push_back("dimension mismatch: empty system");
    if (!shapes_ok) return report;
    detail::check_infection(c.B1, "B1", report.violations);
    detail::check_recovery(c.D1, "D1", report.violations);
    detail::check_infection(c.B2, "B2", report.violations);
    detail::check_recovery(c.D2, "D2", report.violations);
    return report;
}

/// A validated bivirus system. Instances can only be obtained through
/// `validate`, so every instance satisfies the standing assumptions.
class BivirusSystem {
public:
    Eigen::Index n() const { return B1_.rows(); }
    const Mat& B1() const { return B1_; }
    const Mat& D1() const { return D1_; }
    const Mat& B2() const { return B2_; }
    const Mat& D2() const { return D2_; }
    const Mat& B(int virus) const { return virus == 1 ? B1_ : B2_; }
    const Mat& D(int virus) const { return virus == 1 ? D1_ : D2_; }

    bool is_normalized() const {
        const Mat I = Mat::Identity(n(), n());
        return D1_ == I && D2_ == I;
    }

    SystemCandidate candidate() const { return {B1_, D1_, B2_, D2_}; }

    friend BivirusSystem validate(SystemCandidate c);

private:
    BivirusSystem(Mat B1, Mat D1, Mat B2, Mat D2)
        : B1_(std::move(B1)), D1_(std::move(D1)), B2_(std::move(B2)), D2_(std::move(D2)) {}

    Mat B1_, D1_, B2_, D2_;
};

/// Returns the validated system or throws ValidationError listing every violation.
inline BivirusSystem validate(SystemCandidate c) {
    ValidationReport report = check_system(c);
    if (!report.ok()) throw ValidationError(std::move(report.violations));
    return BivirusSystem(std::move(c.B1), std::move(c.D1), std::move(c.B2), std::move(c.D2));
}

inline BivirusSystem make_system(Mat B1, Mat B2) {
    const Eigen::Index n = B1.rows();
    return validate({std::move(B1), Mat::Identity(n, n), std::move(B2), Mat::Identity(n, n)});
}

/// Replaces (Bi, Di) by (Di^-1 Bi, I). Equilibria and their local stability are
/// unchanged by this rescaling.
inline BivirusSystem normalize_recovery(const BivirusSystem& sys) {
    if (sys.is_normalized()) return sys;
    const Eigen::Index n = sys.n();
    const Vec d1 = sys.D1().diagonal();
    const Vec d2 = sys.D2().diagonal();
    Mat B1 = d1.cwiseInverse().asDiagonal() * sys.B1();
    Mat B2 = d2.cwiseInverse().asDiagonal() * sys.B2();
    return validate({std::move(B1), Mat::Identity(n, n), std::move(B2), Mat::Identity(n, n)});
}

struct ReproductionNumbers {
    double R1 = 0.0;
    double R2 = 0.0;
};

inline ReproductionNumbers reproduction_numbers(const BivirusSystem& sys, double tol = speclin::kDefaultTol) {
    const Mat A1 = sys.D1().diagonal().cwiseInverse().asDiagonal() * sys.B1();
    const Mat A2 = sys.D2().diagonal().cwiseInverse().asDiagonal() * sys.B2();
    return {speclin::spectral_radius(A1, tol), speclin::spectral_radius(A2, tol)};
}

struct FieldValue {
    Vec dx1;
    Vec dx2;

    double norm_inf() const { return std::max(dx1.cwiseAbs().maxCoeff(), dx2.cwiseAbs().maxCoeff()); }
};

namespace detail {

inline void require_state(const BivirusSystem& sys, const State& s, const char* what) {
    if (s.x1.size() != sys.n() || s.x2.size() != sys.n())
        throw DomainError(std::string(what) + ": state dimension does not match system");
    if (!is_admissible(s))
        throw DomainError(std::string(what) + ": state outside the admissible set");
}

// Unchecked field evaluation, also used by the integrator's inner loop.
inline void field_unchecked(const BivirusSystem& sys, const Vec& x1, const Vec& x2, Vec& dx1, Vec& dx2) {
    const Vec susceptible = Vec::Ones(sys.n()) - x1 - x2;
    dx1 = -(sys.D1().diagonal().cwiseProduct(x1)) + susceptible.cwiseProduct(sys.B1() * x1);
    dx2 = -(sys.D2().diagonal().cwiseProduct(x2)) + susceptible.cwiseProduct(sys.B2() * x2);
}

}  // namespace detail

inline FieldValue vector_field(const BivirusSystem& sys, const State& s) {
    detail::require_state(sys, s, "vector_field");
    FieldValue f;
    detail::field_unchecked(sys, s.x1, s.x2, f.dx1, f.dx2);
    return f;
}

/// ||vector_field(sys, s)||_inf, the residual used for every equilibrium test.
inline double residual(const BivirusSystem& sys, const State& s) { return vector_field(sys, s).norm_inf(); }

namespace detail {

inline Mat jacobian_unchecked(const BivirusSystem& sys, const Vec& x1, const Vec& x2) {
    const Eigen::Index n = sys.n();
    const Vec susceptible = Vec::Ones(n) - x1 - x2;
    const Vec b1x = sys.B1() * x1;
    const Vec b2x = sys.B2() * x2;
    Mat J(2 * n, 2 * n);
    J.topLeftCorner(n, n) = susceptible.asDiagonal() * sys.B1();
    J.topLeftCorner(n, n).diagonal() -= sys.D1().diagonal() + b1x;
    J.topRightCorner(n, n) = Mat((-b1x).asDiagonal());
    J.bottomLeftCorner(n, n) = Mat((-b2x).asDiagonal());
    J.bottomRightCorner(n, n) = susceptible.asDiagonal() * sys.B2();
    J.bottomRightCorner(n, n).diagonal() -= sys.D2().diagonal() + b2x;
    return J;
}

}  // namespace detail

/// Dense 2n x 2n Jacobian of the vector field at `s`.
inline Mat jacobian(const BivirusSystem& sys, const State& s) {
    detail::require_state(sys, s, "jacobian");
    return detail::jacobian_unchecked(sys, s.x1, s.x2);
}

/// The sign pattern m = (0, ..., 0, 1, ..., 1) and its transform P = diag(I, -I).
struct OrderCone {
    std::vector<int> m;
    Vec signs;  // diagonal of P

    static OrderCone for_dimension(Eigen::Index n) {
        OrderCone c;
        c.m.assign(static_cast<std::size_t>(2 * n), 0);
        c.signs = Vec::Ones(2 * n);
        for (Eigen::Index i = n; i < 2 * n; ++i) {
            c.m[static_cast<std::size_t>(i)] = 1;
            c.signs(i) = -1.0;
        }
        return c;
    }

    Mat P() const { return Mat(signs.asDiagonal()); }

    /// P M P, computed by sign flips so the result is exact.
    Mat conjugate(const Mat& M) const { return signs.asDiagonal() * M * signs.asDiagonal(); }
};

/// P J P with P = diag(I, -I); Metzler at every admissible state.
inline Mat transformed_jacobian(const BivirusSystem& sys, const State& s) {
    const Mat PJP = OrderCone::for_dimension(sys.n()).conjugate(jacobian(sys, s));
    if (!speclin::is_metzler(PJP))
        throw std::logic_error("transformed_jacobian: result is not Metzler");
    return PJP;
}

}  // namespace bivirus
