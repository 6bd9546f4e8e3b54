#include "bivirus/cases.hpp"
#include "bivirus/equilibria.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace bivirus;

namespace {

Mat m2(double a, double b, double c, double d) { return (Mat(2, 2) << a, b, c, d).finished(); }
Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }

const Vec kProfile1 = Vec::Constant(2, 1.0 - 1.0 / 2.6);

}  // namespace

TEST(SingleVirus, EqualRowSumsGiveUniformProfile) {
    // B 1 = r 1 implies the endemic profile (1 - 1/r) 1.
    const auto x = single_virus_endemic(m2(1.6, 1, 1, 1.6), Mat::Identity(2, 2));
    ASSERT_TRUE(x);
    EXPECT_LE((*x - kProfile1).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(SingleVirus, SubcriticalHasNoEndemicState) {
    EXPECT_FALSE(single_virus_endemic(m2(0.3, 0.2, 0.2, 0.3), Mat::Identity(2, 2)));
    // rho(D^-1 B) = 1 exactly: the healthy state is the only equilibrium.
    EXPECT_FALSE(single_virus_endemic(m2(0.5, 0.5, 0.5, 0.5), Mat::Identity(2, 2)));
}

TEST(SingleVirus, RandomProfilesSolveTheFixedPointEquation) {
    std::mt19937_64 rng(31);
    for (int trial = 0; trial < 20; ++trial) {
        const Eigen::Index n = 2 + trial % 7;
        const Mat B = oracle::random_supercritical(rng, n, 1.05, 4.0);
        const Vec d = oracle::random_positive(rng, n, 0.5, 1.5);
        const Mat D = Mat(d.asDiagonal());
        if (oracle::spectral_radius(D.inverse() * B) <= 1.0) continue;
        const auto x = single_virus_endemic(B, D);
        ASSERT_TRUE(x);
        EXPECT_GT(x->minCoeff(), 0.0);
        EXPECT_LT(x->maxCoeff(), 1.0);
        const Vec r = -D * *x + (Vec::Ones(n) - *x).cwiseProduct(B * *x);
        EXPECT_LE(r.cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(EquilibriumKind, ZeroPatternDecidesTheKind) {
    EXPECT_EQ(equilibrium_kind(State::healthy(2)), EquilibriumKind::healthy);
    EXPECT_EQ(equilibrium_kind(State{v2(0.5, 0.5), v2(0, 0)}), EquilibriumKind::boundary_virus1);
    EXPECT_EQ(equilibrium_kind(State{v2(0, 0), v2(0.5, 0.5)}), EquilibriumKind::boundary_virus2);
    EXPECT_EQ(equilibrium_kind(State{v2(0.3, 0.3), v2(0.2, 0.2)}), EquilibriumKind::coexistence);
    EXPECT_THROW(equilibrium_kind(State{v2(0.3, 0), v2(0.2, 0.2)}), DomainError);
}

TEST(TwoNode, ReferenceCasesMatchIndependentSolve) {
    struct Expect {
        int id;
        Vec x1, x2;
    };
    // Independent full 4-dimensional root solve (scipy fsolve), 8 decimals.
    const Expect expected[] = {
        {2, v2(0.34629674, 0.26475731), v2(0.23078781, 0.39136114)},
        {3, v2(0.46171013, 0.51096373), v2(0.16883308, 0.08961247)},
    };
    for (const auto& e : expected) {
        const auto sol = solve_coexistence_n2(cases::case_system(e.id));
        ASSERT_EQ(sol.roots.size(), 1u) << "case " << e.id;
        EXPECT_FALSE(sol.line_degenerate);
        EXPECT_LE((sol.roots[0].state.x1 - e.x1).cwiseAbs().maxCoeff(), 1e-7) << "case " << e.id;
        EXPECT_LE((sol.roots[0].state.x2 - e.x2).cwiseAbs().maxCoeff(), 1e-7) << "case " << e.id;
        EXPECT_LE(sol.roots[0].residual, 1e-12);
    }
}

TEST(TwoNode, LineCaseIsFlaggedAndNoIsolatedRootReported) {
    const auto sol = solve_coexistence_n2(cases::case_system(1));
    EXPECT_TRUE(sol.line_degenerate);
    EXPECT_TRUE(sol.roots.empty());
    const auto set = enumerate_equilibria(cases::case_system(1));
    EXPECT_TRUE(set.degenerate);
}

TEST(TwoNode, DominantVirusLeavesNoCoexistence) {
    const auto sol = solve_coexistence_n2(cases::case_system(4));
    EXPECT_TRUE(sol.roots.empty());
    EXPECT_FALSE(sol.line_degenerate);
}

TEST(TwoNode, RejectsOtherDimensions) {
    const Mat B = Mat::Constant(3, 3, 1.0);
    EXPECT_THROW(solve_coexistence_n2(make_system(B, B)), DomainError);
}

TEST(Enumerate, ReferenceCaseTwoHasFourClassifiedEquilibria) {
    const auto set = enumerate_equilibria(cases::case_system(2));
    ASSERT_EQ(set.equilibria.size(), 4u);
    EXPECT_EQ(set.find(EquilibriumKind::healthy)->spectrum_class, SpectrumClass::unstable);
    EXPECT_EQ(set.find(EquilibriumKind::boundary_virus1)->spectrum_class, SpectrumClass::stable);
    EXPECT_EQ(set.find(EquilibriumKind::boundary_virus2)->spectrum_class, SpectrumClass::stable);
    EXPECT_EQ(set.find(EquilibriumKind::coexistence)->spectrum_class, SpectrumClass::unstable);
    for (const auto& e : set.equilibria) {
        // Spectral abscissa cross-checked against a dense eigensolver.
        const Mat J = jacobian(cases::case_system(2), e.state);
        EXPECT_NEAR(e.abscissa, oracle::spectral_abscissa(J), 1e-9);
    }
}

TEST(Enumerate, ClassificationUsesTheOriginalRecoveryRates) {
    // Scaling (Bi, Di) by a common positive diagonal keeps the equilibria but
    // changes the Jacobian; the reported abscissa must be the original one.
    const auto base = cases::case_system(3);
    const Mat D = Mat(v2(2.0, 0.5).asDiagonal());
    const auto scaled = validate({D * base.B1(), D, D * base.B2(), D});
    const auto a = enumerate_equilibria(base);
    const auto b = enumerate_equilibria(scaled);
    ASSERT_EQ(a.equilibria.size(), b.equilibria.size());
    for (std::size_t i = 0; i < a.equilibria.size(); ++i) {
        EXPECT_LE(distance_inf(a.equilibria[i].state, b.equilibria[i].state), 1e-10);
        EXPECT_EQ(a.equilibria[i].spectrum_class, b.equilibria[i].spectrum_class);
        EXPECT_NEAR(b.equilibria[i].abscissa, oracle::spectral_abscissa(jacobian(scaled, b.equilibria[i].state)), 1e-9);
    }
}

TEST(Newton, AgreesWithTwoNodeSolver) {
    for (int id : {2, 3}) {
        const auto sys = cases::case_system(id);
        const auto set = enumerate_equilibria(sys);
        const auto seeds = profile_seed_grid(set.find(EquilibriumKind::boundary_virus1)->state.x1,
                                             set.find(EquilibriumKind::boundary_virus2)->state.x2);
        const auto search = find_coexistence_newton(sys, seeds);
        const auto sol = solve_coexistence_n2(sys);
        ASSERT_EQ(search.roots.size(), sol.roots.size()) << "case " << id;
        EXPECT_LE(distance_inf(search.roots[0].state, sol.roots[0].state), 1e-9);
    }
}

TEST(Newton, DeduplicateMergesNearbyPoints) {
    std::vector<State> pts = {State{v2(0.3, 0.3), v2(0.2, 0.2)}, State{v2(0.3 + 1e-8, 0.3), v2(0.2, 0.2)},
                              State{v2(0.1, 0.1), v2(0.5, 0.5)}};
    EXPECT_EQ(detail::deduplicate(pts, 1e-6).size(), 2u);
}

TEST(Boundary, VerdictsForReferenceCases) {
    const auto c2 = boundary_stability(cases::case_system(2));
    EXPECT_EQ(c2.virus1->verdict, BoundaryClass::locally_stable);
    EXPECT_EQ(c2.virus2->verdict, BoundaryClass::locally_stable);
    const auto c3 = boundary_stability(cases::case_system(3));
    EXPECT_EQ(c3.virus1->verdict, BoundaryClass::unstable);
    EXPECT_EQ(c3.virus2->verdict, BoundaryClass::unstable);
    const auto c4 = boundary_stability(cases::case_system(4));
    EXPECT_EQ(c4.virus1->verdict, BoundaryClass::unstable);
    EXPECT_EQ(c4.virus2->verdict, BoundaryClass::locally_stable);
    const auto c1 = boundary_stability(cases::case_system(1));
    EXPECT_EQ(c1.virus1->verdict, BoundaryClass::critical);
    EXPECT_EQ(c1.virus2->verdict, BoundaryClass::critical);
}

TEST(Boundary, SubcriticalVirusHasNoBoundaryEquilibrium) {
    const auto sys = make_system(m2(1.6, 1, 1, 1.6), m2(0.3, 0.2, 0.2, 0.3));
    const auto b = boundary_stability(sys);
    EXPECT_TRUE(b.virus1);
    EXPECT_FALSE(b.virus2);
    EXPECT_THROW(sufficient_conditions(sys), DomainError);
}

TEST(Sufficient, DominantVirusDetected) {
    const auto s = sufficient_conditions(cases::case_system(4));
    EXPECT_EQ(s.row_sum_gap, TriState::holds_for_virus2);
    EXPECT_EQ(s.profile_dominance, TriState::holds_for_virus2);
    EXPECT_EQ(s.entrywise_dominance, TriState::inconclusive);
    const auto strong = make_system(m2(1.6, 1, 1, 1.6), m2(2.0, 1.5, 1.5, 2.0));
    EXPECT_EQ(sufficient_conditions(strong).entrywise_dominance, TriState::holds_for_virus2);
    const auto weak = make_system(m2(2.0, 1.5, 1.5, 2.0), m2(1.6, 1, 1, 1.6));
    EXPECT_EQ(sufficient_conditions(weak).entrywise_dominance, TriState::holds_for_virus1);
}

TEST(Line, RankOneConstructionHasEquilibriumSegment) {
    const auto line = construct_equilibrium_line(m2(1.6, 1, 1, 1.6), 1.0);
    EXPECT_LE((line.family.C * line.family.z - line.family.z).cwiseAbs().maxCoeff(), 1e-14);
    for (double a : {0.0, 0.1, 0.5, 0.9, 1.0}) EXPECT_LE(residual(line.system, line.family.point(a)), 1e-12);
    EXPECT_EQ(line_endpoint_class(line), SpectrumClass::singular_boundary);
}

TEST(Line, BlendAndExplicitStrategies) {
    std::mt19937_64 rng(32);
    const Mat B1 = oracle::random_supercritical(rng, 4);
    const Mat U = oracle::random_irreducible(rng, 4);
    const auto blend = construct_equilibrium_line(B1, 1.0, line_strategy::Blend{U, 0.7});
    EXPECT_TRUE(speclin::is_irreducible(blend.family.C));
    for (double a : {0.0, 0.5, 1.0}) EXPECT_LE(residual(blend.system, blend.family.point(a)), 1e-12);

    const auto expl = construct_equilibrium_line(B1, 1.0, line_strategy::Explicit{blend.family.C});
    EXPECT_LE((expl.family.B2 - blend.family.B2).cwiseAbs().maxCoeff(), 1e-14);
    EXPECT_THROW(construct_equilibrium_line(B1, 1.0, line_strategy::Explicit{U}), DomainError);
}

TEST(Line, MuMovesTheEndpointAcrossTheBifurcation) {
    const Mat B1 = m2(1.6, 1, 1, 1.6);
    EXPECT_EQ(line_endpoint_class(construct_equilibrium_line(B1, 0.9)), SpectrumClass::stable);
    EXPECT_EQ(line_endpoint_class(construct_equilibrium_line(B1, 1.1)), SpectrumClass::unstable);
}

TEST(Line, RejectsSubcriticalOrInvalidInput) {
    EXPECT_THROW(construct_equilibrium_line(m2(0.3, 0.2, 0.2, 0.3), 1.0), DomainError);
    EXPECT_THROW(construct_equilibrium_line(m2(1.6, 1, 1, 1.6), 0.0), DomainError);
    EXPECT_THROW(construct_equilibrium_line(m2(1.6, 0, 1, 1.6), 1.0), DomainError);
}
