// Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero when any
// criterion fails.

#include "bivirus/cli.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

using namespace bivirus;

namespace {

struct Verdict {
    bool pass = true;
    std::vector<std::string> notes;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back(what);
        }
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

// Random n = 2 system with both viruses supercritical (D = I).
BivirusSystem random_pair(std::mt19937_64& rng) {
    return make_system(oracle::random_supercritical(rng, 2, 1.2, 3.0), oracle::random_supercritical(rng, 2, 1.2, 3.0));
}

// 1. Reference table reproduction within the reported rounding.
Verdict table_reproduction() {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream out, err;
    const int code = cli::cmd_cases({}, out, err);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (int id = 1; id <= 4; ++id)
        for (const auto& c : cli::case_cells(id))
            if (c.quantity.find("class") == std::string::npos && c.quantity != "sandwich")
                v.require(c.pass, "case " + std::to_string(id) + " " + c.quantity + ": computed " + c.computed +
                                      ", reported " + c.reported);
    v.require(code == 0, "cases command exit code " + std::to_string(code));
    v.require(secs < 10.0, "runtime " + fmt("%.2f s", secs));
    v.notes.push_back("runtime " + fmt("%.3f s", secs));
    return v;
}

// 2. Stability classes: spectral boundary test and Jacobian agree with the
// reported narrative.
Verdict stability_classes() {
    Verdict v;
    for (int id = 2; id <= 4; ++id)
        for (const auto& c : cli::case_cells(id))
            if (c.quantity.find("class") != std::string::npos)
                v.require(c.pass, "case " + std::to_string(id) + " " + c.quantity + ": " + c.computed + " vs " + c.reported);
    // Case 4 reports no coexistence equilibrium.
    v.require(solve_coexistence_n2(cases::case_system(4)).roots.empty(), "case 4 has a coexistence root");
    return v;
}

// 3. Constructed lines of equilibria.
Verdict line_construction() {
    Verdict v;
    std::mt19937_64 rng(3003);
    std::vector<Mat> bases = {cases::reference_B1()};
    std::uniform_int_distribution<int> dim(2, 8);
    for (int k = 0; k < 20; ++k) bases.push_back(oracle::random_supercritical(rng, dim(rng), 1.2, 3.0));

    for (std::size_t k = 0; k < bases.size(); ++k) {
        const std::string tag = "B1 #" + std::to_string(k) + " (n=" + std::to_string(bases[k].rows()) + ")";
        const auto line = construct_equilibrium_line(bases[k], 1.0);
        for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const State s = line.family.point(a);
            const double r = residual(line.system, s);
            v.require(r <= 1e-10, tag + " residual " + fmt("%.2e", r) + " at alpha " + fmt("%.2f", a));
            const Eigen::VectorXcd ev = oracle::eigenvalues(transformed_jacobian(line.system, s));
            int near_zero = 0;
            bool others_negative = true;
            for (Eigen::Index i = 0; i < ev.size(); ++i) {
                const bool zero = std::abs(ev(i).real()) <= 1e-8 && std::abs(ev(i).imag()) <= 1e-8;
                if (zero) ++near_zero;
                else if (ev(i).real() >= -1e-8) others_negative = false;
            }
            v.require(near_zero == 1 && others_negative,
                      tag + " alpha " + fmt("%.2f", a) + ": " + std::to_string(near_zero) + " zero eigenvalues" +
                          (others_negative ? "" : ", another eigenvalue not in the open left half-plane"));
        }
        v.require(line_endpoint_class(construct_equilibrium_line(bases[k], 0.9)) == SpectrumClass::stable,
                  tag + " mu=0.9 endpoint not stable");
        v.require(line_endpoint_class(construct_equilibrium_line(bases[k], 1.1)) == SpectrumClass::unstable,
                  tag + " mu=1.1 endpoint not a saddle");
    }
    return v;
}

// Shared trajectory corpus for criteria 4 and 5.
struct Corpus {
    std::vector<BivirusSystem> systems;
    std::vector<std::string> names;
};

Corpus corpus() {
    Corpus c;
    for (int id = 1; id <= 4; ++id) {
        c.systems.push_back(cases::case_system(id));
        c.names.push_back("case " + std::to_string(id));
    }
    std::mt19937_64 rng(4004);
    for (int k = 0; k < 10; ++k) {
        const Eigen::Index n = 2 + k % 5;
        c.systems.push_back(validate({oracle::random_supercritical(rng, n),
                                      Mat(oracle::random_positive(rng, n, 0.5, 2.0).asDiagonal()),
                                      oracle::random_supercritical(rng, n),
                                      Mat(oracle::random_positive(rng, n, 0.5, 2.0).asDiagonal())}));
        c.names.push_back("random " + std::to_string(k) + " (n=" + std::to_string(n) + ")");
    }
    return c;
}

// 4. Order preservation for K_m-ordered pairs.
Verdict monotonicity(const Corpus& c) {
    Verdict v;
    std::mt19937_64 rng(4444);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    sim::IntegratorOptions opt;
    opt.sample_dt = 0.05;
    std::size_t pairs = 0, checks = 0, violations = 0;
    for (std::size_t s = 0; s < c.systems.size(); ++s) {
        const auto& sys = c.systems[s];
        const Eigen::Index n = sys.n();
        for (int k = 0; k < 100; ++k) {
            const State hi = oracle::random_state(rng, n, k % 2 == 0);
            State lo = hi;
            for (Eigen::Index i = 0; i < n; ++i) {
                lo.x1(i) = u(rng) * hi.x1(i);
                lo.x2(i) = hi.x2(i) + u(rng) * (1.0 - lo.x1(i) - hi.x2(i));
            }
            if (!sim::order_leq(lo, hi) || !is_admissible(lo)) {
                v.require(false, "pair generator produced an unordered pair");
                continue;
            }
            const auto a = sim::integrate(sys, lo, 20.0, opt);
            const auto b = sim::integrate(sys, hi, 20.0, opt);
            ++pairs;
            for (std::size_t t = 0; t < a.times.size(); ++t) {
                ++checks;
                if (!sim::order_leq(a.states[t], b.states[t], 1e-8)) ++violations;
            }
        }
    }
    v.require(violations == 0, std::to_string(violations) + " order violations");
    v.notes.push_back(std::to_string(pairs) + " pairs, " + std::to_string(checks) + " time points");
    return v;
}

// 5. Invariance of the admissible set and of its interior.
Verdict invariance(const Corpus& c) {
    Verdict v;
    std::mt19937_64 rng(5005);
    sim::IntegratorOptions opt;
    opt.sample_dt = 0.1;
    double worst = 0.0;
    std::size_t runs = 0;
    for (std::size_t s = 0; s < c.systems.size(); ++s) {
        const auto& sys = c.systems[s];
        for (int k = 0; k < 20; ++k) {
            const bool interior = k % 2 == 0;
            const State s0 = oracle::random_state(rng, sys.n(), interior);
            const auto tr = sim::integrate(sys, s0, 100.0, opt);
            ++runs;
            for (std::size_t t = 0; t < tr.times.size(); ++t) {
                worst = std::max(worst, admissibility_violation(tr.states[t]));
                if (interior && t > 0 && tr.states[t].stacked().minCoeff() <= 0.0) {
                    v.require(false, c.names[s] + ": interior start reached the boundary at t=" + fmt("%.1f", tr.times[t]));
                    break;
                }
            }
        }
    }
    v.require(worst <= 1e-9, "max excursion " + fmt("%.2e", worst));
    v.notes.push_back(std::to_string(runs) + " runs, max excursion " + fmt("%.1e", worst));
    return v;
}

// 6. Sandwich dichotomy.
Verdict sandwich() {
    Verdict v;
    const auto r4 = sim::sandwich_test(cases::case_system(4));
    const State b2 = enumerate_equilibria(cases::case_system(4)).find(EquilibriumKind::boundary_virus2)->state;
    v.require(r4.status == sim::SandwichStatus::agree && distance_inf(r4.limit_A, b2) <= 1e-6,
              "case 4: " + std::string(to_string(r4.status)));
    const auto r2 = sim::sandwich_test(cases::case_system(2));
    const auto c2 = solve_coexistence_n2(cases::case_system(2));
    v.require(r2.status == sim::SandwichStatus::disagree && c2.roots.size() == 1 &&
                  r2.hyperrectangle.contains(c2.roots[0].state),
              "case 2: " + std::string(to_string(r2.status)));
    const auto r3 = sim::sandwich_test(cases::case_system(3));
    const auto c3 = solve_coexistence_n2(cases::case_system(3));
    v.require(r3.status == sim::SandwichStatus::agree && c3.roots.size() == 1 &&
                  distance_inf(r3.limit_A, c3.roots[0].state) <= 1e-6,
              "case 3: " + std::string(to_string(r3.status)));

    std::mt19937_64 rng(6006);
    int agreeing = 0, probes = 0;
    for (int k = 0; k < 20; ++k) {
        const auto sys = random_pair(rng);
        const auto r = sim::sandwich_test(sys);
        v.require(r.status != sim::SandwichStatus::inconclusive, "random " + std::to_string(k) + " inconclusive");
        if (r.status != sim::SandwichStatus::agree) continue;
        ++agreeing;
        for (const State& s0 : sim::random_interior_starts(2, r.eta, 20, 600 + static_cast<std::uint64_t>(k))) {
            const auto tr = sim::integrate(sys, s0, sim::kDefaultTEnd);
            ++probes;
            v.require(r.hyperrectangle.contains(tr.final_state(), 1e-6),
                      "random " + std::to_string(k) + ": probe converged away from the common limit");
        }
    }
    v.notes.push_back(std::to_string(agreeing) + "/20 random systems agree, " + std::to_string(probes) + " probes");
    return v;
}

// 7. Two-node solver against the brute-force oracle.
Verdict oracle_equivalence() {
    Verdict v;
    std::mt19937_64 rng(7007);
    std::size_t max_roots = 0;
    int with_roots = 0;
    for (int k = 0; k < 100; ++k) {
        // Mix independent draws with perturbations of the reference study so a
        // fair share of instances has interior roots.
        BivirusSystem sys = random_pair(rng);
        if (k % 2 == 1) {
            std::uniform_real_distribution<double> jig(0.8, 1.25);
            Mat B2 = cases::reported_case(2 + k % 3).B2;
            for (Eigen::Index i = 0; i < 4; ++i) B2(i) *= jig(rng);
            sys = make_system(cases::reference_B1(), B2);
        }
        const auto set = enumerate_equilibria(sys);
        if (!set.find(EquilibriumKind::boundary_virus1) || !set.find(EquilibriumKind::boundary_virus2)) continue;
        const auto sol = solve_coexistence_n2(sys);
        const auto brute = oracle::brute_force_coexistence(sys);
        max_roots = std::max(max_roots, sol.roots.size());
        if (!sol.roots.empty()) ++with_roots;
        bool same = sol.roots.size() == brute.size();
        for (const auto& r : sol.roots)
            same = same && std::any_of(brute.begin(), brute.end(),
                                       [&](const State& b) { return distance_inf(b, r.state) <= 1e-6; });
        v.require(same, "system " + std::to_string(k) + ": solver " + std::to_string(sol.roots.size()) +
                            " roots, oracle " + std::to_string(brute.size()));
        v.require(sol.roots.size() <= 2, "system " + std::to_string(k) + " returned more than two roots");
    }
    v.notes.push_back(std::to_string(with_roots) + " systems with interior roots, max " + std::to_string(max_roots));
    return v;
}

// 8. Spectral and derivative cross-checks.
Verdict spectral_checks() {
    Verdict v;
    std::mt19937_64 rng(8008);
    std::uniform_int_distribution<int> dim(2, 8);
    std::uniform_real_distribution<double> rad(0.3, 2.5);
    for (int k = 0; k < 50; ++k) {
        const Eigen::Index n = dim(rng);
        const Vec d = oracle::random_positive(rng, n, 0.3, 3.0);
        const Mat D = Mat(d.asDiagonal());
        // Scale B so that rho(D^-1 B) straddles 1 across instances.
        const Mat A = oracle::random_irreducible(rng, n);
        const Mat B = A * (rad(rng) / oracle::spectral_radius(D.inverse() * A));
        const double s = speclin::spectral_abscissa(Mat(-D + B));
        const double r = speclin::spectral_radius(Mat(D.inverse() * B)) - 1.0;
        v.require((s < 0) == (r < 0), "instance " + std::to_string(k) + ": s=" + fmt("%.3e", s) + " rho-1=" + fmt("%.3e", r));
    }
    double worst = 0.0;
    for (int k = 0; k < 50; ++k) {
        const Eigen::Index n = dim(rng);
        const auto sys = validate({oracle::random_supercritical(rng, n), Mat(oracle::random_positive(rng, n, 0.5, 2.0).asDiagonal()),
                                   oracle::random_supercritical(rng, n), Mat(oracle::random_positive(rng, n, 0.5, 2.0).asDiagonal())});
        const State s = oracle::random_state(rng, n);
        const Mat J = jacobian(sys, s);
        const Mat F = oracle::fd_jacobian(sys, s.stacked());
        worst = std::max(worst, (J - F).cwiseAbs().maxCoeff() / std::max(1.0, J.cwiseAbs().maxCoeff()));
    }
    v.require(worst <= 1e-6, "Jacobian relative error " + fmt("%.2e", worst));
    v.notes.push_back("Jacobian max relative error " + fmt("%.1e", worst));
    return v;
}

}  // namespace

int main() {
    const Corpus c = corpus();
    const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
        {"reference table reproduction", table_reproduction},
        {"stability classifications", stability_classes},
        {"line-of-equilibria construction", line_construction},
        {"monotonicity", [&] { return monotonicity(c); }},
        {"invariance", [&] { return invariance(c); }},
        {"sandwich dichotomy", sandwich},
        {"two-node solver vs brute force", oracle_equivalence},
        {"spectral and Jacobian cross-checks", spectral_checks},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Verdict v;
        const auto t0 = std::chrono::steady_clock::now();
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v.pass = false;
            v.notes.push_back(std::string("exception: ") + e.what());
        }
        failed += v.pass ? 0 : 1;
        std::cout << "criterion " << (i + 1) << ": " << (v.pass ? "PASS" : "FAIL") << "  " << criteria[i].first;
        for (std::size_t k = 0; k < v.notes.size() && k < 5; ++k) std::cout << (k ? "; " : " | ") << v.notes[k];
        if (v.notes.size() > 5) std::cout << "; ... " << v.notes.size() - 5 << " more";
        std::cout << " (" << fmt("%.1f", std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count())
                  << " s)\n";
    }
    return failed == 0 ? 0 : 1;
}
