#pragma once

// Command implementations behind the `bivirus` executable. Every command writes
// to caller-supplied streams and returns its exit code, so tests can drive them
// in-process.

#include "bivirus/cases.hpp"
#include "bivirus/equilibria.hpp"
#include "bivirus/errors.hpp"
#include "bivirus/io.hpp"
#include "bivirus/model.hpp"
#include "bivirus/report.hpp"
#include "bivirus/sim.hpp"

#include "CLI11.hpp"

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace bivirus::cli {

enum ExitCode : int { ok = 0, failure = 1, config_error = 2, inconclusive = 3 };

/// Command-line overrides and output options shared by all commands.
struct Options {
    std::string out_dir;  // empty: print only (simulate and construct-line fall back to ".")
    bool json = false;
    std::optional<double> tol;
    std::optional<double> t_end;
    std::optional<double> eta;
    std::optional<std::uint64_t> seed;
};

inline io::RunParams effective_params(io::RunParams p, const Options& opt) {
    if (opt.tol) p.tol = *opt.tol;
    if (opt.t_end) p.t_end = *opt.t_end;
    if (opt.eta) p.eta = *opt.eta;
    if (opt.seed) p.seed = *opt.seed;
    return p;
}

namespace detail {

using bivirus::detail::fixed4;
using bivirus::detail::vec4;

inline std::filesystem::path out_path(const Options& opt, const std::string& name) {
    const std::filesystem::path dir = opt.out_dir.empty() ? std::filesystem::path(".") : std::filesystem::path(opt.out_dir);
    std::filesystem::create_directories(dir);
    return dir / name;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << content;
}

inline std::string state4(const State& s) { return "x1=" + vec4(s.x1) + " x2=" + vec4(s.x2); }

/// Validates the system section; prints violations and returns nullopt on failure.
inline std::optional<BivirusSystem> require_system(const io::RunConfig& cfg, std::ostream& err) {
    if (!cfg.system) {
        err << "config: no system defined (B1 and B2 are required)\n";
        return std::nullopt;
    }
    try {
        return validate(*cfg.system);
    } catch (const ValidationError& e) {
        err << "validation failed:\n";
        for (const auto& v : e.violations()) err << "  " << v << "\n";
        return std::nullopt;
    }
}

/// Name of the equilibrium nearest to `s` within `radius`, or "unresolved".
inline std::string label_for(const std::vector<Equilibrium>& eqs, const State& s, double radius) {
    int best = -1;
    double best_d = radius;
    for (std::size_t i = 0; i < eqs.size(); ++i) {
        const double d = distance_inf(eqs[i].state, s);
        if (d <= best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) return "unresolved";
    return "#" + std::to_string(best) + " " + to_string(eqs[static_cast<std::size_t>(best)].kind);
}

inline SpectrumClass to_spectrum_class(BoundaryClass c) {
    switch (c) {
        case BoundaryClass::locally_stable: return SpectrumClass::stable;
        case BoundaryClass::unstable: return SpectrumClass::unstable;
        case BoundaryClass::critical: return SpectrumClass::singular_boundary;
    }
    return SpectrumClass::singular_boundary;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// analyze

inline int cmd_analyze(const io::RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    const auto sys = detail::require_system(cfg, err);
    if (!sys) return config_error;
    const io::RunParams p = effective_params(cfg.params, opt);
    AnalysisReport report;
    try {
        report = analyze(*sys, p.tol);
    } catch (const NumericError& e) {
        err << "numerics inconclusive: " << e.what() << "\n";
        return inconclusive;
    }
    const std::string text = opt.json ? render_json(report).dump(2) + "\n" : render_text(report);
    out << text;
    if (!opt.out_dir.empty()) detail::write_file(detail::out_path(opt, opt.json ? "report.json" : "report.txt"), text);
    return ok;
}

// ---------------------------------------------------------------------------
// simulate

inline int cmd_simulate(const io::RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    const auto sys = detail::require_system(cfg, err);
    if (!sys) return config_error;
    if (cfg.initial_conditions.empty()) {
        err << "config: initial_conditions is empty\n";
        return config_error;
    }
    const io::RunParams p = effective_params(cfg.params, opt);
    sim::IntegratorOptions iopt;
    iopt.sample_dt = p.sample_dt;
    iopt.stride = p.stride;

    std::vector<Equilibrium> eqs;
    try {
        eqs = enumerate_equilibria(*sys).equilibria;
    } catch (const NumericError& e) {
        err << "warning: equilibrium enumeration failed, limits stay unlabeled: " << e.what() << "\n";
    }

    std::ostringstream summary;
    std::size_t ran = 0;
    for (std::size_t k = 0; k < cfg.initial_conditions.size(); ++k) {
        const State& s0 = cfg.initial_conditions[k];
        if (s0.n() != sys->n() || !is_admissible(s0)) {
            err << "warning: initial condition " << k << " is outside the admissible set, skipped\n";
            continue;
        }
        char name[32];
        std::snprintf(name, sizeof name, "run_%03zu.csv", k);
        sim::Trajectory tr;
        try {
            tr = sim::integrate(*sys, s0, p.t_end, iopt);
        } catch (const NumericError& e) {
            err << "run " << k << ": integration failed: " << e.what() << "\n";
            return inconclusive;
        }
        tr.outcome = sim::detect_convergence(*sys, tr, 0.1 * p.t_end, p.tol);
        std::ofstream f(detail::out_path(opt, name), std::ios::binary);
        io::write_csv(f, tr);
        std::string label = detail::label_for(eqs, tr.final_state(), sim::kLabelRadius);
        if (label == "unresolved" && tr.outcome.kind == sim::OutcomeKind::converged &&
            residual(*sys, tr.final_state()) <= p.tol)
            label = "non-isolated equilibrium";
        summary << name << "\t" << label << "\t" << to_string(tr.outcome.kind) << "\n";
        out << name << ": " << label << " (" << to_string(tr.outcome.kind) << ", "
            << detail::state4(tr.final_state()) << ")\n";
        ++ran;
    }
    if (ran == 0) {
        err << "all initial conditions were skipped\n";
        return config_error;
    }
    detail::write_file(detail::out_path(opt, "summary.txt"), summary.str());
    return ok;
}

// ---------------------------------------------------------------------------
// sandwich

struct ProbeSummary {
    std::size_t count = 0;
    std::size_t inside = 0;       // limits inside the hyperrectangle (with slack)
    std::size_t unconverged = 0;
};

inline ProbeSummary run_probes(const BivirusSystem& sys, const sim::SandwichResult& r, std::size_t count,
                               std::uint64_t seed, double t_end, double tol, double slack = 1e-6) {
    ProbeSummary ps;
    ps.count = count;
    for (const State& s0 : sim::random_interior_starts(sys.n(), r.eta, count, seed)) {
        sim::Trajectory tr = sim::integrate(sys, s0, t_end);
        tr.outcome = sim::detect_convergence(sys, tr, 0.1 * t_end, tol);
        if (tr.outcome.kind != sim::OutcomeKind::converged) ++ps.unconverged;
        if (r.hyperrectangle.contains(tr.final_state(), slack)) ++ps.inside;
    }
    return ps;
}

inline int cmd_sandwich(const io::RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    const auto sys = detail::require_system(cfg, err);
    if (!sys) return config_error;
    const io::RunParams p = effective_params(cfg.params, opt);
    sim::SandwichOptions sopt;
    sopt.eta = p.eta;
    sopt.t_end = p.t_end;
    sopt.tol = p.tol;
    sopt.integrator.sample_dt = p.sample_dt;
    sopt.integrator.stride = p.stride;

    sim::SandwichResult r;
    std::optional<ProbeSummary> probes;
    try {
        r = sim::sandwich_test(*sys, sopt);
        if (p.probes > 0 && r.status != sim::SandwichStatus::inconclusive)
            probes = run_probes(*sys, r, p.probes, p.seed, p.t_end, p.tol);
    } catch (const DomainError& e) {
        err << "config: " << e.what() << "\n";
        return config_error;
    } catch (const NumericError& e) {
        err << "numerics inconclusive: " << e.what() << "\n";
        return inconclusive;
    }

    std::vector<std::string> advisories;
    if (r.status == sim::SandwichStatus::disagree) {
        if (r.line_degenerate)
            advisories.push_back("limits lie on a non-isolated equilibrium set (line of equilibria); parameters are nongeneric");
        else
            advisories.push_back(
                "corner limits differ: there exists an unstable equilibrium inside the hyperrectangle they span");
    }
    if (r.status == sim::SandwichStatus::agree && r.line_degenerate)
        advisories.push_back("common limit has a singular transformed Jacobian; parameters are nongeneric");
    if (probes && r.status == sim::SandwichStatus::agree && probes->inside < probes->count)
        advisories.push_back("a probe trajectory ended outside the common limit");

    if (opt.json) {
        io::json doc;
        doc["status"] = to_string(r.status);
        doc["eta"] = r.eta;
        doc["limit_A"] = io::to_json(r.limit_A);
        doc["limit_B"] = io::to_json(r.limit_B);
        doc["hyperrectangle"] = {{"lo", io::to_json(r.hyperrectangle.lo)}, {"hi", io::to_json(r.hyperrectangle.hi)}};
        doc["jittered"] = {{"A", r.jittered_A}, {"B", r.jittered_B}};
        doc["line_degenerate"] = r.line_degenerate;
        if (probes) doc["probes"] = {{"count", probes->count}, {"inside", probes->inside}, {"unconverged", probes->unconverged}};
        doc["advisories"] = advisories;
        out << doc.dump(2) << "\n";
    } else {
        out << "== sandwich\n";
        out << "status: " << to_string(r.status) << "\n";
        out << "eta: " << r.eta << "\n";
        out << "start A: " << detail::state4(r.start_A) << "\n";
        out << "start B: " << detail::state4(r.start_B) << "\n";
        out << "limit A: " << detail::state4(r.limit_A) << " (" << to_string(r.trajectory_A.outcome.kind)
            << (r.jittered_A ? ", jittered" : "") << ")\n";
        out << "limit B: " << detail::state4(r.limit_B) << " (" << to_string(r.trajectory_B.outcome.kind)
            << (r.jittered_B ? ", jittered" : "") << ")\n";
        out << "hyperrectangle lo: " << detail::state4(r.hyperrectangle.lo) << "\n";
        out << "hyperrectangle hi: " << detail::state4(r.hyperrectangle.hi) << "\n";
        if (probes)
            out << "probes: " << probes->inside << "/" << probes->count << " limits inside the hyperrectangle, "
                << probes->unconverged << " unconverged (seed " << p.seed << ")\n";
        for (const auto& a : advisories) out << "advisory: " << a << "\n";
    }
    if (!opt.out_dir.empty()) {
        std::ofstream fa(detail::out_path(opt, "sandwich_A.csv"), std::ios::binary);
        io::write_csv(fa, r.trajectory_A);
        std::ofstream fb(detail::out_path(opt, "sandwich_B.csv"), std::ios::binary);
        io::write_csv(fb, r.trajectory_B);
    }
    if (r.status == sim::SandwichStatus::inconclusive) {
        err << "sandwich inconclusive: a corner trajectory did not converge\n";
        return inconclusive;
    }
    return ok;
}

// ---------------------------------------------------------------------------
// cases

struct CaseCell {
    int case_id = 0;
    std::string quantity;
    std::string computed;
    std::string reported;
    bool pass = false;
};

namespace detail {

inline std::string class_name(const std::optional<SpectrumClass>& c) { return c ? to_string(*c) : "none"; }

inline CaseCell vector_cell(int id, const std::string& q, const std::optional<Vec>& computed, const Vec& reported) {
    CaseCell c{id, q, computed ? vec4(*computed) : "missing", vec4(reported), false};
    c.pass = computed && computed->size() == reported.size() &&
             (*computed - reported).cwiseAbs().maxCoeff() <= cases::kReportedTol;
    return c;
}

}  // namespace detail

/// Computes every table cell for one built-in case.
inline std::vector<CaseCell> case_cells(int id, const sim::SandwichOptions& sopt = {}) {
    using detail::vector_cell;
    const cases::ReportedCase rc = cases::reported_case(id);
    const BivirusSystem sys = cases::case_system(id);
    const AnalysisReport rep = analyze(sys);
    const N2Solution n2 = solve_coexistence_n2(sys);
    std::vector<CaseCell> cells;

    const Equilibrium* healthy = rep.equilibria.find(EquilibriumKind::healthy);
    cells.push_back({id, "healthy (x1, x2)", healthy ? detail::state4(healthy->state) : "missing", "(0, 0)",
                     healthy && healthy->state.stacked().cwiseAbs().maxCoeff() == 0.0});

    const Equilibrium* b1 = rep.equilibria.find(EquilibriumKind::boundary_virus1);
    const Equilibrium* b2 = rep.equilibria.find(EquilibriumKind::boundary_virus2);
    cells.push_back(vector_cell(id, "boundary x1bar", b1 ? std::optional<Vec>(b1->state.x1) : std::nullopt, *rc.boundary1));
    cells.push_back(vector_cell(id, "boundary x2bar", b2 ? std::optional<Vec>(b2->state.x2) : std::nullopt, *rc.boundary2));

    if (rc.coexistence) {
        std::optional<State> root;
        if (n2.roots.size() == 1) root = n2.roots.front().state;
        const std::string count = std::to_string(n2.roots.size());
        cells.push_back({id, "coexistence count", count, "1", n2.roots.size() == 1});
        cells.push_back(vector_cell(id, "coexistence x1", root ? std::optional<Vec>(root->x1) : std::nullopt, rc.coexistence->x1));
        cells.push_back(vector_cell(id, "coexistence x2", root ? std::optional<Vec>(root->x2) : std::nullopt, rc.coexistence->x2));
    } else if (rc.line_of_equilibria) {
        cells.push_back({id, "line of equilibria flag", rep.equilibria.degenerate && n2.line_degenerate ? "raised" : "not raised",
                         "raised", rep.equilibria.degenerate && n2.line_degenerate});
        cells.push_back(vector_cell(id, "line endpoint (z, 0): z", b1 ? std::optional<Vec>(b1->state.x1) : std::nullopt,
                                    *rc.boundary1));
    } else {
        cells.push_back({id, "coexistence count", std::to_string(n2.roots.size()), "0", n2.roots.empty() && !n2.line_degenerate});
    }

    auto class_cells = [&](const char* name, const Equilibrium* e, const std::optional<BoundaryVerdict>& v,
                           const std::optional<SpectrumClass>& reported) {
        if (!reported) return;
        const std::optional<SpectrumClass> spectral =
            v ? std::optional<SpectrumClass>(detail::to_spectrum_class(v->verdict)) : std::nullopt;
        const std::optional<SpectrumClass> jac = e ? std::optional<SpectrumClass>(e->spectrum_class) : std::nullopt;
        cells.push_back({id, std::string(name) + " class (spectral test)", detail::class_name(spectral),
                         to_string(*reported), spectral == reported});
        cells.push_back({id, std::string(name) + " class (Jacobian)", detail::class_name(jac), to_string(*reported),
                         jac == reported});
    };
    class_cells("boundary (x1bar, 0)", b1, rep.boundary.virus1, rc.boundary1_class);
    class_cells("boundary (0, x2bar)", b2, rep.boundary.virus2, rc.boundary2_class);
    if (rc.coexistence_class) {
        const std::optional<SpectrumClass> jac =
            n2.roots.size() == 1 ? std::optional<SpectrumClass>(n2.roots.front().spectrum_class) : std::nullopt;
        cells.push_back({id, "coexistence class (Jacobian)", detail::class_name(jac), to_string(*rc.coexistence_class),
                         jac == rc.coexistence_class});
    }

    // Sandwich outcome expected from the reported stability picture.
    const sim::SandwichResult sw = sim::sandwich_test(sys, sopt);
    std::string computed = to_string(sw.status);
    if (sw.line_degenerate) computed += " (degenerate)";
    std::string expected;
    bool pass = false;
    if (rc.line_of_equilibria) {
        expected = "agree or degenerate, limits on the line";
        // Limits must be equilibria of the form (a z, (1 - a) z).
        bool on_line = sw.status != sim::SandwichStatus::inconclusive;
        for (const State* lim : {&sw.limit_A, &sw.limit_B}) {
            const double r = residual(sys, *lim);
            const Vec sum = lim->x1 + lim->x2;
            on_line = on_line && r <= 1e-8 && b1 && (sum - b1->state.x1).cwiseAbs().maxCoeff() <= 1e-6;
        }
        pass = on_line && (sw.status == sim::SandwichStatus::agree || sw.line_degenerate);
    } else if (rc.coexistence_class == SpectrumClass::unstable) {
        expected = "disagree, W contains coexistence";
        pass = sw.status == sim::SandwichStatus::disagree && n2.roots.size() == 1 &&
               sw.hyperrectangle.contains(n2.roots.front().state);
        if (pass) computed += ", W contains coexistence";
    } else if (rc.coexistence_class == SpectrumClass::stable) {
        expected = "agree at coexistence";
        pass = sw.status == sim::SandwichStatus::agree && n2.roots.size() == 1 &&
               distance_inf(sw.limit_A, n2.roots.front().state) <= sim::kLabelRadius;
        if (pass) computed += " at coexistence";
    } else {
        expected = "agree at (0, x2bar)";
        pass = sw.status == sim::SandwichStatus::agree && b2 && distance_inf(sw.limit_A, b2->state) <= sim::kLabelRadius;
        if (pass) computed += " at (0, x2bar)";
    }
    cells.push_back({id, "sandwich", computed, expected, pass});
    return cells;
}

inline int cmd_cases(const Options& opt, std::ostream& out, std::ostream& err) {
    const io::RunParams p = effective_params({}, opt);
    sim::SandwichOptions sopt;
    sopt.eta = p.eta;
    sopt.t_end = p.t_end;
    sopt.tol = p.tol;

    std::vector<CaseCell> cells;
    try {
        for (int id = 1; id <= 4; ++id) {
            auto c = case_cells(id, sopt);
            cells.insert(cells.end(), c.begin(), c.end());
        }
    } catch (const NumericError& e) {
        err << "numerics inconclusive: " << e.what() << "\n";
        return inconclusive;
    }
    std::size_t passed = 0;
    for (const auto& c : cells) passed += c.pass ? 1 : 0;

    std::string text;
    if (opt.json) {
        io::json doc = io::json::array();
        for (const auto& c : cells)
            doc.push_back({{"case", c.case_id}, {"quantity", c.quantity}, {"computed", c.computed},
                           {"reported", c.reported}, {"pass", c.pass}});
        text = io::json{{"cells", doc}, {"passed", passed}, {"total", cells.size()}}.dump(2) + "\n";
    } else {
        std::ostringstream os;
        os << "B1 = [[1.6, 1], [1, 1.6]], D1 = D2 = I; cells pass within +-" << cases::kReportedTol << "\n";
        os << std::left << std::setw(6) << "case" << std::setw(44) << "quantity" << std::setw(42) << "computed"
           << std::setw(42) << "reported" << "status\n";
        for (const auto& c : cells)
            os << std::left << std::setw(6) << c.case_id << std::setw(44) << c.quantity << std::setw(42) << c.computed
               << std::setw(42) << c.reported << (c.pass ? "PASS" : "FAIL") << "\n";
        os << passed << "/" << cells.size() << " cells pass\n";
        text = os.str();
    }
    out << text;
    if (!opt.out_dir.empty()) detail::write_file(detail::out_path(opt, opt.json ? "cases.json" : "cases.txt"), text);
    return passed == cells.size() ? ok : failure;
}

// ---------------------------------------------------------------------------
// construct-line

inline constexpr double kLineResidualTol = 1e-10;

inline const char* endpoint_verdict(SpectrumClass c) {
    switch (c) {
        case SpectrumClass::stable: return "locally stable";
        case SpectrumClass::unstable: return "saddle";
        case SpectrumClass::singular_boundary: return "critical (bifurcation point)";
    }
    return "?";
}

inline int cmd_construct_line(const io::RunConfig& cfg, const Options& opt, std::ostream& out, std::ostream& err) {
    if (!cfg.construct) {
        err << "config: 'construct' section missing\n";
        return config_error;
    }
    std::optional<ConstructedLine> built;
    try {
        built = construct_equilibrium_line(cfg.construct->B1, cfg.construct->mu, cfg.construct->strategy);
    } catch (const DomainError& e) {
        err << e.what() << "\n";
        return config_error;
    } catch (const ValidationError& e) {
        err << "validation failed: " << e.what() << "\n";
        return config_error;
    }
    const ConstructedLine& line = *built;

    io::json doc = io::system_document(line.system);
    doc["line"] = {{"mu", line.family.mu}, {"z", io::to_json(line.family.z)}, {"C", io::to_json(line.family.C)}};
    const std::string doc_text = doc.dump(2) + "\n";
    const auto path = detail::out_path(opt, "constructed_system.json");
    detail::write_file(path, doc_text);

    // Re-load the written document to confirm it validates.
    bool reload_ok = true;
    try {
        const io::RunConfig back = io::parse_config(doc_text);
        (void)validate(*back.system);
    } catch (const std::exception& e) {
        reload_ok = false;
        err << "written system does not reload: " << e.what() << "\n";
    }

    const double alphas[] = {0.0, 0.25, 0.5, 0.75, 1.0};
    double worst = 0.0;
    std::ostringstream os;
    os << "== constructed line\n";
    os << "mu = " << detail::fixed4(line.family.mu) << "\n";
    os << "z = " << detail::vec4(line.family.z) << "\n";
    os << "system written to " << path.string() << "\n";
    os << "== verification\n";
    for (double a : alphas) {
        const double r = residual(line.system, line.family.point(a));
        worst = std::max(worst, r);
        os << "alpha = " << detail::fixed4(a) << "  residual = " << bivirus::detail::sci(r) << "\n";
    }
    const bool line_expected = std::abs(line.family.mu - 1.0) <= 1e-12;
    if (line_expected)
        os << "line residuals " << (worst <= kLineResidualTol ? "within" : "EXCEED") << " " << kLineResidualTol << "\n";
    else
        os << "mu != 1: the segment is not an equilibrium set, residuals are informational\n";
    os << "(z,0): " << endpoint_verdict(line_endpoint_class(line)) << "\n";
    os << "reload: " << (reload_ok ? "ok" : "failed") << "\n";
    out << os.str();
    if (!reload_ok) return failure;
    if (line_expected && worst > kLineResidualTol) return inconclusive;
    return ok;
}

// ---------------------------------------------------------------------------
// Entry point

/// Parses argv and dispatches. Exit codes: 0 success, 1 failed case cells or an
/// unwritable artifact, 2 config/validation error, 3 inconclusive numerics.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Networked bivirus SIS analysis", "bivirus"};
    app.require_subcommand(1);
    Options opt;
    std::string config_path;
    double tol = 0, t_end = 0, eta = 0;
    std::uint64_t seed = 0;

    auto add_common = [&](CLI::App* sub, bool needs_config) {
        if (needs_config) sub->add_option("--config", config_path, "configuration document (JSON)")->required();
        sub->add_option("--out", opt.out_dir, "output directory");
        sub->add_option("--tol", tol, "tolerance (critical band / convergence)")->check(CLI::PositiveNumber);
        sub->add_option("--t-end", t_end, "integration horizon")->check(CLI::PositiveNumber);
        sub->add_option("--eta", eta, "corner offset for the sandwich test")->check(CLI::PositiveNumber);
        sub->add_option("--seed", seed, "seed for random probes");
        sub->add_flag("--json", opt.json, "emit a JSON document instead of text");
    };
    CLI::App* analyze_cmd = app.add_subcommand("analyze", "equilibria, stability and threshold report");
    CLI::App* simulate_cmd = app.add_subcommand("simulate", "integrate every initial condition to CSV");
    CLI::App* sandwich_cmd = app.add_subcommand("sandwich", "corner sandwich test");
    CLI::App* cases_cmd = app.add_subcommand("cases", "reproduce the two-node reference cases");
    CLI::App* line_cmd = app.add_subcommand("construct-line", "build a system with a line of equilibria");
    add_common(analyze_cmd, true);
    add_common(simulate_cmd, true);
    add_common(sandwich_cmd, true);
    add_common(cases_cmd, false);
    add_common(line_cmd, true);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return ok;
    } catch (const CLI::ParseError& e) {
        err << e.what() << "\n";
        return config_error;
    }
    for (CLI::App* sub : app.get_subcommands()) {
        if (sub->count("--tol")) opt.tol = tol;
        if (sub->count("--t-end")) opt.t_end = t_end;
        if (sub->count("--eta")) opt.eta = eta;
        if (sub->count("--seed")) opt.seed = seed;
    }

    try {
        if (cases_cmd->parsed()) return cmd_cases(opt, out, err);
        const io::RunConfig cfg = io::load_config(config_path);
        if (analyze_cmd->parsed()) return cmd_analyze(cfg, opt, out, err);
        if (simulate_cmd->parsed()) return cmd_simulate(cfg, opt, out, err);
        if (sandwich_cmd->parsed()) return cmd_sandwich(cfg, opt, out, err);
        return cmd_construct_line(cfg, opt, out, err);
    } catch (const io::ConfigError& e) {
        err << e.what() << "\n";
        return config_error;
    } catch (const DomainError& e) {
        err << "error: " << e.what() << "\n";
        return config_error;
    } catch (const NumericError& e) {
        err << "numerics inconclusive: " << e.what() << "\n";
        return inconclusive;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return failure;
    }
}

}  // namespace bivirus::cli
