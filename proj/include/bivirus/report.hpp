#pragma once

// Aggregated analysis of one system and its text / JSON renderings.

#include "bivirus/equilibria.hpp"
#include "bivirus/io.hpp"
#include "bivirus/model.hpp"

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace bivirus {

struct AnalysisReport {
    ReproductionNumbers R;
    EquilibriumSet equilibria;
    BoundaryStability boundary;
    std::optional<SufficientConditions> sufficient;  // only when both viruses are supercritical
    std::vector<std::string> flags;
};

inline AnalysisReport analyze(const BivirusSystem& sys, double class_tol = speclin::kClassifyTol) {
    AnalysisReport r;
    r.equilibria = enumerate_equilibria(sys);
    r.R = r.equilibria.R;
    r.boundary = boundary_stability(sys, class_tol);
    if (r.R.R1 > 1.0 && r.R.R2 > 1.0) r.sufficient = sufficient_conditions(sys, class_tol);
    if (r.equilibria.degenerate) r.flags.push_back("line of equilibria suspected");
    for (const auto* v : {&r.boundary.virus1, &r.boundary.virus2})
        if (*v && (*v)->verdict == BoundaryClass::critical)
            r.flags.push_back("critical boundary verdict: parameters are nongeneric");
    return r;
}

namespace detail {

inline std::string fixed4(double v) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4) << v;
    return os.str();
}

inline std::string sci(double v) {
    std::ostringstream os;
    os << std::scientific << std::setprecision(2) << v;
    return os.str();
}

inline std::string vec4(const Vec& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) s += ", ";
        s += fixed4(v(i));
    }
    return s + "]";
}

}  // namespace detail

inline std::string render_text(const AnalysisReport& r) {
    using detail::fixed4;
    std::ostringstream os;
    os << "== reproduction numbers\n";
    os << "R1 = " << fixed4(r.R.R1) << "\n";
    os << "R2 = " << fixed4(r.R.R2) << "\n";

    os << "== equilibria (" << r.equilibria.equilibria.size() << ")\n";
    std::size_t idx = 0;
    for (const auto& e : r.equilibria.equilibria) {
        os << "#" << idx++ << " " << to_string(e.kind) << " class=" << to_string(e.spectrum_class)
           << " abscissa=" << fixed4(e.abscissa) << " residual=" << detail::sci(e.residual)
           << " x1=" << detail::vec4(e.state.x1) << " x2=" << detail::vec4(e.state.x2) << "\n";
    }

    os << "== boundary stability\n";
    auto verdict = [&](const char* label, const std::optional<BoundaryVerdict>& v) {
        os << label << ": ";
        if (!v) os << "does not exist (virus subcritical)\n";
        else os << to_string(v->verdict) << " (rho_cross = " << fixed4(v->rho_cross) << ")\n";
    };
    verdict("(x1bar, 0)", r.boundary.virus1);
    verdict("(0, x2bar)", r.boundary.virus2);

    os << "== sufficient conditions\n";
    if (!r.sufficient) {
        os << "not applicable (a virus is subcritical)\n";
    } else {
        os << "entrywise_dominance: " << to_string(r.sufficient->entrywise_dominance) << "\n";
        os << "row_sum_gap: " << to_string(r.sufficient->row_sum_gap) << "\n";
        os << "profile_dominance: " << to_string(r.sufficient->profile_dominance) << "\n";
    }

    os << "== flags\n";
    if (r.flags.empty()) os << "none\n";
    for (const auto& f : r.flags) os << f << "\n";
    for (const auto& note : r.equilibria.notes) os << "note: " << note << "\n";
    return os.str();
}

inline io::json render_json(const AnalysisReport& r) {
    using io::json;
    using io::to_json;
    json doc;
    doc["R1"] = r.R.R1;
    doc["R2"] = r.R.R2;
    json eqs = json::array();
    for (const auto& e : r.equilibria.equilibria) {
        eqs.push_back({{"kind", to_string(e.kind)},
                       {"class", to_string(e.spectrum_class)},
                       {"abscissa", e.abscissa},
                       {"residual", e.residual},
                       {"x1", to_json(e.state.x1)},
                       {"x2", to_json(e.state.x2)}});
    }
    doc["equilibria"] = eqs;
    auto verdict = [](const std::optional<BoundaryVerdict>& v) -> json {
        if (!v) return nullptr;
        return {{"verdict", to_string(v->verdict)}, {"rho_cross", v->rho_cross}, {"profile", to_json(v->profile)}};
    };
    doc["boundary"] = {{"virus1", verdict(r.boundary.virus1)}, {"virus2", verdict(r.boundary.virus2)}};
    if (r.sufficient)
        doc["sufficient_conditions"] = {{"entrywise_dominance", to_string(r.sufficient->entrywise_dominance)},
                                        {"row_sum_gap", to_string(r.sufficient->row_sum_gap)},
                                        {"profile_dominance", to_string(r.sufficient->profile_dominance)}};
    else
        doc["sufficient_conditions"] = nullptr;
    doc["degenerate"] = r.equilibria.degenerate;
    doc["flags"] = r.flags;
    doc["notes"] = r.equilibria.notes;
    return doc;
}

}  // namespace bivirus
