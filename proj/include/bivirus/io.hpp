#pragma once

// Run configuration (JSON) and trajectory CSV files.

#include "bivirus/equilibria.hpp"
#include "bivirus/model.hpp"
#include "bivirus/sim.hpp"

#include "json.hpp"

#include <cstdint>
#include <algorithm>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bivirus::io {

using nlohmann::json;

inline constexpr int kConfigVersion = 1;

/// Malformed configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& message, int line)
        : std::runtime_error(line > 0 ? "config line " + std::to_string(line) + ": " + message : "config: " + message),
          line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

struct RunParams {
    double tol = sim::kConvergenceTol;
    double t_end = sim::kDefaultTEnd;
    double eta = sim::kDefaultEta;
    std::uint64_t seed = 0;
    std::size_t grid_steps = 10;
    double sample_dt = 0.0;
    std::size_t stride = 1;
    std::size_t probes = 0;
};

struct ConstructSpec {
    Mat B1;
    double mu = 1.0;
    LineStrategy strategy = line_strategy::RankOne{};
};

struct RunConfig {
    std::optional<SystemCandidate> system;
    std::vector<State> initial_conditions;
    RunParams params;
    std::optional<ConstructSpec> construct;
};

namespace detail {

inline int line_of_key(const std::string& text, const std::string& key) {
    const auto pos = text.find("\"" + key + "\"");
    if (pos == std::string::npos) return 0;
    return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

struct Reader {
    const std::string& text;

    [[noreturn]] void fail(const std::string& key, const std::string& msg) const {
        throw ConfigError(key + ": " + msg, line_of_key(text, key));
    }

    double number(const json& j, const std::string& key) const {
        if (!j.is_number()) fail(key, "expected a number");
        return j.get<double>();
    }

    Vec vector(const json& j, const std::string& key) const {
        if (!j.is_array()) fail(key, "expected an array of numbers");
        Vec v(static_cast<Eigen::Index>(j.size()));
        for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Eigen::Index>(i)) = number(j[i], key);
        return v;
    }

    Mat matrix(const json& j, const std::string& key) const {
        if (!j.is_array() || j.empty()) fail(key, "expected a nested array (row-major matrix)");
        const std::size_t rows = j.size();
        if (!j[0].is_array()) fail(key, "expected a nested array (row-major matrix)");
        const std::size_t cols = j[0].size();
        Mat m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
        for (std::size_t r = 0; r < rows; ++r) {
            if (!j[r].is_array() || j[r].size() != cols) fail(key, "ragged matrix rows");
            for (std::size_t c = 0; c < cols; ++c)
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = number(j[r][c], key);
        }
        return m;
    }

    // Recovery rates: a matrix, or a vector taken as the diagonal.
    Mat recovery(const json& j, const std::string& key) const {
        if (j.is_array() && !j.empty() && j[0].is_number()) return Mat(vector(j, key).asDiagonal());
        return matrix(j, key);
    }
};

}  // namespace detail

/// Parses a configuration document. Throws ConfigError with a line anchor.
inline RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        // Byte offset -> line number.
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const int line = 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(upto), '\n'));
        throw ConfigError(std::string("parse error: ") + e.what(), line);
    }
    if (!doc.is_object()) throw ConfigError("top level must be an object", 1);
    const detail::Reader rd{text};

    if (!doc.contains("version")) throw ConfigError("missing 'version' key", 1);
    if (!doc["version"].is_number_integer() || doc["version"].get<int>() != kConfigVersion)
        rd.fail("version", "unsupported version (expected " + std::to_string(kConfigVersion) + ")");

    RunConfig cfg;
    if (doc.contains("B1") && doc.contains("B2")) {
        SystemCandidate c;
        c.B1 = rd.matrix(doc["B1"], "B1");
        c.B2 = rd.matrix(doc["B2"], "B2");
        const Eigen::Index n = c.B1.rows();
        c.D1 = doc.contains("D1") ? rd.recovery(doc["D1"], "D1") : Mat(Mat::Identity(n, n));
        c.D2 = doc.contains("D2") ? rd.recovery(doc["D2"], "D2") : Mat(Mat::Identity(n, n));
        if (doc.contains("n")) {
            if (!doc["n"].is_number_integer()) rd.fail("n", "expected an integer");
            if (doc["n"].get<long>() != static_cast<long>(n)) rd.fail("n", "does not match the size of B1");
        }
        cfg.system = std::move(c);
    } else if (doc.contains("B2") && !doc.contains("construct")) {
        rd.fail("B2", "B1 missing");
    }

    if (doc.contains("initial_conditions")) {
        const json& ics = doc["initial_conditions"];
        if (!ics.is_array()) rd.fail("initial_conditions", "expected an array");
        for (const json& ic : ics) {
            if (!ic.is_object() || !ic.contains("x1") || !ic.contains("x2"))
                rd.fail("initial_conditions", "each entry needs 'x1' and 'x2'");
            State s{rd.vector(ic["x1"], "initial_conditions"), rd.vector(ic["x2"], "initial_conditions")};
            if (s.x1.size() != s.x2.size()) rd.fail("initial_conditions", "x1 and x2 lengths differ");
            cfg.initial_conditions.push_back(std::move(s));
        }
    }

    if (doc.contains("params")) {
        const json& p = doc["params"];
        if (!p.is_object()) rd.fail("params", "expected an object");
        auto positive = [&](const char* key, double& field) {
            if (!p.contains(key)) return;
            const double v = rd.number(p[key], key);
            if (!(v > 0.0)) rd.fail(key, "must be positive");
            field = v;
        };
        positive("tol", cfg.params.tol);
        positive("t_end", cfg.params.t_end);
        positive("eta", cfg.params.eta);
        if (p.contains("sample_dt")) {
            const double v = rd.number(p["sample_dt"], "sample_dt");
            if (v < 0.0) rd.fail("sample_dt", "must be nonnegative");
            cfg.params.sample_dt = v;
        }
        auto count = [&](const char* key, std::size_t& field, bool allow_zero) {
            if (!p.contains(key)) return;
            if (!p[key].is_number_unsigned() || (!allow_zero && p[key].get<std::size_t>() == 0))
                rd.fail(key, "expected a positive integer");
            field = p[key].get<std::size_t>();
        };
        count("grid_steps", cfg.params.grid_steps, false);
        count("stride", cfg.params.stride, false);
        count("probes", cfg.params.probes, true);
        if (p.contains("seed")) {
            if (!p["seed"].is_number_unsigned()) rd.fail("seed", "expected a nonnegative integer");
            cfg.params.seed = p["seed"].get<std::uint64_t>();
        }
    }

    if (doc.contains("construct")) {
        const json& c = doc["construct"];
        if (!c.is_object()) rd.fail("construct", "expected an object");
        ConstructSpec spec;
        if (c.contains("B1")) spec.B1 = rd.matrix(c["B1"], "B1");
        else if (doc.contains("B1")) spec.B1 = rd.matrix(doc["B1"], "B1");
        else rd.fail("construct", "B1 missing");
        if (c.contains("mu")) {
            spec.mu = rd.number(c["mu"], "mu");
            if (!(spec.mu > 0.0)) rd.fail("mu", "must be positive");
        }
        const std::string strategy = c.value("strategy", std::string("rank_one"));
        if (strategy == "rank_one") {
            spec.strategy = line_strategy::RankOne{};
        } else if (strategy == "blend") {
            if (!c.contains("U")) rd.fail("strategy", "blend needs 'U'");
            line_strategy::Blend b{rd.matrix(c["U"], "U"), 0.5};
            if (c.contains("weight")) b.weight = rd.number(c["weight"], "weight");
            spec.strategy = std::move(b);
        } else if (strategy == "explicit") {
            if (!c.contains("C")) rd.fail("strategy", "explicit needs 'C'");
            spec.strategy = line_strategy::Explicit{rd.matrix(c["C"], "C")};
        } else {
            rd.fail("strategy", "unknown strategy '" + strategy + "'");
        }
        cfg.construct = std::move(spec);
    }
    return cfg;
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open '" + path + "'", 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

inline json to_json(const Vec& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

inline json to_json(const Mat& m) {
    json a = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(Vec(m.row(r).transpose())));
    return a;
}

inline json to_json(const State& s) { return json{{"x1", to_json(s.x1)}, {"x2", to_json(s.x2)}}; }

/// A loadable configuration document describing `sys`.
inline json system_document(const BivirusSystem& sys) {
    json doc;
    doc["version"] = kConfigVersion;
    doc["n"] = sys.n();
    doc["B1"] = to_json(sys.B1());
    doc["D1"] = to_json(sys.D1());
    doc["B2"] = to_json(sys.B2());
    doc["D2"] = to_json(sys.D2());
    return doc;
}

// ---------------------------------------------------------------------------
// CSV: header t,x1_1,...,x1_n,x2_1,...,x2_n; one row per recorded state;
// 17 significant digits; LF line endings.

inline std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::string csv_header(Eigen::Index n) {
    std::string h = "t";
    for (Eigen::Index i = 1; i <= n; ++i) h += ",x1_" + std::to_string(i);
    for (Eigen::Index i = 1; i <= n; ++i) h += ",x2_" + std::to_string(i);
    return h;
}

inline void write_csv(std::ostream& out, const sim::Trajectory& traj) {
    const Eigen::Index n = traj.states.front().n();
    out << csv_header(n) << '\n';
    for (std::size_t k = 0; k < traj.times.size(); ++k) {
        out << format_number(traj.times[k]);
        const State& s = traj.states[k];
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_number(s.x1(i));
        for (Eigen::Index i = 0; i < n; ++i) out << ',' << format_number(s.x2(i));
        out << '\n';
    }
}

struct CsvTrajectory {
    std::vector<double> times;
    std::vector<State> states;
};

inline CsvTrajectory read_csv(std::istream& in) {
    CsvTrajectory out;
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
    const auto columns = static_cast<Eigen::Index>(std::count(line.begin(), line.end(), ',') + 1);
    if (columns < 3 || (columns - 1) % 2 != 0 || line.rfind("t,", 0) != 0)
        throw std::runtime_error("csv: malformed header");
    const Eigen::Index n = (columns - 1) / 2;
    if (line != csv_header(n)) throw std::runtime_error("csv: malformed header");
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string cell;
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) row.push_back(std::stod(cell));
        if (static_cast<Eigen::Index>(row.size()) != columns) throw std::runtime_error("csv: ragged row");
        State s{Vec(n), Vec(n)};
        for (Eigen::Index i = 0; i < n; ++i) {
            s.x1(i) = row[static_cast<std::size_t>(1 + i)];
            s.x2(i) = row[static_cast<std::size_t>(1 + n + i)];
        }
        out.times.push_back(row[0]);
        out.states.push_back(std::move(s));
    }
    return out;
}

}  // namespace bivirus::io
