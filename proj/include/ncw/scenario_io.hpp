// Scenario ingestion (strict JSON schema with field-path diagnostics),
// bundled experiment presets, CSV time-series emission/parsing with a
// canonical 17-significant-digit format, and JSON report serialization.
//
// Scenario schema (all strengths/rates are JSON numbers):
//   {
//     "schema_version": 1,
//     "scenario": {
//       "b0_strength": 160.0, "r0_strength": 120.0, "r_R": 0.5,
//       "agents": [ {"alpha_d": 0.15, "alpha_c": 0.4, "a0": 30.0, "r": 0.3}, ... ]
//     },
//     "integrator": {"dt": 1e-3, "event_tol": 1e-9, "t_max": 100.0},   // optional, per-field
//     "policies": {"P1": [[0.7, 0.2, 0.1]], ...}                       // optional
//   }
// Unknown fields are rejected so typos in rate names cannot pass silently.
// Agent indices in diagnostics are 1-based, matching A^1..A^n prose.

#pragma once

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "ncw/dynamics.hpp"
#include "ncw/lanchester_core.hpp"
#include "ncw/strategy.hpp"
#include "ncw/verification.hpp"

namespace ncw::io {

struct io_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct LoadedScenario {
    core::Scenario scenario;
    dynamics::IntegratorConfig integrator;  // defaults overlaid with file overrides
    std::map<std::string, std::vector<core::Allocation>> policies;
};

namespace detail {

using nlohmann::json;

inline void require_keys(const json& obj, const std::string& path,
                         const std::vector<std::string>& allowed,
                         const std::vector<std::string>& required) {
    if (!obj.is_object()) throw io_error(path + ": expected object");
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const std::string& k : allowed)
            if (k == item.key()) { known = true; break; }
        if (!known) throw io_error(path + ": unknown field \"" + item.key() + "\"");
    }
    for (const std::string& k : required)
        if (!obj.contains(k)) throw io_error(path + ": missing field \"" + k + "\"");
}

inline double get_number(const json& obj, const std::string& path, const std::string& key) {
    const json& v = obj.at(key);
    if (!v.is_number()) throw io_error(path + "." + key + ": expected number");
    return v.get<double>();
}

}  // namespace detail

// Parses and validates a scenario document.  Syntax errors carry the line and
// column (from the JSON parser); schema and invariant violations carry the
// offending field path.
inline LoadedScenario load_scenario(const std::string& text) {
    using detail::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw io_error(std::string("scenario: ") + e.what());  // includes line/column
    }

    detail::require_keys(doc, "scenario file",
                         {"schema_version", "scenario", "integrator", "policies"},
                         {"schema_version", "scenario"});
    if (!doc["schema_version"].is_number_integer() || doc["schema_version"].get<int>() != 1)
        throw io_error("schema_version: expected 1");

    LoadedScenario out;
    const json& s = doc["scenario"];
    detail::require_keys(s, "scenario", {"b0_strength", "r0_strength", "r_R", "agents"},
                         {"b0_strength", "r0_strength", "r_R", "agents"});
    out.scenario.b0_strength = detail::get_number(s, "scenario", "b0_strength");
    out.scenario.r0_strength = detail::get_number(s, "scenario", "r0_strength");
    out.scenario.r_R = detail::get_number(s, "scenario", "r_R");
    if (!s["agents"].is_array()) throw io_error("scenario.agents: expected array");
    for (std::size_t i = 0; i < s["agents"].size(); ++i) {
        const std::string path = "agents[" + std::to_string(i + 1) + "]";
        const json& a = s["agents"][i];
        detail::require_keys(a, path, {"alpha_d", "alpha_c", "a0", "r"},
                             {"alpha_d", "alpha_c", "a0", "r"});
        core::AgentSpec spec;
        spec.alpha_d = detail::get_number(a, path, "alpha_d");
        spec.alpha_c = detail::get_number(a, path, "alpha_c");
        spec.a0 = detail::get_number(a, path, "a0");
        spec.r = detail::get_number(a, path, "r");
        out.scenario.agents.push_back(spec);
    }

    if (doc.contains("integrator")) {
        const json& cfg = doc["integrator"];
        detail::require_keys(cfg, "integrator", {"dt", "event_tol", "t_max"}, {});
        if (cfg.contains("dt")) out.integrator.dt = detail::get_number(cfg, "integrator", "dt");
        if (cfg.contains("event_tol"))
            out.integrator.event_tol = detail::get_number(cfg, "integrator", "event_tol");
        if (cfg.contains("t_max"))
            out.integrator.t_max = detail::get_number(cfg, "integrator", "t_max");
    }

    if (doc.contains("policies")) {
        const json& pol = doc["policies"];
        if (!pol.is_object()) throw io_error("policies: expected object");
        for (const auto& item : pol.items()) {
            const std::string path = "policies." + item.key();
            if (!item.value().is_array() || item.value().empty())
                throw io_error(path + ": expected non-empty array of allocations");
            std::vector<core::Allocation> stages;
            for (std::size_t k = 0; k < item.value().size(); ++k) {
                const json& row = item.value()[k];
                const std::string rpath = path + "[" + std::to_string(k) + "]";
                if (!row.is_array() || row.size() != out.scenario.n_agents() + 1)
                    throw io_error(rpath + ": expected array of " +
                                   std::to_string(out.scenario.n_agents() + 1) + " numbers");
                std::vector<double> p;
                for (const json& v : row) {
                    if (!v.is_number()) throw io_error(rpath + ": expected number");
                    p.push_back(v.get<double>());
                }
                try {
                    stages.push_back(core::Allocation(std::move(p)));
                } catch (const std::invalid_argument& e) {
                    throw io_error(rpath + ": " + e.what());
                }
            }
            out.policies.emplace(item.key(), std::move(stages));
        }
    }

    try {
        out.scenario.validate();
        out.integrator.validate();
    } catch (const std::invalid_argument& e) {
        throw io_error(e.what());  // validate() messages already carry the field path
    }
    return out;
}

// Canonical serialization: numbers round-trip bitwise (shortest-round-trip
// double formatting), keys are emitted in sorted order, integrator settings
// are always written out in full.
inline std::string serialize_scenario(const LoadedScenario& scn) {
    using detail::json;
    json doc;
    doc["schema_version"] = 1;
    doc["scenario"]["b0_strength"] = scn.scenario.b0_strength;
    doc["scenario"]["r0_strength"] = scn.scenario.r0_strength;
    doc["scenario"]["r_R"] = scn.scenario.r_R;
    doc["scenario"]["agents"] = json::array();
    for (const core::AgentSpec& a : scn.scenario.agents)
        doc["scenario"]["agents"].push_back(
            {{"alpha_d", a.alpha_d}, {"alpha_c", a.alpha_c}, {"a0", a.a0}, {"r", a.r}});
    doc["integrator"] = {{"dt", scn.integrator.dt},
                         {"event_tol", scn.integrator.event_tol},
                         {"t_max", scn.integrator.t_max}};
    if (!scn.policies.empty()) {
        json pol = json::object();
        for (const auto& [name, stages] : scn.policies) {
            json arr = json::array();
            for (const core::Allocation& p : stages) arr.push_back(p.p());
            pol[name] = std::move(arr);
        }
        doc["policies"] = std::move(pol);
    }
    return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Bundled experiment presets
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& preset_names() {
    static const std::vector<std::string> names = {"exp1", "exp2", "exp3"};
    return names;
}

inline bool is_preset(const std::string& name) {
    for (const std::string& n : preset_names())
        if (n == name) return true;
    return false;
}

// Raw text of one bundled preset (also valid input for load_scenario, which
// is exactly how load_preset consumes it).
inline const char* preset_text(const std::string& name) {
    if (name == "exp1")
        return R"({
  "schema_version": 1,
  "scenario": {
    "b0_strength": 160.0,
    "r0_strength": 120.0,
    "r_R": 0.5,
    "agents": [
      {"alpha_d": 0.15, "alpha_c": 0.4, "a0": 30.0, "r": 0.3},
      {"alpha_d": 0.1, "alpha_c": 0.3, "a0": 20.0, "r": 0.2}
    ]
  },
  "policies": {
    "P1": [[0.7, 0.2, 0.1]],
    "P2": [[0.0, 1.0, 0.0], [1.0, 0.0, 0.0]]
  }
})";
    if (name == "exp2")
        return R"({
  "schema_version": 1,
  "scenario": {
    "b0_strength": 160.0,
    "r0_strength": 120.0,
    "r_R": 0.5,
    "agents": [
      {"alpha_d": 0.15, "alpha_c": 0.4, "a0": 30.0, "r": 0.15},
      {"alpha_d": 0.1, "alpha_c": 0.3, "a0": 20.0, "r": 0.4}
    ]
  },
  "policies": {
    "P1": [[1.0, 0.0, 0.0]],
    "P2": [[0.0, 1.0, 0.0]]
  }
})";
    if (name == "exp3")
        return R"({
  "schema_version": 1,
  "scenario": {
    "b0_strength": 200.0,
    "r0_strength": 120.0,
    "r_R": 0.5,
    "agents": [
      {"alpha_d": 0.15, "alpha_c": 0.4, "a0": 30.0, "r": 0.3},
      {"alpha_d": 0.1, "alpha_c": 0.3, "a0": 20.0, "r": 0.4}
    ]
  }
})";
    throw io_error("unknown preset \"" + name + "\" (available: exp1, exp2, exp3)");
}

inline LoadedScenario load_preset(const std::string& name) {
    return load_scenario(preset_text(name));
}

// ---------------------------------------------------------------------------
// Time-series CSV
// ---------------------------------------------------------------------------

struct TimeSeriesRecord {
    double t = 0.0;
    int stage = 0;
    double b = 0.0;
    double r = 0.0;
    std::vector<double> a;  // A1..An
    std::vector<double> p;  // p0..pn, the stage's allocation
};

struct TimeSeries {
    std::size_t n_agents = 0;
    std::vector<TimeSeriesRecord> rows;
};

namespace detail {

inline void append_number(std::string& row, double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    row += buf;
}

inline std::string header_line(std::size_t n_agents) {
    std::string h = "t,stage,B,R";
    for (std::size_t i = 1; i <= n_agents; ++i) h += ",A" + std::to_string(i);
    for (std::size_t j = 0; j <= n_agents; ++j) h += ",p" + std::to_string(j);
    h += "\n";
    return h;
}

inline std::string record_line(double t, int stage, double b, double r,
                               const std::vector<double>& a, const std::vector<double>& p) {
    std::string row;
    append_number(row, t);
    row += "," + std::to_string(stage);
    row += ",";
    append_number(row, b);
    row += ",";
    append_number(row, r);
    for (double v : a) {
        row += ",";
        append_number(row, v);
    }
    for (double v : p) {
        row += ",";
        append_number(row, v);
    }
    row += "\n";
    return row;
}

}  // namespace detail

// Emits `t,stage,B,R,A1..An,p0..pn` rows, one per sample, 17 significant
// digits.  Stage switches produce two rows at the same t (the event sample of
// the old stage, then the entry sample of the new one), which keeps per-stage
// plots unambiguous.  Returns the number of bytes written.
inline std::size_t emit_timeseries(const strategy::CampaignResult& result, std::ostream& sink) {
    if (result.stages.empty())
        throw std::invalid_argument("emit_timeseries: campaign has no stages");
    const std::size_t n = result.stages.front().plan.allocation.arity() - 1;
    std::size_t bytes = 0;
    auto write = [&](const std::string& s) {
        sink.write(s.data(), static_cast<std::streamsize>(s.size()));
        bytes += s.size();
    };
    write(detail::header_line(n));
    for (std::size_t si = 0; si < result.stages.size(); ++si) {
        const strategy::StageRecord& stage = result.stages[si];
        for (const core::ForceState& s : stage.trajectory.samples)
            write(detail::record_line(s.t, static_cast<int>(si), s.b, s.r, s.a,
                                      stage.plan.allocation.p()));
    }
    if (!sink) throw io_error("emit_timeseries: write failed");
    return bytes;
}

inline std::size_t emit_timeseries(const TimeSeries& series, std::ostream& sink) {
    std::size_t bytes = 0;
    auto write = [&](const std::string& s) {
        sink.write(s.data(), static_cast<std::streamsize>(s.size()));
        bytes += s.size();
    };
    write(detail::header_line(series.n_agents));
    for (const TimeSeriesRecord& rec : series.rows)
        write(detail::record_line(rec.t, rec.stage, rec.b, rec.r, rec.a, rec.p));
    if (!sink) throw io_error("emit_timeseries: write failed");
    return bytes;
}

// Parses CSV produced by emit_timeseries (or hand-rolled equivalents).  The
// header fixes the agent count; every row must match it.  Re-emitting a
// parsed series reproduces the input byte for byte.
inline TimeSeries parse_timeseries(std::istream& source) {
    std::string line;
    if (!std::getline(source, line)) throw io_error("timeseries: empty input (no header)");
    std::vector<std::string> cols;
    {
        std::size_t pos = 0;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            cols.push_back(line.substr(pos, comma == std::string::npos ? comma : comma - pos));
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
    }
    if (cols.size() < 5 || cols.size() % 2 == 0)
        throw io_error("timeseries header: expected t,stage,B,R,A1..An,p0..pn");
    const std::size_t n = (cols.size() - 5) / 2;
    auto expect = [&](std::size_t idx, const std::string& name) {
        if (cols[idx] != name)
            throw io_error("timeseries header: column " + std::to_string(idx + 1) + " is \"" +
                           cols[idx] + "\", expected \"" + name + "\"");
    };
    expect(0, "t");
    expect(1, "stage");
    expect(2, "B");
    expect(3, "R");
    for (std::size_t i = 1; i <= n; ++i) expect(3 + i, "A" + std::to_string(i));
    for (std::size_t j = 0; j <= n; ++j) expect(4 + n + j, "p" + std::to_string(j));

    TimeSeries series;
    series.n_agents = n;
    const std::size_t want = cols.size();
    std::size_t line_no = 1;
    while (std::getline(source, line)) {
        ++line_no;
        if (line.empty()) continue;  // tolerate a trailing blank line
        std::vector<double> vals;
        std::size_t pos = 0;
        std::size_t field = 0;
        int stage = 0;
        TimeSeriesRecord rec;
        while (true) {
            const std::size_t comma = line.find(',', pos);
            const std::string tok =
                line.substr(pos, comma == std::string::npos ? comma : comma - pos);
            const std::string where =
                "timeseries line " + std::to_string(line_no) + " field " + std::to_string(field + 1);
            if (field == 1) {
                std::size_t used = 0;
                try {
                    stage = std::stoi(tok, &used);
                } catch (const std::exception&) {
                    throw io_error(where + ": bad stage index \"" + tok + "\"");
                }
                if (used != tok.size()) throw io_error(where + ": bad stage index \"" + tok + "\"");
            } else {
                char* end = nullptr;
                const double v = std::strtod(tok.c_str(), &end);
                if (tok.empty() || end != tok.c_str() + tok.size())
                    throw io_error(where + ": bad number \"" + tok + "\"");
                vals.push_back(v);
            }
            ++field;
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (field != want)
            throw io_error("timeseries line " + std::to_string(line_no) + ": expected " +
                           std::to_string(want) + " fields, got " + std::to_string(field));
        rec.t = vals[0];
        rec.stage = stage;
        rec.b = vals[1];
        rec.r = vals[2];
        rec.a.assign(vals.begin() + 3, vals.begin() + 3 + static_cast<std::ptrdiff_t>(n));
        rec.p.assign(vals.begin() + 3 + static_cast<std::ptrdiff_t>(n), vals.end());
        series.rows.push_back(std::move(rec));
    }
    return series;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

inline nlohmann::json to_json(const core::ForceState& s) {
    return {{"t", s.t}, {"b", s.b}, {"r", s.r}, {"a", s.a}, {"x", s.x}};
}

inline nlohmann::json to_json(const strategy::CampaignResult& result) {
    using nlohmann::json;
    json stages = json::array();
    for (std::size_t si = 0; si < result.stages.size(); ++si) {
        const strategy::StageRecord& st = result.stages[si];
        json stage;
        stage["index"] = si;
        stage["target"] =
            st.plan.target ? json(core::to_string(*st.plan.target)) : json(nullptr);
        stage["allocation"] = st.plan.allocation.p();
        stage["threat_rates"] = st.plan.rates.b;
        const auto& samples = st.trajectory.samples;
        stage["t_start"] = samples.empty() ? json(nullptr) : json(samples.front().t);
        stage["t_end"] = samples.empty() ? json(nullptr) : json(samples.back().t);
        json events = json::array();
        for (const dynamics::Event& e : st.trajectory.events)
            events.push_back({{"t", e.t}, {"entity", core::to_string(e.entity)}});
        stage["events"] = std::move(events);
        json crossings = json::array();
        for (const dynamics::RateCrossing& c : st.trajectory.rate_crossings)
            crossings.push_back({{"t", c.t},
                                 {"from", core::to_string(c.from)},
                                 {"to", core::to_string(c.to)}});
        stage["rate_crossings"] = std::move(crossings);
        stage["horizon_reached"] = st.trajectory.horizon_reached;
        stage["samples"] = st.trajectory.samples.size();
        stages.push_back(std::move(stage));
    }
    return {{"outcome", strategy::to_string(result.outcome)},
            {"final_state", to_json(result.final_state)},
            {"stages", std::move(stages)}};
}

inline nlohmann::json to_json(const verification::ScalarizationReport& report) {
    using nlohmann::json;
    json rows = json::array();
    for (const auto& row : report.rows)
        rows.push_back({{"gamma", row.gamma},
                        {"grid_min", row.grid_min},
                        {"grid_argmin", row.grid_argmin.p()},
                        {"vertex_value", row.vertex_value}});
    return {{"simplex_step", report.simplex_step},
            {"vertex_target", core::to_string(report.vertex_target)},
            {"vertex", report.vertex.p()},
            {"rows", std::move(rows)},
            {"pass", report.pass}};
}

inline nlohmann::json to_json(const verification::DominanceReport& report) {
    using nlohmann::json;
    json margins = json::array();
    for (const auto& m : report.margins)
        margins.push_back({{"allocation", m.allocation.p()}, {"margin", m.margin}});
    return {{"grid_step", report.grid_step},
            {"optimal", report.optimal.p()},
            {"margins", std::move(margins)},
            {"worst_margin", report.worst_margin},
            {"worst_allocation", report.worst_allocation.p()},
            {"pass", report.pass}};
}

}  // namespace ncw::io
