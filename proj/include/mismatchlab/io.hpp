#pragma once
// JSON and CSV serialization. Instance files hold any subset of
// {"target", "channel", "code"}:
//   target:  {"U1", "U2", "W", "rows": [[...], ...]}
//   channel: {"X1", "X2", "Y", "uses", "rows": [[...], ...]}
//   code:    {"f1": [...], "f2": [...], "decoder": [...]}
// All serialization is deterministic (sorted keys, fixed layouts), so
// identical values produce identical bytes.

#include <mismatchlab/core.hpp>
#include <mismatchlab/feasibility.hpp>
#include <mismatchlab/montecarlo.hpp>

#include <json.hpp>

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>

namespace mismatchlab {

using Json = nlohmann::json;

class SchemaError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class FileError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

inline Json target_to_json(const TargetFunction& a) {
    Json rows = Json::array();
    for (int i = 0; i < a.U1; ++i) {
        Json row = Json::array();
        for (int j = 0; j < a.U2; ++j) row.push_back(a.at(i, j));
        rows.push_back(std::move(row));
    }
    return Json{{"U1", a.U1}, {"U2", a.U2}, {"W", a.W}, {"rows", std::move(rows)}};
}

inline Json channel_to_json(const ChannelFunction& g) {
    Json rows = Json::array();
    for (int i = 0; i < g.X1; ++i) {
        Json row = Json::array();
        for (int j = 0; j < g.X2; ++j) row.push_back(g.at(i, j));
        rows.push_back(std::move(row));
    }
    return Json{{"X1", g.X1}, {"X2", g.X2}, {"Y", g.Y}, {"uses", g.uses}, {"rows", std::move(rows)}};
}

inline Json code_to_json(const Code& c) {
    return Json{{"f1", c.f1}, {"f2", c.f2}, {"decoder", c.decoder}};
}

namespace detail {

template <typename T>
inline T get_field(const Json& j, const char* key, const char* what) {
    if (!j.contains(key))
        throw SchemaError(std::string(what) + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw SchemaError(std::string(what) + ": field '" + key + "' has the wrong type");
    }
}

template <typename Int>
inline std::vector<Int> flatten_rows(const Json& j, int n_rows, int n_cols, const char* what) {
    const auto rows = get_field<std::vector<std::vector<Int>>>(j, "rows", what);
    if (int(rows.size()) != n_rows) throw SchemaError(std::string(what) + ": row count mismatch");
    std::vector<Int> flat;
    flat.reserve(std::size_t(n_rows) * std::size_t(n_cols));
    for (const auto& row : rows) {
        if (int(row.size()) != n_cols) throw SchemaError(std::string(what) + ": column count mismatch");
        flat.insert(flat.end(), row.begin(), row.end());
    }
    return flat;
}

}  // namespace detail

inline TargetFunction target_from_json(const Json& j) {
    const int u1 = detail::get_field<int>(j, "U1", "target");
    const int u2 = detail::get_field<int>(j, "U2", "target");
    const int w = detail::get_field<int>(j, "W", "target");
    if (u1 < 1 || u2 < 1 || w < 1) throw SchemaError("target: dimensions must be positive");
    try {
        return TargetFunction(u1, u2, w, detail::flatten_rows<int>(j, u1, u2, "target"));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("target: ") + e.what());
    }
}

inline ChannelFunction channel_from_json(const Json& j) {
    const int x1 = detail::get_field<int>(j, "X1", "channel");
    const int x2 = detail::get_field<int>(j, "X2", "channel");
    const Symbol y = detail::get_field<Symbol>(j, "Y", "channel");
    const int uses = j.contains("uses") ? detail::get_field<int>(j, "uses", "channel") : 1;
    if (x1 < 1 || x2 < 1 || y < 1) throw SchemaError("channel: dimensions must be positive");
    try {
        return ChannelFunction(x1, x2, y, uses, detail::flatten_rows<Symbol>(j, x1, x2, "channel"));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("channel: ") + e.what());
    }
}

inline Code code_from_json(const Json& j) {
    Code c;
    c.f1 = detail::get_field<std::vector<int>>(j, "f1", "code");
    c.f2 = detail::get_field<std::vector<int>>(j, "f2", "code");
    c.decoder = detail::get_field<std::vector<int>>(j, "decoder", "code");
    return c;
}

struct Instance {
    std::optional<TargetFunction> target;
    std::optional<ChannelFunction> channel;
    std::optional<Code> code;
};

inline Json instance_to_json(const Instance& inst) {
    Json j = Json::object();
    if (inst.target) j["target"] = target_to_json(*inst.target);
    if (inst.channel) j["channel"] = channel_to_json(*inst.channel);
    if (inst.code) j["code"] = code_to_json(*inst.code);
    return j;
}

inline Instance instance_from_json(const Json& j) {
    if (!j.is_object()) throw SchemaError("instance: top level must be an object");
    Instance inst;
    if (j.contains("target")) inst.target = target_from_json(j.at("target"));
    if (j.contains("channel")) inst.channel = channel_from_json(j.at("channel"));
    if (j.contains("code")) inst.code = code_from_json(j.at("code"));
    return inst;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FileError("cannot open for reading: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw FileError("read failure: " + path);
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open for writing: " + path);
    out << content;
    out.flush();
    if (!out) throw FileError("write failure: " + path);
}

inline Json parse_json_text(const std::string& text, const std::string& what) {
    Json j = Json::parse(text, nullptr, false);
    if (j.is_discarded()) throw SchemaError(what + ": malformed JSON");
    return j;
}

inline Instance load_instance(const std::string& path) {
    return instance_from_json(parse_json_text(read_text_file(path), path));
}

inline void save_instance(const Instance& inst, const std::string& path) {
    write_text_file(path, instance_to_json(inst).dump(2) + "\n");
}

inline Json verdict_to_json(const FeasibilityVerdict& v) {
    Json j;
    switch (v.status) {
        case Feasibility::feasible: j["feasible"] = true; break;
        case Feasibility::infeasible: j["feasible"] = false; break;
        case Feasibility::unknown: j["feasible"] = "unknown"; break;
    }
    j["code"] = v.code ? code_to_json(*v.code) : Json(nullptr);
    j["nodes"] = v.nodes;
    j["mode"] = v.mode == SearchMode::pruned ? "pruned" : "naive";
    return j;
}

inline Json report_to_json(const ExperimentReport& r) {
    Json params = Json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    Json j{{"name", r.name},
           {"parameters", std::move(params)},
           {"trials", r.trials},
           {"successes", r.successes},
           {"failures", r.failures},
           {"unknowns", r.unknowns},
           {"estimate", rational_to_string(r.estimate)},
           {"estimate_value", to_double(r.estimate)},
           {"wilson_ci_95", Json::array({r.ci_lo, r.ci_hi})},
           {"seed", r.seed}};
    j["paper_bound"] = r.paper_bound ? Json(*r.paper_bound) : Json(nullptr);
    return j;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out += "\"\"";
        else out += ch;
    }
    out += "\"";
    return out;
}

inline std::string report_csv_header() {
    return "name,seed,trials,successes,failures,unknowns,estimate,estimate_value,ci_lo,ci_hi,"
           "paper_bound,parameters";
}

inline std::string report_to_csv_row(const ExperimentReport& r) {
    Json params = Json::object();
    for (const auto& [k, v] : r.parameters) params[k] = v;
    std::string row = csv_escape(r.name);
    row += "," + std::to_string(r.seed);
    row += "," + std::to_string(r.trials);
    row += "," + std::to_string(r.successes);
    row += "," + std::to_string(r.failures);
    row += "," + std::to_string(r.unknowns);
    row += "," + csv_escape(rational_to_string(r.estimate));
    row += "," + format_double(to_double(r.estimate));
    row += "," + format_double(r.ci_lo);
    row += "," + format_double(r.ci_hi);
    row += "," + (r.paper_bound ? format_double(*r.paper_bound) : std::string(""));
    row += "," + csv_escape(params.dump());
    return row;
}

// Rebuilds a CSV row from a report that was serialized with report_to_json.
inline std::string report_row_from_json(const Json& j) {
    std::string row = csv_escape(detail::get_field<std::string>(j, "name", "report"));
    row += "," + std::to_string(detail::get_field<std::uint64_t>(j, "seed", "report"));
    row += "," + std::to_string(detail::get_field<std::uint64_t>(j, "trials", "report"));
    row += "," + std::to_string(detail::get_field<std::uint64_t>(j, "successes", "report"));
    row += "," + std::to_string(detail::get_field<std::uint64_t>(j, "failures", "report"));
    row += "," + std::to_string(detail::get_field<std::uint64_t>(j, "unknowns", "report"));
    row += "," + csv_escape(detail::get_field<std::string>(j, "estimate", "report"));
    row += "," + format_double(detail::get_field<double>(j, "estimate_value", "report"));
    if (!j.contains("wilson_ci_95") || !j["wilson_ci_95"].is_array() ||
        j["wilson_ci_95"].size() != 2)
        throw SchemaError("report is missing wilson_ci_95");
    row += "," + format_double(j["wilson_ci_95"][0].get<double>());
    row += "," + format_double(j["wilson_ci_95"][1].get<double>());
    if (!j.contains("paper_bound")) throw SchemaError("report is missing paper_bound");
    row += "," + (j["paper_bound"].is_null() ? std::string("")
                                             : format_double(j["paper_bound"].get<double>()));
    if (!j.contains("parameters") || !j["parameters"].is_object())
        throw SchemaError("report is missing parameters");
    row += "," + csv_escape(j["parameters"].dump());
    return row;
}

}  // namespace mismatchlab
