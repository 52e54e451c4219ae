// Command line front end.
//
// Exit codes: 0 success, 1 domain error (bad arguments, invalid instance),
// 2 budget exhausted or construction came back empty handed, 3 I/O failure.
// Errors are reported as one JSON object on stderr.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mismatchlab/core.hpp"
#include "mismatchlab/feasibility.hpp"
#include "mismatchlab/graphcodes.hpp"
#include "mismatchlab/io.hpp"
#include "mismatchlab/montecarlo.hpp"
#include "mismatchlab/rates.hpp"
#include "mismatchlab/typicality.hpp"
#include "mismatchlab/version.hpp"

namespace ml = mismatchlab;
namespace fs = std::filesystem;

namespace {

struct ExitWith {
    int code;
    std::string type;
    std::string message;
};

[[noreturn]] void fail(int code, const std::string& type, const std::string& message) {
    throw ExitWith{code, type, message};
}

// --- spec grammar -----------------------------------------------------------
//
// targets:   [builtin:]identity:U | [builtin:]equality:U | [builtin:]greater_than:U
//            random:U=..,W=..:seed=.. | file:PATH
// channels:  [builtin:]adder | [builtin:]or | random:X=..,Y=..:seed=.. | file:PATH

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (true) {
        size_t pos = s.find(sep, start);
        if (pos == std::string::npos) {
            parts.push_back(s.substr(start));
            break;
        }
        parts.push_back(s.substr(start, pos - start));
        start = pos + 1;
    }
    return parts;
}

int64_t parse_int(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        long long v = std::stoll(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        fail(1, "bad_argument", "cannot parse integer '" + text + "' in " + what);
    }
}

uint64_t parse_u64(const std::string& text, const std::string& what) {
    try {
        size_t used = 0;
        unsigned long long v = std::stoull(text, &used);
        if (used != text.size()) throw std::invalid_argument(text);
        return v;
    } catch (const std::exception&) {
        fail(1, "bad_argument", "cannot parse integer '" + text + "' in " + what);
    }
}

// key=value pairs separated by commas.
std::map<std::string, std::string> parse_kv(const std::string& text, const std::string& what) {
    std::map<std::string, std::string> out;
    for (const std::string& piece : split(text, ',')) {
        size_t eq = piece.find('=');
        if (eq == std::string::npos)
            fail(1, "bad_argument", "expected key=value in " + what + ", got '" + piece + "'");
        out[piece.substr(0, eq)] = piece.substr(eq + 1);
    }
    return out;
}

ml::TargetFunction parse_target_spec(std::string spec) {
    if (spec.rfind("builtin:", 0) == 0) spec = spec.substr(8);
    if (spec.rfind("file:", 0) == 0) {
        ml::Instance inst = ml::load_instance(spec.substr(5));
        if (!inst.target) fail(1, "bad_argument", "file has no target: " + spec.substr(5));
        return *inst.target;
    }
    std::vector<std::string> parts = split(spec, ':');
    const std::string& kind = parts[0];
    if (kind == "identity" || kind == "equality" || kind == "greater_than") {
        if (parts.size() != 2) fail(1, "bad_argument", "expected " + kind + ":U");
        int64_t u = parse_int(parts[1], "target spec");
        ml::TargetKind tk = kind == "identity" ? ml::TargetKind::identity
                          : kind == "equality" ? ml::TargetKind::equality
                                               : ml::TargetKind::greater_than;
        return ml::make_builtin_target(tk, u);
    }
    if (kind == "random") {
        if (parts.size() != 3 || parts[2].rfind("seed=", 0) != 0)
            fail(1, "bad_argument", "expected random:U=..,W=..:seed=..");
        auto kv = parse_kv(parts[1], "target spec");
        if (!kv.count("U") || !kv.count("W"))
            fail(1, "bad_argument", "random target needs U= and W=");
        int64_t u = parse_int(kv["U"], "target spec");
        int64_t w = parse_int(kv["W"], "target spec");
        uint64_t seed = parse_u64(parts[2].substr(5), "target spec");
        return ml::make_builtin_target(ml::TargetKind::random_target, u, w, seed);
    }
    fail(1, "bad_argument", "unknown target spec '" + spec + "'");
}

ml::ChannelFunction parse_channel_spec(std::string spec) {
    if (spec.rfind("builtin:", 0) == 0) spec = spec.substr(8);
    if (spec.rfind("file:", 0) == 0) {
        ml::Instance inst = ml::load_instance(spec.substr(5));
        if (!inst.channel) fail(1, "bad_argument", "file has no channel: " + spec.substr(5));
        return *inst.channel;
    }
    if (spec == "adder" || spec == "binary_adder")
        return ml::make_builtin_channel(ml::ChannelKind::binary_adder);
    if (spec == "or" || spec == "boolean_or")
        return ml::make_builtin_channel(ml::ChannelKind::boolean_or);
    std::vector<std::string> parts = split(spec, ':');
    if (parts[0] == "random") {
        if (parts.size() != 3 || parts[2].rfind("seed=", 0) != 0)
            fail(1, "bad_argument", "expected random:X=..,Y=..:seed=..");
        auto kv = parse_kv(parts[1], "channel spec");
        if (!kv.count("X") || !kv.count("Y"))
            fail(1, "bad_argument", "random channel needs X= and Y=");
        int64_t x = parse_int(kv["X"], "channel spec");
        int64_t y = parse_int(kv["Y"], "channel spec");
        uint64_t seed = parse_u64(parts[2].substr(5), "channel spec");
        return ml::make_builtin_channel(ml::ChannelKind::random_channel, x, y, seed);
    }
    fail(1, "bad_argument", "unknown channel spec '" + spec + "'");
}

ml::ChannelFunction apply_uses(ml::ChannelFunction g, int uses) {
    if (uses < 1) fail(1, "bad_argument", "--uses must be >= 1");
    if (uses == 1) return g;
    if (g.uses != 1) fail(1, "bad_argument", "channel is already a tensor power, cannot apply --uses");
    return ml::tensor_power(g, uses);
}

// --- output helpers ---------------------------------------------------------

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(3, "io_error", "cannot create directory " + dir.string());
}

void write_or_die(const fs::path& path, const std::string& text) {
    try {
        ml::write_text_file(path.string(), text);
    } catch (const ml::FileError& e) {
        fail(3, "io_error", e.what());
    }
}

void emit(const ml::Json& j, const std::string& out_path) {
    std::string text = j.dump(2) + "\n";
    if (out_path.empty())
        std::cout << text;
    else
        write_or_die(out_path, text);
}

struct Manifest {
    std::vector<std::string> argv;
    std::optional<uint64_t> seed;
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    void write(const fs::path& path) const {
        ml::Json j;
        j["argv"] = argv;
        if (seed)
            j["seed"] = *seed;
        else
            j["seed"] = nullptr;
        j["version"] = ml::kVersion;
        auto elapsed = std::chrono::steady_clock::now() - start;
        j["wall_ms"] = std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        write_or_die(path, j.dump(2) + "\n");
    }
};

// --- subcommand state -------------------------------------------------------

struct Options {
    std::string target_spec;
    std::string channel_spec;
    std::string code_path;
    std::string out_path;
    std::string in_path;
    std::string mode = "pruned";
    std::string scheme;
    std::string matching = "greedy";
    std::string name;
    std::string delta = "0";
    std::string c_value = "1/3";
    std::string y_list;
    int uses = 1;
    uint64_t budget = ml::kDefaultSearchBudget;
    uint64_t trials = 1000;
    uint64_t seed = 1;
    int64_t X = 0;
    int64_t N = 0;
    int64_t U = 0;
    int64_t W = 0;
    uint64_t threshold = 0;
    double delta_d = 0.1;
    double mu = 1.0;
    double gamma = 1.0;
    std::string kind = "upper_mult";
};

ml::SearchMode parse_mode(const std::string& mode) {
    if (mode == "pruned") return ml::SearchMode::pruned;
    if (mode == "naive") return ml::SearchMode::naive;
    fail(1, "bad_argument", "unknown search mode '" + mode + "'");
}

int run_gen(const Options& opt, Manifest& manifest) {
    if (opt.target_spec.empty() && opt.channel_spec.empty())
        fail(1, "bad_argument", "gen needs --target and/or --channel");
    if (opt.out_path.empty()) fail(1, "bad_argument", "gen needs --out");
    ml::Instance inst;
    if (!opt.target_spec.empty()) inst.target = parse_target_spec(opt.target_spec);
    if (!opt.channel_spec.empty())
        inst.channel = apply_uses(parse_channel_spec(opt.channel_spec), opt.uses);
    try {
        ml::save_instance(inst, opt.out_path);
    } catch (const ml::FileError& e) {
        fail(3, "io_error", e.what());
    }
    manifest.write(opt.out_path + ".manifest.json");
    std::cout << ml::instance_to_json(inst).dump(2) << "\n";
    return 0;
}

int run_check(const Options& opt, Manifest& manifest) {
    if (opt.target_spec.empty() || opt.channel_spec.empty())
        fail(1, "bad_argument", "check needs --target and --channel");
    ml::TargetFunction a = parse_target_spec(opt.target_spec);
    ml::ChannelFunction g = apply_uses(parse_channel_spec(opt.channel_spec), opt.uses);
    if (!opt.code_path.empty()) {
        ml::Instance inst = ml::load_instance(opt.code_path);
        if (!inst.code) fail(1, "bad_argument", "file has no code: " + opt.code_path);
        ml::Rational delta = ml::parse_rational(opt.delta);
        ml::Rational err = ml::error_probability(a, g, *inst.code);
        ml::Json j;
        j["delta"] = ml::rational_to_string(delta);
        j["error_probability"] = ml::rational_to_string(err);
        j["within_delta"] = ml::check_code(a, g, *inst.code, delta);
        emit(j, opt.out_path);
        if (!opt.out_path.empty()) manifest.write(opt.out_path + ".manifest.json");
        return 0;
    }
    // Duplicate rows and columns never change feasibility, so the search
    // runs on the normalized target and the witness is lifted back.
    const ml::NormalizeMaps nm = ml::normalize_with_maps(a);
    ml::FeasibilityVerdict v =
        ml::zero_feasible_search(nm.target, g, parse_mode(opt.mode), opt.budget);
    if (v.code) {
        ml::Code lifted;
        lifted.f1.resize(size_t(a.U1));
        lifted.f2.resize(size_t(a.U2));
        for (int u1 = 0; u1 < a.U1; ++u1) lifted.f1[size_t(u1)] = v.code->f1[size_t(nm.row_of[u1])];
        for (int u2 = 0; u2 < a.U2; ++u2) lifted.f2[size_t(u2)] = v.code->f2[size_t(nm.col_of[u2])];
        std::vector<int> unmap(size_t(nm.target.W), 0);
        for (int w = 0; w < a.W; ++w)
            if (nm.value_map[size_t(w)] >= 0) unmap[size_t(nm.value_map[size_t(w)])] = w;
        lifted.decoder.reserve(v.code->decoder.size());
        for (int w : v.code->decoder) lifted.decoder.push_back(unmap[size_t(w)]);
        if (ml::error_probability(a, g, lifted) != 0)
            fail(1, "internal_error", "lifted feasibility witness is not zero error");
        v.code = std::move(lifted);
    }
    emit(ml::verdict_to_json(v), opt.out_path);
    if (!opt.out_path.empty()) manifest.write(opt.out_path + ".manifest.json");
    return v.status == ml::Feasibility::unknown ? 2 : 0;
}

int run_construct(const Options& opt, Manifest& manifest) {
    if (opt.channel_spec.empty()) fail(1, "bad_argument", "construct needs --channel");
    if (opt.scheme.empty()) fail(1, "bad_argument", "construct needs --scheme");
    ml::ChannelFunction g = apply_uses(parse_channel_spec(opt.channel_spec), opt.uses);
    if (opt.target_spec.empty()) fail(1, "bad_argument", "construct needs --target");
    ml::TargetFunction a = parse_target_spec(opt.target_spec);

    ml::CodeResult result;
    if (opt.scheme == "identity" || opt.scheme == "separation") {
        if (a.U1 != a.U2) fail(1, "bad_argument", "scheme needs a square target");
        ml::SubgraphMode mode =
            opt.mode == "greedy" ? ml::SubgraphMode::greedy : ml::SubgraphMode::exact;
        result = ml::build_identity_code(g, a.U1, mode, opt.budget);
        if (result.outcome == ml::SearchOutcome::found && opt.scheme == "separation") {
            // Identity recovers the pair (u1, u2); composing with the target
            // turns the decoder into one for a(u1, u2).
            ml::Code& code = *result.code;
            for (int& d : code.decoder) {
                int u1 = d / a.U1;
                int u2 = d % a.U1;
                d = a.at(u1, u2);
            }
        }
    } else if (opt.scheme == "equality") {
        if (a.U1 != a.U2) fail(1, "bad_argument", "scheme needs a square target");
        ml::MatchingMode mm =
            opt.matching == "exact" ? ml::MatchingMode::exact : ml::MatchingMode::greedy;
        result = ml::build_equality_code(g, a.U1, opt.seed, mm, opt.budget);
    } else {
        fail(1, "bad_argument", "unknown scheme '" + opt.scheme + "'");
    }

    ml::Json j;
    j["scheme"] = opt.scheme;
    j["nodes"] = result.nodes;
    switch (result.outcome) {
        case ml::SearchOutcome::found:
            j["outcome"] = "found";
            j["code"] = ml::code_to_json(*result.code);
            break;
        case ml::SearchOutcome::absent:
            j["outcome"] = "absent";
            j["code"] = nullptr;
            break;
        case ml::SearchOutcome::unknown:
            j["outcome"] = "unknown";
            j["code"] = nullptr;
            break;
    }
    emit(j, opt.out_path);
    if (!opt.out_path.empty()) manifest.write(opt.out_path + ".manifest.json");
    return result.outcome == ml::SearchOutcome::found ? 0 : 2;
}

int run_rates(const Options& opt, Manifest& manifest) {
    if (opt.channel_spec.empty()) fail(1, "bad_argument", "rates needs --channel");
    if (opt.U < 1) fail(1, "bad_argument", "rates needs --U >= 1");
    ml::ChannelFunction g = parse_channel_spec(opt.channel_spec);
    if (g.uses != 1) fail(1, "bad_argument", "rates expects a single-use channel");
    int64_t w = opt.W;
    if (w == 0) {
        w = 2;
        while ((int64_t(1) << w) < opt.U && w < 62) ++w;
        // default W: enough message values to index log2(U) bits.
    }
    ml::MinUsesResult mu = ml::min_uses_identity(g, uint64_t(opt.U));
    double hstar = ml::max_output_entropy(g);
    double cutset = ml::cutset_lower_bound(g, w);

    ml::Json witness;
    witness["Q"] = mu.witness.Q;
    witness["q_weights"] = mu.witness.q_weights;
    witness["p1"] = mu.witness.p1;
    witness["p2"] = mu.witness.p2;

    std::string csv = "channel,U,W,n_min,n_raw,objective,h_star,cutset_bound,witness\n";
    csv += ml::csv_escape(opt.channel_spec) + "," + std::to_string(opt.U) + "," +
           std::to_string(w) + "," + std::to_string(mu.n) + "," +
           ml::format_double(mu.n_raw) + "," + ml::format_double(mu.objective) + "," +
           ml::format_double(hstar) + "," + ml::format_double(cutset) + "," +
           ml::csv_escape(witness.dump()) + "\n";
    if (opt.out_path.empty())
        std::cout << csv;
    else {
        write_or_die(opt.out_path, csv);
        manifest.write(opt.out_path + ".manifest.json");
    }
    return 0;
}

std::vector<ml::Symbol> parse_y_list(const Options& opt) {
    if (opt.y_list.empty()) fail(1, "bad_argument", "experiment needs --Y");
    std::vector<ml::Symbol> ys;
    for (const std::string& piece : split(opt.y_list, ','))
        ys.push_back(parse_int(piece, "--Y"));
    return ys;
}

int run_experiment(const Options& opt, Manifest& manifest) {
    if (opt.name.empty()) fail(1, "bad_argument", "experiment needs --name");
    if (opt.out_path.empty()) fail(1, "bad_argument", "experiment needs --out");
    fs::path dir(opt.out_path);
    ensure_dir(dir);

    std::vector<std::pair<std::string, ml::Json>> outputs;
    std::vector<ml::ExperimentReport> reports;

    if (opt.name == "feasibility_fraction") {
        if (opt.target_spec.empty()) fail(1, "bad_argument", "feasibility_fraction needs --target");
        if (opt.X < 1) fail(1, "bad_argument", "feasibility_fraction needs --X");
        ml::TargetFunction a = parse_target_spec(opt.target_spec);
        std::vector<ml::Symbol> ys = parse_y_list(opt);
        ml::FeasibilityChecker checker = ml::FeasibilityChecker::exact;
        if (opt.scheme == "identity") checker = ml::FeasibilityChecker::identity_construction;
        if (opt.scheme == "equality") checker = ml::FeasibilityChecker::equality_construction;
        // feasibility is invariant under target normalization
        if (checker == ml::FeasibilityChecker::exact) a = ml::normalize(a);
        if (ys.size() == 1) {
            reports.push_back(ml::feasibility_fraction(a, opt.target_spec, opt.X, ys[0], opt.uses,
                                                       checker, opt.trials, opt.seed, opt.budget));
            outputs.emplace_back(opt.name, ml::report_to_json(reports.back()));
        } else {
            reports = ml::feasibility_fraction_paired(a, opt.target_spec, opt.X, ys, opt.uses,
                                                      checker, opt.trials, opt.seed, opt.budget);
            for (size_t i = 0; i < reports.size(); ++i)
                outputs.emplace_back(opt.name + "_Y" + std::to_string(ys[i]),
                                     ml::report_to_json(reports[i]));
        }
    } else if (opt.name == "distinct_entries") {
        if (opt.X < 1) fail(1, "bad_argument", "distinct_entries needs --X");
        std::vector<ml::Symbol> ys = parse_y_list(opt);
        if (ys.size() != 1) fail(1, "bad_argument", "distinct_entries takes one --Y");
        reports.push_back(ml::distinct_entries_experiment(opt.X, ys[0], opt.trials, opt.seed));
        outputs.emplace_back(opt.name, ml::report_to_json(reports.back()));
    } else if (opt.name == "coupon_collector") {
        std::vector<ml::Symbol> ys = parse_y_list(opt);
        if (ys.size() != 1) fail(1, "bad_argument", "coupon_collector takes one --Y");
        if (opt.N < 1) fail(1, "bad_argument", "coupon_collector needs --N >= 1");
        reports.push_back(
            ml::coupon_collector_sim(ys[0], opt.N, opt.threshold, opt.trials, opt.seed));
        outputs.emplace_back(opt.name, ml::report_to_json(reports.back()));
    } else if (opt.name == "balanced_fraction") {
        if (opt.U < 1 || opt.W < 2) fail(1, "bad_argument", "balanced_fraction needs --U and --W");
        ml::Rational c = ml::parse_rational(opt.c_value);
        reports.push_back(
            ml::balanced_fraction_experiment(opt.U, opt.W, c, opt.trials, opt.seed));
        outputs.emplace_back(opt.name, ml::report_to_json(reports.back()));
    } else if (opt.name == "approximation_bound") {
        if (opt.U < 1 || opt.W < 2)
            fail(1, "bad_argument", "approximation_bound needs --U and --W");
        ml::ApproximationBound b = ml::approximation_bound(opt.U, opt.W, opt.delta_d);
        ml::Json j;
        j["name"] = opt.name;
        j["U"] = opt.U;
        j["W"] = opt.W;
        j["delta"] = opt.delta_d;
        j["alpha"] = b.alpha;
        j["bound"] = b.bound;
        j["vacuous"] = b.vacuous;
        outputs.emplace_back(opt.name, j);
    } else if (opt.name == "chernoff") {
        ml::ChernoffKind kind = opt.kind == "lower_mult" ? ml::ChernoffKind::lower_mult
                                                         : ml::ChernoffKind::upper_mult;
        double b = ml::chernoff_bound(kind, opt.mu, opt.gamma);
        ml::Json j;
        j["name"] = opt.name;
        j["kind"] = opt.kind;
        j["mu"] = opt.mu;
        j["gamma"] = opt.gamma;
        j["bound"] = b;
        outputs.emplace_back(opt.name, j);
    } else {
        fail(1, "bad_argument", "unknown experiment '" + opt.name + "'");
    }

    std::vector<std::string> files;
    for (const auto& [stem, j] : outputs) {
        write_or_die(dir / (stem + ".json"), j.dump(2) + "\n");
        files.push_back(stem + ".json");
    }
    if (!reports.empty()) {
        std::string csv = ml::report_csv_header() + "\n";
        for (const ml::ExperimentReport& r : reports) csv += ml::report_to_csv_row(r) + "\n";
        write_or_die(dir / (opt.name + ".csv"), csv);
        files.push_back(opt.name + ".csv");
    }
    ml::Json index;
    index["files"] = files;
    write_or_die(dir / "index.json", index.dump(2) + "\n");
    manifest.write(dir / "manifest.json");

    for (const auto& [stem, j] : outputs) std::cout << j.dump(2) << "\n";
    return 0;
}

int run_report(const Options& opt, Manifest&) {
    if (opt.in_path.empty() || opt.out_path.empty())
        fail(1, "bad_argument", "report needs --in and --out");
    fs::path dir(opt.in_path);
    std::error_code ec;
    if (!fs::is_directory(dir, ec) || ec) fail(3, "io_error", "not a directory: " + opt.in_path);

    std::vector<fs::path> paths;
    for (const auto& entry : fs::directory_iterator(dir, ec)) {
        if (entry.path().extension() == ".json") paths.push_back(entry.path());
    }
    if (ec) fail(3, "io_error", "cannot scan directory: " + opt.in_path);
    std::sort(paths.begin(), paths.end());

    std::string csv = ml::report_csv_header() + "\n";
    size_t rows = 0;
    for (const fs::path& p : paths) {
        ml::Json j = ml::parse_json_text(ml::read_text_file(p.string()), p.string());
        if (!j.is_object() || !j.contains("trials") || !j.contains("name")) continue;
        csv += ml::report_row_from_json(j) + "\n";
        ++rows;
    }
    if (rows == 0) fail(1, "bad_argument", "no experiment reports found in " + opt.in_path);
    write_or_die(opt.out_path, csv);
    std::cout << "rows=" << rows << "\n";
    return 0;
}

int dispatch(int argc, char** argv) {
    CLI::App app{"exact and sampled analysis of two-sender channel computation"};
    app.require_subcommand(1);
    Options opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--target", opt.target_spec, "target spec");
        sub->add_option("--channel", opt.channel_spec, "channel spec");
        sub->add_option("--uses", opt.uses, "tensor power of the channel");
        sub->add_option("--budget", opt.budget, "search node budget");
        sub->add_option("--seed", opt.seed, "RNG seed");
        sub->add_option("--out", opt.out_path, "output path");
    };

    CLI::App* gen = app.add_subcommand("gen", "materialize instances to JSON");
    add_common(gen);

    CLI::App* check = app.add_subcommand("check", "decide zero-error feasibility");
    add_common(check);
    check->add_option("--mode", opt.mode, "pruned|naive");
    check->add_option("--code", opt.code_path, "verify this code instead of searching");
    check->add_option("--delta", opt.delta, "allowed error probability (rational)");

    CLI::App* construct = app.add_subcommand("construct", "build a code from graph structure");
    add_common(construct);
    construct->add_option("--scheme", opt.scheme, "identity|equality|separation");
    construct->add_option("--mode", opt.mode, "exact|greedy biclique search");
    construct->add_option("--matching", opt.matching, "greedy|exact induced matching");

    CLI::App* rates = app.add_subcommand("rates", "rate quantities for a channel");
    add_common(rates);
    rates->add_option("--U", opt.U, "identity message count");
    rates->add_option("--W", opt.W, "target range size for the cut-set bound");

    CLI::App* experiment = app.add_subcommand("experiment", "run a sampled or exhaustive experiment");
    add_common(experiment);
    experiment->add_option("--name", opt.name, "experiment name");
    experiment->add_option("--trials", opt.trials, "trial count");
    experiment->add_option("--X", opt.X, "input alphabet size");
    experiment->add_option("--Y", opt.y_list, "output alphabet size(s), comma separated");
    experiment->add_option("--N", opt.N, "distinct values needed");
    experiment->add_option("--threshold", opt.threshold, "coupon collector round threshold");
    experiment->add_option("--U", opt.U, "target domain size");
    experiment->add_option("--W", opt.W, "target range size");
    experiment->add_option("--c", opt.c_value, "balance constant (rational)");
    experiment->add_option("--delta", opt.delta_d, "approximation slack");
    experiment->add_option("--mu", opt.mu, "mean for chernoff");
    experiment->add_option("--gamma", opt.gamma, "deviation for chernoff");
    experiment->add_option("--kind", opt.kind, "upper_mult|lower_mult");
    experiment->add_option("--scheme", opt.scheme, "feasibility checker: exact|identity|equality");

    CLI::App* report = app.add_subcommand("report", "merge experiment JSON into one CSV");
    report->add_option("--in", opt.in_path, "directory of experiment outputs");
    report->add_option("--out", opt.out_path, "CSV path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }

    Manifest manifest;
    for (int i = 0; i < argc; ++i) manifest.argv.push_back(argv[i]);
    manifest.seed = opt.seed;

    if (gen->parsed()) return run_gen(opt, manifest);
    if (check->parsed()) return run_check(opt, manifest);
    if (construct->parsed()) return run_construct(opt, manifest);
    if (rates->parsed()) return run_rates(opt, manifest);
    if (experiment->parsed()) return run_experiment(opt, manifest);
    if (report->parsed()) return run_report(opt, manifest);
    return 1;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return dispatch(argc, argv);
    } catch (const ExitWith& e) {
        ml::Json err;
        err["error"] = {{"type", e.type}, {"message", e.message}};
        std::cerr << err.dump() << "\n";
        return e.code;
    } catch (const ml::FileError& e) {
        ml::Json err;
        err["error"] = {{"type", "io_error"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 3;
    } catch (const ml::SchemaError& e) {
        ml::Json err;
        err["error"] = {{"type", "schema_error"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const ml::BudgetExhausted& e) {
        ml::Json err;
        err["error"] = {{"type", "budget_exhausted"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        ml::Json err;
        err["error"] = {{"type", "invalid_argument"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::domain_error& e) {
        ml::Json err;
        err["error"] = {{"type", "domain_error"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::overflow_error& e) {
        ml::Json err;
        err["error"] = {{"type", "overflow"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    } catch (const std::exception& e) {
        ml::Json err;
        err["error"] = {{"type", "internal"}, {"message", e.what()}};
        std::cerr << err.dump() << "\n";
        return 1;
    }
}
