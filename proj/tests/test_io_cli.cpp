#include <catch2/catch_amalgamated.hpp>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "mismatchlab/core.hpp"
#include "mismatchlab/feasibility.hpp"
#include "mismatchlab/io.hpp"
#include "mismatchlab/montecarlo.hpp"
#include "mismatchlab/rng.hpp"

namespace ml = mismatchlab;
namespace fs = std::filesystem;
using Catch::Matchers::WithinAbs;

namespace {

fs::path scratch_dir(const std::string& name) {
    fs::path dir = fs::temp_directory_path() / ("mismatchlab_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::string& args, const fs::path& dir) {
    static int counter = 0;
    const fs::path out_path = dir / ("stdout_" + std::to_string(counter) + ".txt");
    const fs::path err_path = dir / ("stderr_" + std::to_string(counter) + ".txt");
    ++counter;
    const std::string cmd = std::string("\"") + MISMATCHLAB_CLI_PATH + "\" " + args + " > " +
                            out_path.string() + " 2> " + err_path.string();
    const int status = std::system(cmd.c_str());
    CliResult r;
    if (WIFEXITED(status)) r.exit_code = WEXITSTATUS(status);
    r.out = ml::read_text_file(out_path.string());
    r.err = ml::read_text_file(err_path.string());
    return r;
}

ml::ChannelFunction distinct_channel_3x3() {
    return ml::ChannelFunction(3, 3, 9, 1, {0, 1, 2, 3, 4, 5, 6, 7, 8});
}

std::vector<std::string> split_lines(const std::string& text) {
    std::vector<std::string> lines;
    size_t start = 0;
    while (start < text.size()) {
        size_t pos = text.find('\n', start);
        if (pos == std::string::npos) pos = text.size();
        lines.push_back(text.substr(start, pos - start));
        start = pos + 1;
    }
    return lines;
}

}  // namespace

TEST_CASE("instance json round trips") {
    ml::Engine eng = ml::make_engine(515);
    for (int iter = 0; iter < 100; ++iter) {
        const int u1 = 1 + int(ml::uniform_below(eng, 4));
        const int w = 1 + int(ml::uniform_below(eng, std::uint64_t(u1) * u1));
        const auto a = ml::make_builtin_target(ml::TargetKind::random_target, u1, w,
                                               ml::derive_seed(515, std::uint64_t(iter)));
        const ml::Json aj = ml::parse_json_text(ml::target_to_json(a).dump(), "t");
        CHECK(ml::target_from_json(aj) == a);

        const int x = 2 + int(ml::uniform_below(eng, 3));
        const ml::Symbol y = 2 + ml::Symbol(ml::uniform_below(eng, 5));
        auto g = ml::make_builtin_channel(ml::ChannelKind::random_channel, x, y,
                                          ml::derive_seed(516, std::uint64_t(iter)));
        if (iter % 3 == 0) g = ml::tensor_power(g, 2);
        const ml::Json gj = ml::parse_json_text(ml::channel_to_json(g).dump(), "g");
        CHECK(ml::channel_from_json(gj) == g);

        ml::Code code;
        for (int i = 0; i < u1; ++i) code.f1.push_back(int(ml::uniform_below(eng, 4)));
        for (int i = 0; i < 3; ++i) code.f2.push_back(int(ml::uniform_below(eng, 4)));
        for (int i = 0; i < 5; ++i) code.decoder.push_back(int(ml::uniform_below(eng, 4)));
        const ml::Json cj = ml::parse_json_text(ml::code_to_json(code).dump(), "c");
        CHECK(ml::code_from_json(cj) == code);
    }
}

TEST_CASE("instance files hold any subset of the three pieces") {
    const fs::path dir = scratch_dir("instance_subset");
    ml::Instance inst;
    inst.target = ml::make_builtin_target(ml::TargetKind::greater_than, 3);
    inst.code = ml::Code{{0, 1}, {1, 0}, {0, 1, 1, 0}};
    const std::string path = (dir / "inst.json").string();
    ml::save_instance(inst, path);
    const ml::Instance back = ml::load_instance(path);
    REQUIRE(back.target.has_value());
    CHECK(*back.target == *inst.target);
    CHECK(!back.channel.has_value());
    REQUIRE(back.code.has_value());
    CHECK(*back.code == *inst.code);
}

TEST_CASE("schema errors are loud") {
    const ml::Json bad_entry = ml::parse_json_text(
        R"({"X1":2,"X2":2,"Y":2,"rows":[[0,1],[1,5]]})", "t");
    CHECK_THROWS_AS(ml::channel_from_json(bad_entry), ml::SchemaError);

    const ml::Json missing = ml::parse_json_text(R"({"U1":2,"U2":2,"rows":[[0,1],[1,0]]})", "t");
    CHECK_THROWS_AS(ml::target_from_json(missing), ml::SchemaError);

    const ml::Json wrong_type =
        ml::parse_json_text(R"({"U1":2,"U2":2,"W":"two","rows":[[0,1],[1,0]]})", "t");
    CHECK_THROWS_AS(ml::target_from_json(wrong_type), ml::SchemaError);

    const ml::Json short_row =
        ml::parse_json_text(R"({"U1":2,"U2":2,"W":2,"rows":[[0,1],[1]]})", "t");
    CHECK_THROWS_AS(ml::target_from_json(short_row), ml::SchemaError);

    CHECK_THROWS_AS(ml::parse_json_text("{nope", "t"), ml::SchemaError);
    CHECK_THROWS_AS(ml::instance_from_json(ml::Json(3)), ml::SchemaError);
}

TEST_CASE("verdict json carries status, witness and search mode") {
    const auto eq2 = ml::make_builtin_target(ml::TargetKind::equality, 2);
    const auto or2 = ml::tensor_power(ml::make_builtin_channel(ml::ChannelKind::boolean_or), 2);
    const ml::FeasibilityVerdict found = ml::zero_feasible_search(eq2, or2);
    const ml::Json fj = ml::verdict_to_json(found);
    CHECK(fj.at("feasible") == ml::Json(true));
    CHECK(fj.at("code").is_object());
    CHECK(fj.at("mode") == "pruned");
    CHECK(fj.at("nodes").get<std::uint64_t>() >= 1);

    const auto id2 = ml::make_builtin_target(ml::TargetKind::identity, 2);
    const auto adder = ml::make_builtin_channel(ml::ChannelKind::binary_adder);
    const ml::FeasibilityVerdict missing =
        ml::zero_feasible_search(id2, adder, ml::SearchMode::naive);
    const ml::Json mj = ml::verdict_to_json(missing);
    CHECK(mj.at("feasible") == ml::Json(false));
    CHECK(mj.at("code").is_null());
    CHECK(mj.at("mode") == "naive");

    ml::FeasibilityVerdict unknown;
    unknown.status = ml::Feasibility::unknown;
    unknown.mode = ml::SearchMode::pruned;
    CHECK(ml::verdict_to_json(unknown).at("feasible") == ml::Json("unknown"));
}

TEST_CASE("report serialization round trips into identical csv rows") {
    CHECK(ml::report_csv_header() ==
          "name,seed,trials,successes,failures,unknowns,estimate,estimate_value,ci_lo,ci_hi,"
          "paper_bound,parameters");

    const ml::ExperimentReport r = ml::coupon_collector_sim(2, 2, 3, 50, 7);
    const ml::Json j = ml::report_to_json(r);
    CHECK(j.at("name") == "coupon_collector");
    CHECK(j.at("trials").get<std::uint64_t>() == 50);
    CHECK(j.at("wilson_ci_95").is_array());
    CHECK(j.at("paper_bound").is_null());
    CHECK(j.at("parameters").is_object());
    CHECK(ml::report_row_from_json(j) == ml::report_to_csv_row(r));

    const ml::ExperimentReport d = ml::distinct_entries_experiment(4, 1286, 50, 7);
    const ml::Json dj = ml::report_to_json(d);
    CHECK(dj.at("paper_bound").is_number());
    CHECK(ml::report_row_from_json(dj) == ml::report_to_csv_row(d));
}

TEST_CASE("report row rejects malformed reports") {
    const ml::ExperimentReport r = ml::coupon_collector_sim(1, 1, 0, 5, 7);
    ml::Json j = ml::report_to_json(r);
    j.erase("wilson_ci_95");
    CHECK_THROWS_AS(ml::report_row_from_json(j), ml::SchemaError);

    ml::Json k = ml::report_to_json(r);
    k["estimate"] = 0.25;
    CHECK_THROWS_AS(ml::report_row_from_json(k), ml::SchemaError);

    ml::Json m = ml::report_to_json(r);
    m.erase("paper_bound");
    CHECK_THROWS_AS(ml::report_row_from_json(m), ml::SchemaError);
}

TEST_CASE("csv escaping") {
    CHECK(ml::csv_escape("plain") == "plain");
    CHECK(ml::csv_escape("a,b") == "\"a,b\"");
    CHECK(ml::csv_escape("say \"hi\"") == "\"say \"\"hi\"\"\"");
    CHECK(ml::csv_escape("line\nbreak") == "\"line\nbreak\"");
}

TEST_CASE("cli decides feasibility with spec strings") {
    const fs::path dir = scratch_dir("cli_check");

    const CliResult yes = run_cli("check --target equality:2 --channel or --uses 2", dir);
    CHECK(yes.exit_code == 0);
    const ml::Json yj = ml::parse_json_text(yes.out, "stdout");
    CHECK(yj.at("feasible") == ml::Json(true));
    REQUIRE(yj.at("code").is_object());
    const ml::Code code = ml::code_from_json(yj.at("code"));
    const auto eq2 = ml::make_builtin_target(ml::TargetKind::equality, 2);
    const auto or2 = ml::tensor_power(ml::make_builtin_channel(ml::ChannelKind::boolean_or), 2);
    CHECK(ml::error_probability(eq2, or2, code) == 0);

    const CliResult no = run_cli("check --target identity:2 --channel adder", dir);
    CHECK(no.exit_code == 0);
    const ml::Json nj = ml::parse_json_text(no.out, "stdout");
    CHECK(nj.at("feasible") == ml::Json(false));
    CHECK(nj.at("code").is_null());

    const CliResult bad = run_cli("check --target equality:3 --channel or", dir);
    CHECK(bad.exit_code == 1);
    CHECK(bad.err.find("error") != std::string::npos);

    const CliResult unknown =
        run_cli("check --target identity:3 --channel random:X=3,Y=9:seed=1 --budget 1", dir);
    CHECK(unknown.exit_code == 2);
    const ml::Json uj = ml::parse_json_text(unknown.out, "stdout");
    CHECK(uj.at("feasible") == ml::Json("unknown"));
}

TEST_CASE("cli lifts witnesses for targets with duplicate rows") {
    const fs::path dir = scratch_dir("cli_lift");
    ml::Instance inst;
    inst.target = ml::TargetFunction(2, 2, 2, {0, 1, 0, 1});
    const std::string path = (dir / "dup.json").string();
    ml::save_instance(inst, path);

    const CliResult r = run_cli("check --target file:" + path + " --channel or", dir);
    CHECK(r.exit_code == 0);
    const ml::Json j = ml::parse_json_text(r.out, "stdout");
    CHECK(j.at("feasible") == ml::Json(true));
    REQUIRE(j.at("code").is_object());
    const ml::Code code = ml::code_from_json(j.at("code"));
    const auto orc = ml::make_builtin_channel(ml::ChannelKind::boolean_or);
    CHECK(code.f1.size() == 2);
    CHECK(ml::error_probability(*inst.target, orc, code) == 0);
}

TEST_CASE("cli verifies explicit codes against a delta") {
    const fs::path dir = scratch_dir("cli_code");
    ml::Instance inst;
    inst.code = ml::Code{{1, 2}, {1, 2}, {0, 1, 1, 0}};
    const std::string path = (dir / "code.json").string();
    ml::save_instance(inst, path);

    const CliResult r =
        run_cli("check --target equality:2 --channel or --uses 2 --code " + path, dir);
    CHECK(r.exit_code == 0);
    const ml::Json j = ml::parse_json_text(r.out, "stdout");
    CHECK(j.at("error_probability") == "0");
    CHECK(j.at("within_delta") == ml::Json(true));
}

TEST_CASE("cli gen writes instances and manifests that check can consume") {
    const fs::path dir = scratch_dir("cli_gen");
    const std::string inst_path = (dir / "inst.json").string();
    const CliResult gen = run_cli(
        "gen --target greater_than:3 --channel random:X=3,Y=4:seed=7 --uses 2 --out " + inst_path,
        dir);
    CHECK(gen.exit_code == 0);
    REQUIRE(fs::exists(inst_path));
    REQUIRE(fs::exists(inst_path + ".manifest.json"));

    const ml::Instance inst = ml::load_instance(inst_path);
    REQUIRE(inst.target.has_value());
    REQUIRE(inst.channel.has_value());
    CHECK(inst.channel->uses == 2);

    const ml::Json manifest =
        ml::parse_json_text(ml::read_text_file(inst_path + ".manifest.json"), "manifest");
    CHECK(manifest.at("argv").is_array());
    CHECK(manifest.at("argv").size() >= 8);
    CHECK(manifest.at("version").is_string());
    CHECK(manifest.at("wall_ms").get<std::int64_t>() >= 0);

    const CliResult check =
        run_cli("check --target file:" + inst_path + " --channel file:" + inst_path, dir);
    CHECK(check.exit_code == 0);
    const ml::Json j = ml::parse_json_text(check.out, "stdout");
    CHECK(j.at("feasible").is_boolean());

    const CliResult missing = run_cli("check --target file:" + (dir / "absent.json").string() +
                                          " --channel adder",
                                      dir);
    CHECK(missing.exit_code == 3);
}

TEST_CASE("cli constructs codes from graph structure") {
    const fs::path dir = scratch_dir("cli_construct");
    ml::Instance inst;
    inst.channel = distinct_channel_3x3();
    const std::string path = (dir / "chan.json").string();
    ml::save_instance(inst, path);

    const CliResult found =
        run_cli("construct --scheme identity --target identity:2 --channel file:" + path, dir);
    CHECK(found.exit_code == 0);
    const ml::Json fj = ml::parse_json_text(found.out, "stdout");
    CHECK(fj.at("outcome") == "found");
    const auto id2 = ml::make_builtin_target(ml::TargetKind::identity, 2);
    CHECK(ml::error_probability(id2, *inst.channel, ml::code_from_json(fj.at("code"))) == 0);

    const CliResult absent =
        run_cli("construct --scheme identity --target identity:2 --channel adder", dir);
    CHECK(absent.exit_code == 2);
    const ml::Json aj = ml::parse_json_text(absent.out, "stdout");
    CHECK(aj.at("outcome") == "absent");
    CHECK(aj.at("code").is_null());

    const CliResult sep =
        run_cli("construct --scheme separation --target greater_than:2 --channel file:" + path,
                dir);
    CHECK(sep.exit_code == 0);
    const ml::Json sj = ml::parse_json_text(sep.out, "stdout");
    CHECK(sj.at("outcome") == "found");
    const auto gt2 = ml::make_builtin_target(ml::TargetKind::greater_than, 2);
    CHECK(ml::error_probability(gt2, *inst.channel, ml::code_from_json(sj.at("code"))) == 0);
}

TEST_CASE("cli rates reports the adder quantities") {
    const fs::path dir = scratch_dir("cli_rates");
    const CliResult r = run_cli("rates --channel adder --U 4096", dir);
    CHECK(r.exit_code == 0);
    const auto lines = split_lines(r.out);
    REQUIRE(lines.size() >= 2);
    CHECK(lines[0] ==
          "channel,U,W,n_min,n_raw,objective,h_star,cutset_bound,witness");
    const auto fields = [&] {
        std::vector<std::string> f;
        size_t start = 0;
        const std::string& row = lines[1];
        for (int i = 0; i < 8; ++i) {
            size_t pos = row.find(',', start);
            f.push_back(row.substr(start, pos - start));
            start = pos + 1;
        }
        return f;
    }();
    CHECK(fields[0] == "adder");
    CHECK(fields[1] == "4096");
    CHECK(fields[2] == "12");
    CHECK(fields[3] == "16");
    CHECK_THAT(std::stod(fields[6]), WithinAbs(1.5, 1e-6));
    CHECK_THAT(std::stod(fields[7]), WithinAbs(std::log2(12.0) / 1.5, 1e-5));
}

TEST_CASE("cli experiments are deterministic and well indexed") {
    const fs::path dir = scratch_dir("cli_experiment");
    const std::string args =
        "experiment --name balanced_fraction --U 2 --W 2 --c 1/2 --trials 10 --seed 3 --out ";
    const fs::path run1 = dir / "run1";
    const fs::path run2 = dir / "run2";
    CHECK(run_cli(args + run1.string(), dir).exit_code == 0);
    CHECK(run_cli(args + run2.string(), dir).exit_code == 0);

    for (const char* name : {"balanced_fraction.json", "balanced_fraction.csv", "index.json",
                             "manifest.json"})
        CHECK(fs::exists(run1 / name));
    CHECK(ml::read_text_file((run1 / "balanced_fraction.json").string()) ==
          ml::read_text_file((run2 / "balanced_fraction.json").string()));
    CHECK(ml::read_text_file((run1 / "balanced_fraction.csv").string()) ==
          ml::read_text_file((run2 / "balanced_fraction.csv").string()));

    const ml::Json rep =
        ml::parse_json_text(ml::read_text_file((run1 / "balanced_fraction.json").string()), "r");
    CHECK(rep.at("trials").get<std::uint64_t>() == 16);
    CHECK(rep.at("successes").get<std::uint64_t>() == 6);

    const ml::Json manifest =
        ml::parse_json_text(ml::read_text_file((run1 / "manifest.json").string()), "m");
    CHECK(manifest.at("seed").get<std::uint64_t>() == 3);
    CHECK(manifest.at("argv").is_array());

    const ml::Json index =
        ml::parse_json_text(ml::read_text_file((run1 / "index.json").string()), "i");
    const auto files = index.at("files").get<std::vector<std::string>>();
    CHECK(std::find(files.begin(), files.end(), "balanced_fraction.json") != files.end());
    CHECK(std::find(files.begin(), files.end(), "balanced_fraction.csv") != files.end());
}

TEST_CASE("cli paired experiments merge into one csv") {
    const fs::path dir = scratch_dir("cli_report");
    const fs::path run = dir / "run";
    const CliResult exp = run_cli(
        "experiment --name feasibility_fraction --target identity:2 --X 3 --Y 4,8 "
        "--trials 30 --seed 9 --out " +
            run.string(),
        dir);
    CHECK(exp.exit_code == 0);
    CHECK(fs::exists(run / "feasibility_fraction_Y4.json"));
    CHECK(fs::exists(run / "feasibility_fraction_Y8.json"));
    CHECK(fs::exists(run / "feasibility_fraction.csv"));

    const ml::Json y4 =
        ml::parse_json_text(ml::read_text_file((run / "feasibility_fraction_Y4.json").string()), "r");
    const ml::Json y8 =
        ml::parse_json_text(ml::read_text_file((run / "feasibility_fraction_Y8.json").string()), "r");
    CHECK(y4.at("successes").get<std::uint64_t>() <= y8.at("successes").get<std::uint64_t>());

    const fs::path merged = dir / "merged.csv";
    const CliResult rep = run_cli("report --in " + run.string() + " --out " + merged.string(), dir);
    CHECK(rep.exit_code == 0);
    CHECK(rep.out.find("rows=2") != std::string::npos);
    const auto lines = split_lines(ml::read_text_file(merged.string()));
    REQUIRE(lines.size() == 3);
    CHECK(lines[0] == ml::report_csv_header());

    const fs::path empty = dir / "empty";
    fs::create_directories(empty);
    CHECK(run_cli("report --in " + empty.string() + " --out " + (dir / "x.csv").string(), dir)
              .exit_code == 1);
}

TEST_CASE("cli rejects unknown commands and experiments") {
    const fs::path dir = scratch_dir("cli_bad");
    CHECK(run_cli("frobnicate", dir).exit_code == 1);
    CHECK(run_cli("experiment --name mystery --out " + (dir / "x").string(), dir).exit_code == 1);
    CHECK(run_cli("check --target identity:2 --channel adder --mode sideways", dir).exit_code == 1);
}
