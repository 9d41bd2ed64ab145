// test_cli.cpp - subcommands driven in-process: outputs, provenance and exit codes
#include "cli.h"
#include "coherence/io.h"
#include "coherence/spin_model.h"
#include "coherence/sweep.h"

#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <unistd.h>

using namespace coh;
namespace fs = std::filesystem;

namespace {

struct Result {
    int code;
    std::string out;
    std::string err;
};

Result run(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto p = fs::temp_directory_path() / ("coherence_cli_test_" + std::to_string(::getpid()));
        fs::remove_all(p);
        fs::create_directories(p);
        return p;
    }();
    return dir;
}

std::string write(const std::string& name, const std::string& content) {
    const auto p = scratch_dir() / name;
    std::ofstream(p) << content;
    return p.string();
}

std::map<std::string, std::string> records(const std::string& text) {
    std::map<std::string, std::string> m;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq != std::string::npos) m[line.substr(0, eq)] = line.substr(eq + 1);
    }
    return m;
}

double num(const std::map<std::string, std::string>& m, const std::string& key) {
    double v = NAN;
    REQUIRE(m.count(key) == 1);
    REQUIRE(parse_double(m.at(key), v));
    return v;
}

} // namespace

TEST_CASE("usage errors exit 2, help exits 0") {
    CHECK(run({}).code == 2);
    CHECK(run({"bogus"}).code == 2);
    CHECK(run({"simulate", "--unit-convention", "si"}).code == 2);
    CHECK(run({"simulate", "-N", "1"}).code == 2);
    CHECK(run({"--kernel", "sse9", "simulate"}).code == 2);
    const auto help = run({"--help"});
    CHECK(help.code == 0);
    CHECK(help.out.find("simulate") != std::string::npos);
}

TEST_CASE("metrics") {
    const auto half = write("half.txt", "dim 2\n0 0 0.5 0\n0 1 0.25 0\n1 0 0.25 0\n1 1 0.5 0\n");
    const auto r = run({"metrics", half});
    REQUIRE(r.code == 0);
    CHECK(r.out.rfind("# coherence", 0) == 0);
    const auto m = records(r.out);
    CHECK(std::abs(num(m, "xi") - 0.5) < 1e-10);
    CHECK(std::abs(num(m, "entropy") - 0.5623) < 5e-3);

    const auto mixed = write("mixed.txt", "dim 2\n0 0 0.5 0\n0 1 0 0\n1 0 0 0\n1 1 0.5 0\n");
    CHECK(std::abs(num(records(run({"metrics", mixed}).out), "xi")) < 1e-15);

    // |00> + |11>: locally mixed, globally pure
    std::string bell = "dim 4\n";
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j)
            bell += std::to_string(i) + " " + std::to_string(j) + " " +
                    ((i == 0 || i == 3) && (j == 0 || j == 3) ? "0.5" : "0") + " 0\n";
    const auto b = records(run({"metrics", write("bell.txt", bell), "--partition", "2,2"}).out);
    CHECK(std::abs(num(b, "xi_id") - 1.0) < 1e-12);
    CHECK(std::abs(num(b, "xi_re")) < 1e-12);
    CHECK(std::abs(num(b, "mutual_information") - 2.0 * std::log(2.0)) < 1e-12);
    CHECK(run({"metrics", write("bell2.txt", bell), "--partition", "3,2"}).code == 1);

    CHECK(run({"metrics", write("bad.txt", "dim 2\n0 0 zero 0\n")}).code == 2);
    CHECK(run({"metrics", (scratch_dir() / "missing.txt").string()}).code == 5);
}

TEST_CASE("simulate: two particles follow |cos 2gt|") {
    const auto ens_path = (scratch_dir() / "pair.ens").string();
    const auto r = run({"--seed", "11", "simulate", "-N", "2", "--save-ensemble", ens_path});
    REQUIRE(r.code == 0);
    CHECK(r.out.find("seed=11") != std::string::npos);
    CHECK(r.out.find("grid: log_points=512") != std::string::npos);
    const auto ens = read_ensemble_file(ens_path);
    const double g = ens.coupling(0, 1);
    const auto trace = trace_from_csv(r.out);
    CHECK(trace.values.front() == 1.0);
    CHECK(trace.times.front() == 0.0);
    for (std::size_t i = 0; i < trace.times.size(); i += 37)
        CHECK(std::abs(trace.values[i] - std::abs(std::cos(2.0 * g * trace.times[i]))) < 1e-12);

    // same seed, same bytes; a different seed differs
    CHECK(run({"--seed", "11", "simulate", "-N", "2"}).out == r.out);
    CHECK(run({"--seed", "12", "simulate", "-N", "2"}).out != r.out);
}

TEST_CASE("simulate: figure convention stretches the time axis") {
    const auto ens = write("unit.ens", "ensemble 2 1 1 1 1 0\n0\n1\n");
    const auto text = trace_from_csv(run({"simulate", "--ensemble", ens, "--log-points", "0", "--linear-points", "11",
                                          "--linear-end", "1"}).out);
    const auto fig = trace_from_csv(run({"--unit-convention", "figure", "simulate", "--ensemble", ens, "--log-points",
                                         "0", "--linear-points", "11", "--linear-end", "1"}).out);
    REQUIRE(text.times.size() == 11);
    for (std::size_t i = 0; i < 11; ++i) {
        CHECK(std::abs(text.values[i] - std::abs(std::cos(2.0 * text.times[i]))) < 1e-13);
        CHECK(std::abs(fig.values[i] - std::abs(std::cos(4.0 * fig.times[i]))) < 1e-13);
    }
}

TEST_CASE("simulate: oracle column and capacity exit") {
    const auto r = run({"--seed", "3", "simulate", "-N", "6", "-D", "2", "--oracle", "--log-points", "16",
                        "--linear-points", "8"});
    REQUIRE(r.code == 0);
    const auto table = parse_csv(r.out);
    for (std::size_t i = 0; i < table.rows.size(); ++i) CHECK(table.number(i, "oracle_dev") <= 1e-10);
    CHECK(run({"simulate", "-N", "20", "--oracle"}).code == 3);
    CHECK(run({"simulate", "-N", "20", "--oracle", "--oracle-cap", "8"}).code == 3);
}

TEST_CASE("simulate writes atomically to --out and round-trips") {
    const auto out = (scratch_dir() / "trace.csv").string();
    REQUIRE(run({"--out", out, "simulate", "-N", "8", "-D", "3", "--log-points", "32", "--linear-points", "16"}).code == 0);
    const auto text = read_text_file(out);
    const auto tr = trace_from_csv(text);
    CHECK(tr.times.size() == 48);
    CHECK(trace_to_csv(tr).size() < text.size());
    // re-serialising the parsed trace reproduces the data rows exactly
    const auto again = trace_from_csv(trace_to_csv(tr));
    CHECK(again.values == tr.values);
    CHECK(again.times == tr.times);
}

TEST_CASE("fit") {
    std::string csv = "t,xi_re\n";
    const auto grid = make_time_grid();
    for (double t : grid) csv += fmt_double(t) + "," + fmt_double(std::exp(-std::pow(t / 0.1212, 1.007))) + "\n";
    const auto path = write("synthetic.csv", csv);
    const auto res_path = (scratch_dir() / "residuals.csv").string();
    const auto r = run({"fit", path, "--floor", "0", "--residuals", res_path});
    REQUIRE(r.code == 0);
    const auto m = records(r.out);
    CHECK(std::abs(num(m, "t_d") / 0.1212 - 1.0) < 1e-3);
    CHECK(std::abs(num(m, "C") / 1.007 - 1.0) < 1e-3);
    CHECK(m.at("converged") == "1");
    const auto res = parse_csv(read_text_file(res_path));
    CHECK(res.rows.size() == grid.size());
    CHECK(std::abs(res.number(10, "residual")) < 1e-8);

    // estimated floor path
    const auto r2 = run({"fit", path});
    REQUIRE(r2.code == 0);
    const auto m2 = records(r2.out);
    CHECK(std::abs(num(m2, "C") / 1.007 - 1.0) < 1e-3);
    CHECK(m2.at("floor_window_clamped") == "0");

    std::string flat = "t,xi_re\n";
    for (double t : grid) flat += fmt_double(t) + ",1\n";
    CHECK(run({"fit", write("flat.csv", flat)}).code == 4);
    CHECK(run({"fit", write("empty.csv", "t,xi_re\n")}).code == 4);
    CHECK(run({"fit", write("junk.csv", "t,xi_re\n0,abc\n")}).code == 2);
}

TEST_CASE("sweep: rows, determinism and unwritable output") {
    const auto dir = scratch_dir() / "sweep1";
    const std::vector<std::string> args{"--seed", "5", "--out", dir.string(), "sweep", "-N", "10", "-D", "1,2",
                                        "-e", "1", "-U", "2", "--log-points", "64", "--linear-points", "64"};
    REQUIRE(run(args).code == 0);
    const auto runs1 = read_text_file((dir / "runs.csv").string());
    const auto summary1 = read_text_file((dir / "summary.csv").string());
    CHECK(parse_runs_csv(runs1).size() == 4);
    const auto summary = parse_summary_csv(summary1);
    REQUIRE(summary.size() == 2);
    CHECK(summary[1].dimension == 2);
    CHECK(summary1.find("base_seed=5") != std::string::npos);

    auto threaded = args;
    threaded.insert(threaded.begin(), {"--threads", "3"});
    REQUIRE(run(threaded).code == 0);
    CHECK(read_text_file((dir / "runs.csv").string()) == runs1);
    CHECK(read_text_file((dir / "summary.csv").string()) == summary1);

    const auto single = scratch_dir() / "sweep2";
    REQUIRE(run({"--out", single.string(), "sweep", "-N", "10", "-U", "1", "--log-points", "64", "--linear-points",
                 "64"}).code == 0);
    CHECK(parse_runs_csv(read_text_file((single / "runs.csv").string())).size() == 1);

    const auto blocker = write("blocker", "file, not a directory");
    CHECK(run({"--out", blocker + "/sub", "sweep", "-N", "10", "-U", "1"}).code == 5);
    CHECK(run({"sweep", "-N", "10", "-U", "1"}).code == 1);
}

TEST_CASE("recurrence") {
    const auto law = records(run({"recurrence", "--law", "-N", "100", "-D", "3", "-e", "1", "--density", "1e30",
                                  "--eta", "em"}).out);
    CHECK(std::abs(num(law, "log10_tp_law") - 13183.0) < 20.0);

    // two particles at unit distance: one period pi, bound is exactly pi
    const auto pair = write("pair_unit.ens", "ensemble 2 1 1 1 1 0\n0\n1\n");
    const auto r = records(run({"recurrence", "--ensemble", pair}).out);
    CHECK(num(r, "log10_tp") == doctest::Approx(std::log10(std::numbers::pi)).epsilon(1e-15));

    const auto csv_path = (scratch_dir() / "rec.csv").string();
    const auto big = run({"recurrence", "-N", "100", "-D", "3", "--csv", csv_path});
    REQUIRE(big.code == 0);
    const auto m = records(big.out);
    CHECK(num(m, "log10_tp") >= num(m, "log10_factorial"));
    const auto table = parse_csv(read_text_file(csv_path));
    CHECK(table.rows.size() == 4951);
    CHECK(table.comments.front().find("command=recurrence") != std::string::npos);

    CHECK(run({"recurrence", "--eta", "-3"}).code == 1);
    CHECK(run({"recurrence", "--ensemble", write("bad.ens", "ensemble 2 1\n")}).code == 2);
}
