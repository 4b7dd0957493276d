#include <doctest.h>

#include <sstream>

#include <json.hpp>

#include "commands.hpp"
#include "fresh/experiments.hpp"
#include "fresh/report.hpp"
#include "test_support.hpp"

using namespace fresh;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run_cli(std::vector<std::string> args) {
    args.insert(args.begin(), "fresh");
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path clustered_file(const fs::path& dir) {
    ClusteredSpec spec;
    spec.curves = 90;
    spec.clusters = 3;
    const auto path = dir / "clusters.txt";
    write_series_1d(make_clustered_dataset(spec), path);
    return path;
}

std::string masked_jsonl(const std::string& text) {
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) out += strip_timing(nlohmann::json::parse(line)).dump() + "\n";
    return out;
}

std::string masked_summary(const fs::path& path) {
    return strip_timing(nlohmann::json::parse(test::read_text(path))).dump();
}

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("verify-pair prints verdict and stage") {
    const auto dir = test::scratch_dir("cli_verify");
    test::write_text(dir / "a.txt", "0\n3\n1\n4\n");
    test::write_text(dir / "b.txt", "9\n4\n");
    test::write_text(dir / "bad.txt", "0\nzz\n");

    auto r = run_cli({"verify-pair", (dir / "a.txt").string(), (dir / "b.txt").string(), "--radius", "1"});
    CHECK(r.code == 0);
    CHECK(r.out == "Far endpoints\n");

    r = run_cli({"verify-pair", (dir / "a.txt").string(), (dir / "a.txt").string(), "--radius", "1"});
    CHECK(r.code == 0);
    CHECK(r.out == "Near simpl-10\n");

    r = run_cli({"verify-pair", (dir / "a.txt").string(), (dir / "bad.txt").string(), "--radius", "1"});
    CHECK(r.code == cli::kIoError);
    CHECK(r.err.find("bad.txt:2") != std::string::npos);

    r = run_cli({"verify-pair", (dir / "a.txt").string(), (dir / "a.txt").string(), "--radius", "1",
                 "--epsilons", "1,10"});
    CHECK(r.code == cli::kConfigError);
}

TEST_CASE("usage errors") {
    CHECK(run_cli({}).code == cli::kConfigError);
    CHECK(run_cli({"no-such-command"}).code == cli::kConfigError);
    CHECK(run_cli({"--help"}).code == cli::kOk);

    const auto dir = test::scratch_dir("cli_usage");
    const auto data = clustered_file(dir);
    const auto prefix = (dir / "run").string();
    auto r = run_cli({"self-join", "--dataset", data.string(), "--radius", "1", "--percentile", "1",
                      "--out", prefix});
    CHECK(r.code == cli::kConfigError);
    r = run_cli({"self-join", "--dataset", data.string(), "--out", prefix});
    CHECK(r.code == cli::kConfigError);
    r = run_cli({"self-join", "--dataset", data.string(), "--radius", "1", "--tau", "2", "--out", prefix});
    CHECK(r.code == cli::kConfigError);
    r = run_cli({"self-join", "--dataset", data.string(), "--radius", "1", "--percentile", "3",
                 "--out", prefix});
    CHECK(r.code == cli::kConfigError);
    CHECK_FALSE(fs::exists(prefix + ".summary.json"));
}

TEST_CASE("missing dataset leaves no partial outputs") {
    const auto dir = test::scratch_dir("cli_missing");
    const auto prefix = (dir / "run").string();
    const auto r = run_cli({"self-join", "--dataset", (dir / "nope.txt").string(), "--radius", "1",
                            "--out", prefix});
    CHECK(r.code == cli::kIoError);
    CHECK_FALSE(r.err.empty());
    CHECK(fs::is_empty(dir));
}

TEST_CASE("self-join writes deterministic reports") {
    const auto dir = test::scratch_dir("cli_determinism");
    const auto data = clustered_file(dir);
    auto args = [&](const std::string& name, const std::string& threads) {
        return std::vector<std::string>{"self-join", "--dataset", data.string(), "--radius", "1",
                                        "--tau", "0.3", "--L", "256", "--seed", "5", "--threads",
                                        threads, "--out", (dir / name).string()};
    };
    REQUIRE(run_cli(args("a", "1")).code == 0);
    REQUIRE(run_cli(args("b", "1")).code == 0);
    REQUIRE(run_cli(args("c", "4")).code == 0);

    for (const auto* other : {"b", "c"}) {
        CHECK(masked_summary(dir / "a.summary.json") ==
              masked_summary(dir / (std::string(other) + ".summary.json")));
        CHECK(masked_jsonl(test::read_text(dir / "a.queries.jsonl")) ==
              masked_jsonl(test::read_text(dir / (std::string(other) + ".queries.jsonl"))));
        CHECK(test::read_text(dir / "a.pairs.csv") ==
              test::read_text(dir / (std::string(other) + ".pairs.csv")));
    }

    const auto summary = nlohmann::json::parse(test::read_text(dir / "a.summary.json"));
    CHECK(summary["params"]["L"] == 256);
    CHECK(summary["params"]["k"] == 2);
    CHECK(summary["params"]["delta"] == 4.0);
    CHECK(summary.contains("timing"));
    CHECK(summary["n"] == 90);
    std::size_t stage_total = 0;
    for (const auto& s : summary["stages"]) stage_total += s["count"].get<std::size_t>();
    CHECK(stage_total == 90 * 89 / 2);
}

TEST_CASE("full verification reports a subset of the exact join") {
    const auto dir = test::scratch_dir("cli_subset");
    const auto data = clustered_file(dir);
    REQUIRE(run_cli({"exact-join", "--dataset", data.string(), "--radius", "1", "--out",
                     (dir / "truth.csv").string()})
                .code == 0);
    REQUIRE(run_cli({"self-join", "--dataset", data.string(), "--radius", "1", "--tau", "1",
                     "--truth", (dir / "truth.csv").string(), "--out", (dir / "run").string()})
                .code == 0);
    const auto truth = read_pairs_csv(dir / "truth.csv");
    const auto reported = read_pairs_csv(dir / "run.pairs.csv");
    CHECK(std::includes(truth.begin(), truth.end(), reported.begin(), reported.end()));
    const auto summary = nlohmann::json::parse(test::read_text(dir / "run.summary.json"));
    CHECK(summary["metrics"]["precision"] == 1.0);
    CHECK(summary.contains("scores"));

    const auto m = run_cli({"metrics", "--predicted", (dir / "run.pairs.csv").string(), "--truth",
                            (dir / "truth.csv").string()});
    CHECK(m.code == 0);
    CHECK(nlohmann::json::parse(m.out)["precision"] == 1.0);
    CHECK(nlohmann::json::parse(m.out)["recall"] == summary["metrics"]["recall"]);
}

TEST_CASE("exact-join edge cases") {
    const auto dir = test::scratch_dir("cli_exact");
    test::write_text(dir / "same.txt", "1,2,3\n1,2,3\n1,2,3\n");
    REQUIRE(run_cli({"exact-join", "--dataset", (dir / "same.txt").string(), "--radius", "0.01",
                     "--out", (dir / "p.csv").string()})
                .code == 0);
    CHECK(test::read_text(dir / "p.csv") == "idA,idB\n0,1\n0,2\n1,2\n");

    test::write_text(dir / "apart.txt", "0,1\n5,6\n");
    REQUIRE(run_cli({"exact-join", "--dataset", (dir / "apart.txt").string(), "--radius", "1",
                     "--out", (dir / "q.csv").string()})
                .code == 0);
    CHECK(test::read_text(dir / "q.csv") == "idA,idB\n");

    test::write_text(dir / "labelled.txt", "7 1 2 3\n7 1 2 3\n");
    REQUIRE(run_cli({"exact-join", "--dataset", (dir / "labelled.txt").string(), "--skip-first-field",
                     "--percentile", "5", "--out", (dir / "l.csv").string()})
                .code == cli::kConfigError);
}

TEST_CASE("saved index is reused") {
    const auto dir = test::scratch_dir("cli_index");
    const auto data = clustered_file(dir);
    const std::vector<std::string> base{"self-join", "--dataset", data.string(), "--radius", "1",
                                        "--L", "64", "--seed", "3"};
    auto with = [&](std::vector<std::string> extra) {
        auto a = base;
        a.insert(a.end(), extra.begin(), extra.end());
        return run_cli(a);
    };
    REQUIRE(with({"--save-index", (dir / "i.idx").string(), "--out", (dir / "a").string()}).code == 0);
    REQUIRE(with({"--load-index", (dir / "i.idx").string(), "--out", (dir / "b").string()}).code == 0);
    CHECK(test::read_text(dir / "a.pairs.csv") == test::read_text(dir / "b.pairs.csv"));

    auto r = run_cli({"self-join", "--dataset", data.string(), "--radius", "2", "--L", "64", "--seed",
                      "3", "--load-index", (dir / "i.idx").string(), "--out", (dir / "c").string()});
    CHECK(r.code == cli::kConfigError);
    test::write_text(dir / "junk.idx", "junk");
    r = with({"--load-index", (dir / "junk.idx").string(), "--out", (dir / "d").string()});
    CHECK(r.code == cli::kIoError);
    CHECK_FALSE(fs::exists(dir / "d.pairs.csv"));
}

TEST_CASE("collision-prob writes a csv report") {
    const auto dir = test::scratch_dir("cli_collision");
    const auto data = clustered_file(dir);
    const auto r = run_cli({"collision-prob", "--dataset", data.string(), "--radius", "1", "--pairs",
                            "5", "--trials", "500"});
    CHECK(r.code == 0);
    CHECK(r.out.rfind("a,b,m,", 0) == 0);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 6);
    const auto again = run_cli({"collision-prob", "--dataset", data.string(), "--radius", "1", "--pairs",
                                "5", "--trials", "500", "--threads", "4"});
    CHECK(again.out == r.out);
    CHECK(run_cli({"collision-prob", "--dataset", data.string()}).code == cli::kConfigError);
}

}  // TEST_SUITE
