#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hids/common.hpp"
#include "hids/preprocess.hpp"
#include "test_util.hpp"

using namespace hids;
namespace fs = std::filesystem;

namespace {

/// Runs the installed binary with `args`, capturing exit code and output.
struct RunResult {
    int code = -1;
    std::string output;  // stdout and stderr interleaved
};

RunResult run_cli(const std::string& args) {
    static int counter = 0;
    const std::string capture = "cli_capture_" + std::to_string(counter++) + ".txt";
    const std::string cmd = std::string(HIDS_BIN) + " " + args + " > " + capture + " 2>&1";
    int status = std::system(cmd.c_str());
    RunResult r;
    r.code = (status >= 0) ? ((status >> 8) & 0xff) : -1;
    std::ifstream in(capture);
    std::stringstream buf;
    buf << in.rdbuf();
    r.output = buf.str();
    std::remove(capture.c_str());
    return r;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

/// Three separable label blobs, enough rows to survive quota splitting.
Dataset blob_flows(uint64_t seed, size_t per_label) {
    SplitMix64 rng(seed);
    std::vector<std::vector<double>> rows;
    std::vector<std::string> labels;
    auto blob = [&](double cx, double cy, double cz, const std::string& label) {
        for (size_t i = 0; i < per_label; ++i) {
            rows.push_back({cx + rng.unit(), cy + rng.unit(), cz + rng.unit()});
            labels.push_back(label);
        }
    };
    blob(0, 0, 0, "BENIGN");
    blob(6, 6, 0, "PortScan");
    blob(0, 6, 6, "Bot");
    std::vector<size_t> order(rows.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);
    std::vector<std::pair<std::vector<double>, std::string>> shuffled;
    for (size_t i : order) shuffled.push_back({rows[i], labels[i]});
    return test::make_dataset({"dur", "fwd", "bwd"}, shuffled);
}

struct Sandbox {
    fs::path dir;
    Sandbox() {
        static int counter = 0;
        dir = fs::path("cli_sandbox_" + std::to_string(counter++));
        fs::remove_all(dir);
        fs::create_directories(dir);
    }
    ~Sandbox() { fs::remove_all(dir); }
    std::string p(const std::string& name) const { return (dir / name).string(); }
};

void write_quota(const fs::path& path) {
    std::ofstream out(path);
    out << "label,train,test\n"
        << "BENIGN,150,100\n"
        << "PortScan,100,60\n"
        << "Bot,80,40\n";
}

}  // namespace

TEST_CASE("full pipeline runs end to end") {
    Sandbox box;
    write_csv_file(blob_flows(11, 260), box.p("raw.csv"));
    write_quota(box.dir / "quota.csv");

    auto cleaned = run_cli("clean " + box.p("raw.csv") + " --out-dir " + box.p("work"));
    REQUIRE(cleaned.code == 0);
    REQUIRE(fs::exists(box.dir / "work" / "cleaned.csv"));
    REQUIRE(fs::exists(box.dir / "work" / "cleaned.provenance"));

    auto split = run_cli("split " + box.p("work/cleaned.csv") + " --seed 5 --set split.spec_file=" +
                         box.p("quota.csv") + " --out-dir " + box.p("work"));
    REQUIRE(split.code == 0);
    CHECK(split.output.find("BENIGN") != std::string::npos);
    CHECK(split.output.find("Total") != std::string::npos);
    REQUIRE(fs::exists(box.dir / "work" / "train.csv"));
    REQUIRE(fs::exists(box.dir / "work" / "test.csv"));

    auto train = run_cli("train " + box.p("work/train.csv") +
                         " --seed 5 --set forest.tree_count=10 --out-dir " + box.p("work"));
    REQUIRE(train.code == 0);
    REQUIRE(fs::exists(box.dir / "work" / "model.hids"));
    REQUIRE(fs::exists(box.dir / "work" / "timing-train.kv"));
    CHECK(slurp(box.dir / "work" / "timing-train.kv").find("train_seconds") != std::string::npos);

    auto eval = run_cli("evaluate " + box.p("work/model.hids") + " " + box.p("work/test.csv") +
                        " --out-dir " + box.p("work"));
    REQUIRE(eval.code == 0);
    CHECK(eval.output.find("Accuracy") != std::string::npos);
    CHECK(eval.output.find("FAR") != std::string::npos);
    REQUIRE(fs::exists(box.dir / "work" / "report.kv"));
    REQUIRE(fs::exists(box.dir / "work" / "report.txt"));
    REQUIRE(fs::exists(box.dir / "work" / "timing-evaluate.kv"));
    // Reports on disk stay timing free so reruns stay byte comparable.
    CHECK(slurp(box.dir / "work" / "report.kv").find("seconds") == std::string::npos);

    // Unlabeled input: strip the label column from a few test rows.
    {
        std::ifstream in(box.p("work/test.csv"));
        std::ofstream out(box.p("probe.csv"));
        std::string line;
        for (int i = 0; std::getline(in, line) && i < 6; ++i) {
            out << line.substr(0, line.rfind(',')) << "\n";
        }
    }
    auto predict = run_cli("predict " + box.p("work/model.hids") + " " + box.p("probe.csv") +
                           " --out-dir " + box.p("work"));
    REQUIRE(predict.code == 0);
    const std::string preds = slurp(box.dir / "work" / "predictions.csv");
    CHECK(preds.find("stage1_label") != std::string::npos);
    CHECK(preds.find("stage2_label") != std::string::npos);
    CHECK(preds.find("predicted_label") != std::string::npos);
}

TEST_CASE("same seed reruns are byte identical") {
    Sandbox box;
    write_csv_file(blob_flows(23, 260), box.p("raw.csv"));
    write_quota(box.dir / "quota.csv");

    auto stage = [&](const std::string& out) {
        REQUIRE(run_cli("split " + box.p("raw.csv") + " --seed 9 --set split.spec_file=" +
                        box.p("quota.csv") + " --out-dir " + box.p(out))
                    .code == 0);
        REQUIRE(run_cli("train " + box.p(out + "/train.csv") +
                        " --seed 9 --set forest.tree_count=6 --out-dir " + box.p(out))
                    .code == 0);
        REQUIRE(run_cli("evaluate " + box.p(out + "/model.hids") + " " + box.p(out + "/test.csv") +
                        " --out-dir " + box.p(out))
                    .code == 0);
    };
    stage("a");
    stage("b");
    for (const char* f : {"train.csv", "test.csv", "model.hids", "report.kv"}) {
        CHECK(slurp(box.dir / "a" / f) == slurp(box.dir / "b" / f));
    }
}

TEST_CASE("exit codes distinguish input, config, and usage errors") {
    Sandbox box;
    write_csv_file(blob_flows(31, 40), box.p("raw.csv"));

    CHECK(run_cli("clean " + box.p("absent.csv") + " --out-dir " + box.p("w")).code == 2);
    CHECK(run_cli("split " + box.p("raw.csv") + " --out-dir " + box.p("w")).code == 3);  // no seed
    CHECK(run_cli("train " + box.p("raw.csv") + " --seed 1 --set nope=1 --out-dir " + box.p("w"))
              .code == 3);
    CHECK(run_cli("train " + box.p("raw.csv") + " --seed 1 --set forest.tree_count=0 --out-dir " +
                  box.p("w"))
              .code == 3);
    CHECK(run_cli("--definitely-not-a-flag").code == 3);
    CHECK(run_cli("").code == 3);  // a subcommand is required
}

TEST_CASE("quota shortfalls list every label and write nothing") {
    Sandbox box;
    write_csv_file(blob_flows(47, 30), box.p("raw.csv"));  // 30 per label, quota wants 250
    write_quota(box.dir / "quota.csv");
    auto r = run_cli("split " + box.p("raw.csv") + " --seed 2 --set split.spec_file=" +
                     box.p("quota.csv") + " --out-dir " + box.p("w"));
    CHECK(r.code == 2);
    CHECK(r.output.find("short label 'BENIGN'") != std::string::npos);
    CHECK(r.output.find("short label 'PortScan'") != std::string::npos);
    CHECK(!fs::exists(box.dir / "w" / "train.csv"));
    CHECK(!fs::exists(box.dir / "w" / "test.csv"));
}

TEST_CASE("predict reports every malformed row before failing") {
    Sandbox box;
    write_csv_file(blob_flows(53, 120), box.p("raw.csv"));
    REQUIRE(run_cli("train " + box.p("raw.csv") + " --seed 3 --set forest.tree_count=5 --out-dir " +
                    box.p("w"))
                .code == 0);
    {
        std::ofstream out(box.p("bad.csv"));
        out << "dur,fwd,bwd\n"
            << "1.0,2.0,3.0\n"
            << "1.0,2.0\n"         // short row
            << "1.0,huh,3.0\n"     // unparsable cell
            << "1.0,2.0,3.0,4.0,5.0\n";  // long row (width+1 means label, +2 is malformed)
    }
    auto r = run_cli("predict " + box.p("w/model.hids") + " " + box.p("bad.csv") + " --out-dir " +
                     box.p("w"));
    CHECK(r.code == 2);
    CHECK(r.output.find(":3") != std::string::npos);
    CHECK(r.output.find(":4") != std::string::npos);
    CHECK(r.output.find(":5") != std::string::npos);
    CHECK(!fs::exists(box.dir / "w" / "predictions.csv"));
}

TEST_CASE("evaluate refuses an empty test set") {
    Sandbox box;
    write_csv_file(blob_flows(59, 120), box.p("raw.csv"));
    REQUIRE(run_cli("train " + box.p("raw.csv") + " --seed 3 --set forest.tree_count=5 --out-dir " +
                    box.p("w"))
                .code == 0);
    {
        std::ofstream out(box.p("empty.csv"));
        out << "dur,fwd,bwd,Label\n";
    }
    CHECK(run_cli("evaluate " + box.p("w/model.hids") + " " + box.p("empty.csv") + " --out-dir " +
                  box.p("w"))
              .code == 2);
}

TEST_CASE("dedicated flags beat --set which beats the config file") {
    Sandbox box;
    write_csv_file(blob_flows(61, 120), box.p("raw.csv"));
    {
        std::ofstream out(box.p("pipeline.ini"));
        out << "[run]\nformat = table\nseed = 1\n[forest]\ntree_count = 4\n";
    }
    // --set overrides the file's seed; --format overrides both layers.
    auto r = run_cli("train " + box.p("raw.csv") + " --config " + box.p("pipeline.ini") +
                     " --set run.seed=7 --set forest.tree_count=5 --out-dir " + box.p("w"));
    REQUIRE(r.code == 0);
    CHECK(r.output.find("trees 5") != std::string::npos);

    auto eval = run_cli("evaluate " + box.p("w/model.hids") + " " + box.p("raw.csv") +
                        " --config " + box.p("pipeline.ini") + " --format kv --out-dir " +
                        box.p("w"));
    REQUIRE(eval.code == 0);
    CHECK(eval.output.find("metrics v1") != std::string::npos);  // kv, not the table renderer
    CHECK(eval.output.find("Accuracy") == std::string::npos);
}
