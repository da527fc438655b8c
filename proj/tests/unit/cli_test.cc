#include "fruitbench/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <initializer_list>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <json.hpp>

#include "fruitbench/coco_io.hpp"
#include "fruitbench/splits.hpp"

namespace fruitbench {
namespace {

namespace fs = std::filesystem;
const fs::path kData = FRUITBENCH_TEST_DATA_DIR;

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun run(std::initializer_list<std::string> args) {
  std::vector<std::string> owned{"fruitbench"};
  owned.insert(owned.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  for (const auto& a : owned) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("fruitbench_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

const std::string kE2e = (kData / "e2e" / "annotations.json").string();

TEST_F(CliTest, StatsPrintsTable) {
  const CliRun r = run({"stats", "--annotations", (kData / "metafruit_subset" / "annotations.json").string()});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| Apple | 9 | 682 | 76 | 1,230 | Michigan & California |"), std::string::npos)
      << r.out;
  EXPECT_NE(r.out.find("| Total | 40 | 2,263 | 57 | 1,148 |"), std::string::npos);
}

TEST_F(CliTest, SplitIsReproducible) {
  const CliRun a = run({"split", "-a", kE2e, "--kind", "k-shot", "--k", "2", "--seed", "7"});
  const CliRun b = run({"split", "-a", kE2e, "--kind", "k-shot", "--k", "2", "--seed", "7"});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_EQ(a.out, b.out);
  const SplitResult sr = parse_manifest(a.out);
  EXPECT_EQ(sr.train_image_ids.size(), 10u);

  const CliRun c = run({"split", "-a", kE2e, "--kind", "cross-class", "--held-out", "lemon",
                     "-o", path("m.json")});
  ASSERT_EQ(c.code, 0) << c.err;
  EXPECT_EQ(c.out, load_manifest(path("m.json")).manifest_digest + "\n");
}

TEST_F(CliTest, SplitValidatesFlagsBeforeIo) {
  // k-shot without --k fails even though the annotation file is missing.
  const CliRun r = run({"split", "-a", path("missing.json"), "--kind", "k-shot"});
  EXPECT_EQ(r.code, 1);
  EXPECT_EQ(run({"split", "-a", kE2e, "--fraction", "1.5"}).code, 1);
  EXPECT_EQ(run({"split", "-a", kE2e, "--kind", "cross-class", "--held-out", "kiwi"}).code, 1);
}

TEST_F(CliTest, EvaluateDanglingIdExitsOne) {
  write_file(path("p.json"), R"([{"image_id": 4242, "category_id": 1, "bbox": [0,0,1,1], "score": 0.5}])");
  const CliRun r = run({"evaluate", "-a", kE2e, "-p", path("p.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("4242"), std::string::npos) << r.err;
}

TEST_F(CliTest, EvaluateWithSplitManifest) {
  ASSERT_EQ(run({"split", "-a", kE2e, "--seed", "7", "-o", path("m.json")}).code, 0);
  const CliRun r = run({"evaluate", "-a", kE2e, "-p", (kData / "e2e" / "preds_perfect.json").string(),
                     "-s", path("m.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = nlohmann::json::parse(r.out);
  EXPECT_EQ(j["aggregate"]["mAP"], 1.0);
  EXPECT_EQ(j["split_digest"], load_manifest(path("m.json")).manifest_digest);
  EXPECT_NE(r.err.find("ignored"), std::string::npos);
}

TEST_F(CliTest, TamperedManifestExitsOne) {
  ASSERT_EQ(run({"split", "-a", kE2e, "-o", path("m.json")}).code, 0);
  auto j = nlohmann::json::parse(read_file(path("m.json")));
  j["test_image_ids"][0] = 9999;
  write_file(path("m.json"), j.dump());
  const CliRun r = run({"--json-errors", "evaluate", "-a", kE2e, "-p",
                     (kData / "e2e" / "preds_empty.json").string(), "-s", path("m.json")});
  EXPECT_EQ(r.code, 1);
  const auto err = nlohmann::json::parse(r.err);
  EXPECT_EQ(err["error"]["kind"], "tamper");
  EXPECT_EQ(err["error"]["exit_code"], 1);
}

TEST_F(CliTest, MissingFileExitsTwo) {
  const CliRun r = run({"--json-errors", "stats", "-a", path("nope.json")});
  EXPECT_EQ(r.code, 2);
  const auto err = nlohmann::json::parse(r.err);
  EXPECT_EQ(err["error"]["exit_code"], 2);
}

TEST_F(CliTest, UsageErrorsExitOne) {
  EXPECT_EQ(run({}).code, 1);
  EXPECT_EQ(run({"stats", "-a", kE2e, "--bogus"}).code, 1);
  EXPECT_EQ(run({"frobnicate"}).code, 1);
  EXPECT_EQ(run({"stats", "-a", kE2e, "--format", "xml"}).code, 1);
  EXPECT_EQ(run({"--threads", "0", "stats", "-a", kE2e}).code, 1);
}

TEST_F(CliTest, MalformedJsonExitsOne) {
  write_file(path("bad.json"), "{\"images\": [");
  const CliRun r = run({"stats", "-a", path("bad.json")});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("byte"), std::string::npos) << r.err;
}

TEST_F(CliTest, ConfigFileWithFlagOverride) {
  write_file(path("run.toml"),
             "[split]\nannotations = \"" + kE2e + "\"\nkind = \"train-test\"\nfraction = 0.5\nseed = 3\n");
  const CliRun from_file = run({"--config", path("run.toml"), "split"});
  ASSERT_EQ(from_file.code, 0) << from_file.err;
  const SplitResult a = parse_manifest(from_file.out);
  EXPECT_EQ(a.spec.seed, 3u);
  EXPECT_EQ(a.spec.train_fraction, 0.5);

  const CliRun overridden = run({"--config", path("run.toml"), "split", "--seed", "4"});
  ASSERT_EQ(overridden.code, 0) << overridden.err;
  const SplitResult b = parse_manifest(overridden.out);
  EXPECT_EQ(b.spec.seed, 4u);
  EXPECT_EQ(b.spec.train_fraction, 0.5);
}

TEST_F(CliTest, ThreadsDoNotChangeOutput) {
  const std::string preds = (kData / "e2e" / "preds_noisy.json").string();
  const CliRun one = run({"--threads", "1", "evaluate", "-a", kE2e, "-p", preds});
  const CliRun many = run({"--threads", "8", "evaluate", "-a", kE2e, "-p", preds});
  ::setenv("FRUITBENCH_THREADS", "3", 1);
  const CliRun env = run({"evaluate", "-a", kE2e, "-p", preds});
  ::unsetenv("FRUITBENCH_THREADS");
  ASSERT_EQ(one.code, 0);
  EXPECT_EQ(one.out, many.out);
  EXPECT_EQ(one.out, env.out);
}

TEST_F(CliTest, ReportRendersGrid) {
  const CliRun r = run({"report", "-a", kE2e, "--grid", (kData / "e2e" / "grid.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| perfect | 100.0 |"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("| empty | 0.0 |"), std::string::npos) << r.out;
  const CliRun csv = run({"report", "-a", kE2e, "--grid", (kData / "e2e" / "grid.json").string(),
                       "--format", "csv", "-o", path("grid.csv")});
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_EQ(read_file(path("grid.csv")).rfind("Setting,", 0), 0u);
}

TEST_F(CliTest, BenchSummarizesLog) {
  std::string log;
  for (int i = 0; i < 10; ++i) {
    log += "{\"model\": \"Retinanet\", \"image_id\": " + std::to_string(i) + ", \"latency_ms\": 45.7}\n";
  }
  write_file(path("t.jsonl"), log);
  const CliRun r = run({"bench", "--log", path("t.jsonl")});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("| Retinanet | 21.9 | 45.7 |"), std::string::npos) << r.out;
}

TEST_F(CliTest, IngestLabelmeThenStats) {
  const CliRun r = run({"ingest-labelme", "--dir", (kData / "labelme").string(), "--categories",
                     "apple,orange", "--region", "Michigan", "-o", path("lm.json")});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_EQ(summary["instances"], 3);
  EXPECT_EQ(summary["unmapped_labels"]["leaf"], 1);
  EXPECT_NE(r.err.find("unmapped"), std::string::npos);
  const CliRun s = run({"stats", "-a", path("lm.json"), "--format", "json"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(nlohmann::json::parse(s.out)[0]["bboxes"], 2);
}

TEST_F(CliTest, WriteCocoRoundTrips) {
  ASSERT_EQ(run({"write-coco", "-a", kE2e, "-o", path("copy.json")}).code, 0);
  EXPECT_EQ(load_coco(path("copy.json")).dataset, load_coco(kE2e).dataset);
}

TEST_F(CliTest, LossAndRecEval) {
  write_file(path("q.json"), R"({"num_tokens": 5,
    "category_tokens": {"apple": [0], "orange": [1], "lemon": [2], "grapefruit": [3], "tangerine": [4]},
    "queries": []})");
  const CliRun loss = run({"loss", "-a", kE2e, "--queries", path("q.json"), "--w-l1", "5"});
  ASSERT_EQ(loss.code, 0) << loss.err;
  const auto lj = nlohmann::json::parse(loss.out);
  EXPECT_EQ(lj["weights"]["l1"], 5.0);
  EXPECT_EQ(lj["aggregate"]["total"], 0.0);

  write_file(path("f.json"), R"({"apple": {"category": "apple"}})");
  write_file(path("p.json"), R"([{"image_id": 1, "category_id": 1, "bbox": [0,0,1,1], "score": 0.5,
                                  "prompt": "pear"}])");
  const CliRun bad = run({"rec-eval", "-a", kE2e, "-p", path("p.json"), "--filters", path("f.json")});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("unknown prompt"), std::string::npos);
  write_file(path("p.json"), "[]");
  const CliRun ok = run({"rec-eval", "-a", kE2e, "-p", path("p.json"), "--filters", path("f.json"),
                      "--format", "markdown"});
  EXPECT_EQ(ok.code, 0) << ok.err;
  EXPECT_NE(ok.out.find("Prompt: apple"), std::string::npos);
}

}  // namespace
}  // namespace fruitbench
