#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli_pipeline.hpp"

using namespace fgbench;
using fgtest::run_cli;
using fgtest::TempDir;

namespace {

std::string read(const std::filesystem::path& p) { return detail::read_file(p); }

}  // namespace

TEST(Cli, FullPipelineSucceeds) {
  TempDir dir("cli-pipeline");
  const auto run = fgtest::run_pipeline(dir.path());
  EXPECT_TRUE(run.failures.empty()) << ::testing::PrintToString(run.failures);

  const auto validate = detail::parse_json(run.outputs.at("validate.json"), "validate");
  EXPECT_EQ(validate["ok"], true);
  EXPECT_TRUE(validate["issues"].empty());

  const auto pools = detail::parse_json(run.outputs.at("pools.json"), "pools");
  ASSERT_EQ(pools["targets"].size(), 10u);
  for (const auto& t : pools["targets"]) {
    EXPECT_EQ(t["member_ids"].size(), 10u);
    EXPECT_EQ(t["member_ids"][0], t["target_id"]);
  }

  const auto report = detail::parse_json(run.outputs.at("report.json"), "report");
  EXPECT_EQ(report["n_queries"], 50);
  EXPECT_EQ(report["pool_size"], 51);  // 11 manifest images + 40 auxiliary
  for (const char* k : {"1", "5", "10"}) EXPECT_TRUE(report["recalls"].contains(k));

  const auto pairs = detail::parse_json(run.outputs.at("pairs_eval.json"), "pairs");
  EXPECT_EQ(pairs["accuracy"], 70.0);

  // Both detect-coarse entry points agree.
  EXPECT_EQ(run.outputs.at("coarse.jsonl"), run.outputs.at("coarse2.jsonl"));
  // Every queue item got resolved into the final captions file.
  EXPECT_FALSE(run.outputs.at("final_captions.jsonl").empty());
}

TEST(Cli, SameSeedIsByteIdenticalAcrossRunsAndWorkers) {
  TempDir a("cli-det-a"), b("cli-det-b");
  const auto r1 = fgtest::run_pipeline(a.path(), "7", "1");
  const auto r2 = fgtest::run_pipeline(b.path(), "7", "4");
  ASSERT_TRUE(r1.failures.empty());
  ASSERT_TRUE(r2.failures.empty());
  ASSERT_EQ(r1.outputs.size(), r2.outputs.size());
  for (const auto& [name, bytes] : r1.outputs) {
    EXPECT_EQ(bytes, r2.outputs.at(name)) << name;
  }
}

TEST(Cli, BuildPoolIdenticalForOneFourEightThreads) {
  TempDir dir("cli-threads");
  fgtest::write_cli_dataset(dir.path(), 300);
  const auto m = (dir / "manifest.json").string();
  ASSERT_EQ(run_cli({"mock-embed", "--manifest", m, "--dim", "16", "--out-images", (dir / "images.fge1").string(),
                     "--out-texts", (dir / "texts.fge1").string()},
                    dir / "err"),
            0);
  std::string first;
  for (const char* t : {"1", "4", "8"}) {
    const auto out = dir / (std::string("pools-") + t + ".json");
    ASSERT_EQ(run_cli({"build-pool", "--manifest", m, "--aux", (dir / "aux.fge1").string(), "--threads", t, "--out",
                       out.string()},
                      dir / "err"),
              0)
        << read(dir / "err");
    if (first.empty()) {
      first = read(out);
    } else {
      EXPECT_EQ(read(out), first) << t;
    }
  }
}

TEST(Cli, SeedFallsBackToEnvironment) {
  TempDir dir("cli-env");
  fgtest::write_cli_dataset(dir.path());
  const auto m = (dir / "manifest.json").string();
  auto embed = [&](const std::string& tag, const std::vector<std::string>& extra, const std::string& env) {
    std::vector<std::string> args = {"mock-embed", "--manifest", m, "--dim", "8", "--out-images",
                                     (dir / (tag + ".fge1")).string(), "--out-texts",
                                     (dir / (tag + "-t.fge1")).string()};
    args.insert(args.end(), extra.begin(), extra.end());
    EXPECT_EQ(run_cli(args, dir / "err", {}, env), 0) << read(dir / "err");
    return read(dir / (tag + ".fge1"));
  };
  const auto flag5 = embed("flag5", {"--seed", "5"}, "");
  const auto env5 = embed("env5", {}, "FGBENCH_SEED=5");
  const auto flag6 = embed("flag6", {"--seed", "6"}, "FGBENCH_SEED=5");
  EXPECT_EQ(flag5, env5);
  EXPECT_NE(flag5, flag6);
  EXPECT_EQ(run_cli({"mock-embed", "--manifest", m, "--out-images", (dir / "x").string(), "--out-texts",
                     (dir / "y").string()},
                    dir / "err", {}, "FGBENCH_SEED=notanumber"),
            1);
}

TEST(Cli, UsageErrorsExitTwo) {
  TempDir dir("cli-usage");
  EXPECT_EQ(run_cli({"no-such-command"}, dir / "err"), 2);
  EXPECT_NE(read(dir / "err").find("Usage"), std::string::npos);
  EXPECT_EQ(run_cli({}, dir / "err"), 2);
  EXPECT_EQ(run_cli({"build-pool"}, dir / "err"), 2);
  EXPECT_EQ(run_cli({"evaluate", "--scores", "x", "--ks", "5,1"}, dir / "err"), 2);
  EXPECT_EQ(run_cli({"validate"}, dir / "err"), 2);
  EXPECT_EQ(run_cli({"review"}, dir / "err"), 2);
  EXPECT_EQ(run_cli({"--help"}, dir / "err"), 0);
}

TEST(Cli, ValidationFailuresExitOne) {
  TempDir dir("cli-validate");
  fgtest::write_cli_dataset(dir.path());
  const auto m = (dir / "manifest.json").string();
  // Embeddings missing entirely: issues reported, exit 1.
  EXPECT_EQ(run_cli({"validate", "--manifest", m}, dir / "err", dir / "out.json"), 1);
  const auto report = detail::parse_json(read(dir / "out.json"), "report");
  EXPECT_EQ(report["ok"], false);
  EXPECT_FALSE(report["issues"].empty());

  detail::write_file(dir / "bad.jsonl", "{\"caption_id\": \"c\"}\n");
  EXPECT_EQ(run_cli({"validate", "--kind", "clipscores", "--file", (dir / "bad.jsonl").string()}, dir / "err"), 1);
  EXPECT_EQ(run_cli({"validate", "--embeddings", (dir / "aux.fge1").string()}, dir / "err"), 0);
  EXPECT_EQ(run_cli({"validate", "--captions", (dir / "captions.jsonl").string()}, dir / "err"), 0);
  EXPECT_EQ(run_cli({"stats", "--captions", (dir / "missing.jsonl").string()}, dir / "err"), 1);
}

TEST(Cli, ReviewApplyRefusesPendingItems) {
  TempDir dir("cli-review");
  const auto run = fgtest::run_pipeline(dir.path());
  ASSERT_TRUE(run.failures.empty());
  EXPECT_EQ(run_cli({"review", "apply", "--queue", (dir / "queue.jsonl").string(), "--captions",
                     (dir / "captions.jsonl").string(), "--out", (dir / "f.jsonl").string()},
                    dir / "err"),
            1);
  EXPECT_NE(read(dir / "err").find("unresolved"), std::string::npos);
}

TEST(Cli, BuildPoolRejectsExcludedAuxiliary) {
  TempDir dir("cli-excluded");
  fgtest::write_cli_dataset(dir.path());
  const auto m = (dir / "manifest.json").string();
  ASSERT_EQ(run_cli({"mock-embed", "--manifest", m, "--dim", "16", "--out-images", (dir / "images.fge1").string(),
                     "--out-texts", (dir / "texts.fge1").string()},
                    dir / "err"),
            0);
  auto aux = load_embeddings(dir / "aux.fge1");
  aux.ids[3] = "excluded-1";
  write_embeddings(aux, dir / "aux.fge1");
  EXPECT_EQ(run_cli({"build-pool", "--manifest", m, "--aux", (dir / "aux.fge1").string(), "--out",
                     (dir / "pools.json").string()},
                    dir / "err"),
            1);
  EXPECT_NE(read(dir / "err").find("excluded-1"), std::string::npos);
}
