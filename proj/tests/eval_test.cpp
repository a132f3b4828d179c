#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "support.hpp"

using namespace fgbench;

namespace {

// One query per row; the target of row i is candidate truth_col[i].
GroundTruth diagonal_truth(const ScoreMatrix& s, const std::vector<std::size_t>& truth_col) {
  GroundTruth t;
  for (std::size_t i = 0; i < s.rows(); ++i) t[s.query_ids[i]] = {s.candidate_ids[truth_col[i]]};
  return t;
}

// Row whose target lands at exactly `rank` among `cols` candidates.
std::vector<float> row_with_target_at(std::size_t rank, std::size_t cols, std::size_t target) {
  std::vector<float> row(cols);
  std::size_t next = 1;
  for (std::size_t j = 0; j < cols; ++j) {
    if (j == target) continue;
    row[j] = static_cast<float>(cols - (next >= rank ? next + 1 : next));
    ++next;
  }
  row[target] = static_cast<float>(cols - rank);
  return row;
}

}  // namespace

TEST(Recall, TargetsAtRanksOneFourTwenty) {
  ScoreMatrix s;
  s.query_ids = {"q1", "q2", "q3"};
  for (int j = 0; j < 30; ++j) s.candidate_ids.push_back("c" + std::to_string(j));
  for (std::size_t rank : {1u, 4u, 20u}) {
    const auto row = row_with_target_at(rank, 30, 0);
    s.scores.insert(s.scores.end(), row.begin(), row.end());
  }
  const auto truth = diagonal_truth(s, {0, 0, 0});
  for (std::size_t i = 0; i < 3; ++i) {
    EXPECT_EQ(engine_rank(s.row(i), 0), std::vector<std::size_t>({1, 4, 20})[i]);
  }
  const auto r = recall_at_k(s, truth);
  EXPECT_NEAR(r.recalls.at(1), 100.0 / 3, 1e-9);
  EXPECT_NEAR(r.recalls.at(5), 200.0 / 3, 1e-9);
  EXPECT_NEAR(r.recalls.at(10), 200.0 / 3, 1e-9);
  const auto j = to_json(r);
  EXPECT_EQ(j["recalls"]["1"].get<double>(), 33.33);
  EXPECT_EQ(j["recalls"]["5"].get<double>(), 66.67);
  EXPECT_EQ(j["n_queries"], 3);
  EXPECT_EQ(j["pool_size"], 30);
  EXPECT_EQ(j["task"], "t2i");
}

TEST(Recall, PerfectRankingIsHundred) {
  ScoreMatrix s;
  s.query_ids = {"a", "b"};
  s.candidate_ids = {"x", "y"};
  s.scores = {1, 0, 0, 1};
  const auto r = recall_at_k(s, diagonal_truth(s, {0, 1}));
  for (const auto& [k, v] : r.recalls) EXPECT_EQ(v, 100.0) << k;
}

TEST(Recall, ImageToTextAnyCaptionCounts) {
  ScoreMatrix s;
  s.query_ids = {"img"};
  s.candidate_ids = {"c1", "c2", "other"};
  s.scores = {0.1f, 0.8f, 0.9f};
  GroundTruth t = {{"img", {"c1", "c2"}}};
  const auto r = recall_at_k(s, t, {1, 2}, Task::kI2T);
  EXPECT_EQ(r.recalls.at(1), 0.0);
  EXPECT_EQ(r.recalls.at(2), 100.0);
}

TEST(Recall, MissingTruthIsAnError) {
  ScoreMatrix s;
  s.query_ids = {"q"};
  s.candidate_ids = {"c"};
  s.scores = {1};
  EXPECT_THROW(recall_at_k(s, {}), Error);
  EXPECT_THROW(recall_at_k(s, {{"q", {"ghost"}}}), Error);
}

TEST(Recall, MatchesMembershipOracleAndIsMonotone) {
  const std::vector<std::size_t> ks = {1, 2, 5, 10, 50};
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    const auto s = synthetic::random_score_matrix(60, 200, seed, seed % 2 ? 20 : 0);
    std::vector<std::size_t> cols(s.rows());
    for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = (i * 7 + seed) % s.cols();
    const auto truth = diagonal_truth(s, cols);
    const auto r = recall_at_k(s, truth, ks, Task::kT2I, "x", 3);
    EXPECT_EQ(r.recalls, fgtest::membership_recall(s, truth, ks));
    double prev = 0;
    for (const auto& [k, v] : r.recalls) {
      EXPECT_GE(v, prev);
      prev = v;
    }
  }
}

TEST(Recall, MonotoneTransformInvariance) {
  const auto s = synthetic::random_score_matrix(30, 80, 5, 12);
  std::vector<std::size_t> cols(s.rows());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  const auto truth = diagonal_truth(s, cols);
  auto t = s;
  for (float& v : t.scores) v = 3.0f * v + 1.0f;
  EXPECT_EQ(recall_at_k(s, truth).recalls, recall_at_k(t, truth).recalls);
}

TEST(Recall, RemovingNonTruthCandidatesNeverLowersRecall) {
  const auto s = synthetic::random_score_matrix(40, 120, 17, 0);
  std::vector<std::size_t> cols(s.rows());
  for (std::size_t i = 0; i < cols.size(); ++i) cols[i] = i;
  const auto truth = diagonal_truth(s, cols);
  std::vector<std::string> keep(s.candidate_ids.begin(), s.candidate_ids.begin() + 40);
  for (std::size_t j = 40; j < s.cols(); j += 3) keep.push_back(s.candidate_ids[j]);
  const auto full = recall_at_k(s, truth);
  const auto shrunk = recall_at_k(restrict_candidates(s, keep), truth);
  for (const auto& [k, v] : full.recalls) EXPECT_GE(shrunk.recalls.at(k), v);
}

TEST(Restrict, KeepsColumnOrderAndRejectsUnknown) {
  const auto s = synthetic::random_score_matrix(2, 5, 1);
  const auto r = restrict_candidates(s, {"c4", "c1"});
  EXPECT_EQ(r.candidate_ids, (std::vector<std::string>{"c1", "c4"}));
  EXPECT_EQ(r.row(1)[1], s.row(1)[4]);
  EXPECT_THROW(restrict_candidates(s, {"zz"}), Error);
  EXPECT_THROW(restrict_queries(s, {"zz"}), Error);
}

TEST(ComparePools, IdenticalAndRankPreservingSwap) {
  ScoreMatrix s;
  s.query_ids = {"q1", "q2"};
  s.candidate_ids = {"t1", "t2", "a", "b", "low"};
  s.scores = {0.9f, 0.1f, 0.5f, 0.2f, -0.5f,  //
              0.2f, 0.6f, 0.7f, 0.1f, -0.5f};
  GroundTruth truth = {{"q1", {"t1"}}, {"q2", {"t2"}}};
  const std::vector<std::string> a = {"t1", "t2", "a", "b"};
  const auto same = compare_pools(s, truth, a, a);
  EXPECT_EQ(same.first.recalls, same.second.recalls);
  // "b" sits below both targets; swapping it for "low" keeps every rank.
  const auto swapped = compare_pools(s, truth, a, {"t1", "t2", "a", "low"});
  EXPECT_EQ(swapped.first.recalls, swapped.second.recalls);
  EXPECT_THROW(compare_pools(s, truth, a, {"t1"}), Error);
}

TEST(MiniTest, ExactScorerGivesHundredInBothSettings) {
  synthetic::PlantedConfig cfg;
  cfg.targets = 10;
  cfg.distractors = 200;
  cfg.seed = 2;
  const auto f = synthetic::planted_cluster_fixture(cfg);
  const auto pool = prepare_candidates(f.manifest, f.image_embeddings, f.auxiliary);
  const auto queries = synthetic::noisy_queries(f, 0.0, 1);
  const auto scores = cosine_scores(queries, pool.embeddings);
  GroundTruth truth;
  std::map<std::string, std::vector<std::string>> similar;
  std::vector<std::string> sample;
  for (std::size_t t = 0; t < f.image_embeddings.rows; ++t) {
    const auto& tid = f.image_embeddings.ids[t];
    const auto& qid = queries.ids[t];
    truth[qid] = {tid};
    sample.push_back(qid);
    const auto list = image_similar_set(tid, pool, 19);
    similar[qid] = {tid};
    for (const auto& e : list.entries) similar[qid].push_back(e.candidate_id);
  }
  const auto pair = mini_test(scores, truth, similar, sample, default_ks(), 20);
  EXPECT_EQ(pair.first.recalls.at(1), 100.0);
  EXPECT_EQ(pair.second.recalls.at(1), 100.0);
  EXPECT_EQ(pair.second.pool_size, 20u);

  similar.begin()->second.pop_back();
  EXPECT_THROW(mini_test(scores, truth, similar, sample, default_ks(), 20), Error);
}

TEST(PairMatching, Counts) {
  std::vector<PairScore> pairs;
  for (int i = 0; i < 10; ++i) pairs.push_back({"i" + std::to_string(i), i < 7 ? 0.5 : 0.2, 0.3});
  EXPECT_DOUBLE_EQ(pair_match_accuracy(pairs), 70.0);
  for (auto& p : pairs) p.score_wrong = p.score_correct;
  EXPECT_DOUBLE_EQ(pair_match_accuracy(pairs), 0.0);
  for (auto& p : pairs) p.score_correct = p.score_wrong + 1;
  EXPECT_DOUBLE_EQ(pair_match_accuracy(pairs), 100.0);
  EXPECT_THROW(pair_match_accuracy({}), Error);
}

TEST(TextStats, RedCarAndEmpty) {
  const auto s = text_stats({fgtest::red_car()});
  EXPECT_EQ(s.total_nouns, 1u);
  EXPECT_EQ(s.total_adjs, 1u);
  EXPECT_DOUBLE_EQ(s.avg_length, 3.0);
  const auto empty = text_stats({});
  EXPECT_EQ(empty.n_texts, 0u);
  EXPECT_EQ(empty.avg_nouns, 0.0);
  EXPECT_EQ(empty.avg_length, 0.0);
}

TEST(TextStats, TwoDecimalSerialization) {
  TextStats s;
  s.n_texts = 3;
  s.avg_nouns = 3.5249;
  s.avg_length = 10.2251;
  const auto j = to_json(s);
  EXPECT_EQ(j["avg_nouns"].dump(), "3.52");
  EXPECT_EQ(j["avg_length"].dump(), "10.23");
}

TEST(GroundTruth, JsonShapesAndCaptions) {
  const auto t = ground_truth_from_json(Json::parse(R"({"q1": "a", "q2": ["b", "c"]})"));
  EXPECT_EQ(t.at("q1"), std::set<std::string>{"a"});
  EXPECT_EQ(t.at("q2").size(), 2u);
  EXPECT_THROW(ground_truth_from_json(Json::parse("[1]")), Error);
  EXPECT_THROW(ground_truth_from_json(Json::parse(R"({"q": 3})")), Error);

  const std::vector<CaptionRecord> caps = {{"c1", "i1", "x", {}}, {"c2", "i1", "y", {}}};
  EXPECT_EQ(ground_truth_from_captions(caps, Task::kT2I).at("c2"), std::set<std::string>{"i1"});
  EXPECT_EQ(ground_truth_from_captions(caps, Task::kI2T).at("i1").size(), 2u);
  EXPECT_EQ(parse_task("i2t"), Task::kI2T);
  EXPECT_THROW(parse_task("x"), Error);
}
