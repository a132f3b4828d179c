#pragma once

// Retrieval evaluation over precomputed score matrices.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "fgbench/dataset.hpp"
#include "fgbench/error.hpp"
#include "fgbench/parallel.hpp"
#include "fgbench/similarity.hpp"

namespace fgbench {

enum class Task { kT2I, kI2T };

inline const char* to_string(Task t) { return t == Task::kT2I ? "t2i" : "i2t"; }

inline Task parse_task(const std::string& s) {
  if (s == "t2i") return Task::kT2I;
  if (s == "i2t") return Task::kI2T;
  throw Error(ErrorCode::kInvalidArgument, "unknown task \"" + s + "\" (expected t2i or i2t)");
}

using GroundTruth = std::map<std::string, std::set<std::string>>;

struct RetrievalReport {
  Task task = Task::kT2I;
  std::string pool_label;
  std::size_t n_queries = 0;
  std::size_t pool_size = 0;
  std::map<std::size_t, double> recalls;  // K -> percentage

  bool operator==(const RetrievalReport&) const = default;
};

inline const std::vector<std::size_t>& default_ks() {
  static const std::vector<std::size_t> ks = {1, 5, 10};
  return ks;
}

inline double round2(double v) { return std::round(v * 100.0) / 100.0; }

namespace detail {

// Best engine rank (1-based) among the truth columns of a row.
inline std::size_t best_truth_rank(std::span<const float> row, const std::vector<std::size_t>& truth_cols) {
  std::size_t best = row.size() + 1;
  for (std::size_t c : truth_cols) best = std::min(best, engine_rank(row, c));
  return best;
}

inline std::vector<std::size_t> truth_columns(const std::string& query, const GroundTruth& truth,
                                              const IdIndex& columns) {
  auto it = truth.find(query);
  if (it == truth.end() || it->second.empty()) {
    throw Error(ErrorCode::kUnknownId, "query \"" + query + "\" has no ground truth", {query});
  }
  std::vector<std::size_t> cols;
  for (const auto& id : it->second) {
    auto c = columns.find(id);
    if (!c) {
      throw Error(ErrorCode::kUnknownId, "ground truth \"" + id + "\" of query \"" + query + "\" is not a candidate",
                  {id});
    }
    cols.push_back(*c);
  }
  return cols;
}

inline std::map<std::size_t, double> recalls_from_ranks(const std::vector<std::size_t>& ranks,
                                                        const std::vector<std::size_t>& ks) {
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    const auto hits = std::count_if(ranks.begin(), ranks.end(), [k](std::size_t r) { return r <= k; });
    out[k] = ranks.empty() ? 0.0 : 100.0 * static_cast<double>(hits) / static_cast<double>(ranks.size());
  }
  return out;
}

}  // namespace detail

// A query hits at K when any of its truth candidates is in its top K under
// the engine order (score desc, column asc).
inline RetrievalReport recall_at_k(const ScoreMatrix& scores, const GroundTruth& truth,
                                   const std::vector<std::size_t>& ks = default_ks(), Task task = Task::kT2I,
                                   std::string pool_label = "full", std::size_t threads = 1) {
  IdIndex columns(scores.candidate_ids);
  std::vector<std::size_t> ranks(scores.rows());
  parallel_for(scores.rows(), threads, [&](std::size_t i) {
    ranks[i] = detail::best_truth_rank(scores.row(i), detail::truth_columns(scores.query_ids[i], truth, columns));
  });
  RetrievalReport r;
  r.task = task;
  r.pool_label = std::move(pool_label);
  r.n_queries = scores.rows();
  r.pool_size = scores.cols();
  r.recalls = detail::recalls_from_ranks(ranks, ks);
  return r;
}

// Column subset, kept in the original column order.
inline ScoreMatrix restrict_candidates(const ScoreMatrix& scores, const std::vector<std::string>& keep) {
  IdIndex columns(scores.candidate_ids);
  std::vector<std::size_t> cols;
  cols.reserve(keep.size());
  for (const auto& id : keep) {
    auto c = columns.find(id);
    if (!c) throw Error(ErrorCode::kUnknownId, "\"" + id + "\" is not a candidate column", {id});
    cols.push_back(*c);
  }
  std::sort(cols.begin(), cols.end());
  cols.erase(std::unique(cols.begin(), cols.end()), cols.end());
  ScoreMatrix out;
  out.query_ids = scores.query_ids;
  for (std::size_t c : cols) out.candidate_ids.push_back(scores.candidate_ids[c]);
  out.scores.reserve(out.rows() * cols.size());
  for (std::size_t i = 0; i < scores.rows(); ++i) {
    auto row = scores.row(i);
    for (std::size_t c : cols) out.scores.push_back(row[c]);
  }
  return out;
}

inline ScoreMatrix restrict_queries(const ScoreMatrix& scores, const std::vector<std::string>& keep) {
  IdIndex rows(scores.query_ids);
  ScoreMatrix out;
  out.candidate_ids = scores.candidate_ids;
  for (const auto& id : keep) {
    auto r = rows.find(id);
    if (!r) throw Error(ErrorCode::kUnknownId, "\"" + id + "\" is not a query row", {id});
    out.query_ids.push_back(id);
    auto row = scores.row(*r);
    out.scores.insert(out.scores.end(), row.begin(), row.end());
  }
  return out;
}

struct ReportPair {
  RetrievalReport first;
  RetrievalReport second;
};

// Original setting: the sampled queries against the whole pool. Similar
// setting: each query against its own candidate list, averaged over queries.
inline ReportPair mini_test(const ScoreMatrix& scores_full, const GroundTruth& truth,
                            const std::map<std::string, std::vector<std::string>>& similar_sets,
                            const std::vector<std::string>& sample, const std::vector<std::size_t>& ks = default_ks(),
                            std::size_t list_size = 100) {
  ScoreMatrix sampled = restrict_queries(scores_full, sample);
  ReportPair out;
  out.first = recall_at_k(sampled, truth, ks, Task::kT2I, "mini-test(original)");

  IdIndex columns(scores_full.candidate_ids);
  std::vector<std::size_t> ranks;
  for (std::size_t i = 0; i < sampled.rows(); ++i) {
    const auto& q = sampled.query_ids[i];
    auto it = similar_sets.find(q);
    if (it == similar_sets.end()) throw Error(ErrorCode::kUnknownId, "no similar list for query \"" + q + "\"", {q});
    if (it->second.size() != list_size) {
      throw Error(ErrorCode::kSizeMismatch, "similar list of query \"" + q + "\" has " +
                                                std::to_string(it->second.size()) + " candidates, expected " +
                                                std::to_string(list_size),
                  {q});
    }
    const auto& t = truth.at(q);
    if (std::none_of(it->second.begin(), it->second.end(), [&](const std::string& id) { return t.count(id) > 0; })) {
      throw Error(ErrorCode::kUnknownId, "target of query \"" + q + "\" is missing from its similar list", {q});
    }
    ScoreMatrix one = restrict_candidates(restrict_queries(sampled, {q}), it->second);
    ranks.push_back(detail::best_truth_rank(one.row(0), detail::truth_columns(q, truth, IdIndex(one.candidate_ids))));
  }
  out.second.task = Task::kT2I;
  out.second.pool_label = "mini-test(similar)";
  out.second.n_queries = ranks.size();
  out.second.pool_size = list_size;
  out.second.recalls = detail::recalls_from_ranks(ranks, ks);
  return out;
}

// Same metric under two equal-size candidate restrictions.
inline ReportPair compare_pools(const ScoreMatrix& scores, const GroundTruth& truth,
                                const std::vector<std::string>& pool_a, const std::vector<std::string>& pool_b,
                                const std::vector<std::size_t>& ks = default_ks(), Task task = Task::kT2I,
                                const std::string& label_a = "pool_a", const std::string& label_b = "pool_b") {
  if (pool_a.size() != pool_b.size()) {
    throw Error(ErrorCode::kSizeMismatch, "pool sizes differ: " + std::to_string(pool_a.size()) + " vs " +
                                              std::to_string(pool_b.size()));
  }
  return {recall_at_k(restrict_candidates(scores, pool_a), truth, ks, task, label_a),
          recall_at_k(restrict_candidates(scores, pool_b), truth, ks, task, label_b)};
}

struct PairScore {
  std::string image_id;
  double score_correct = 0.0;
  double score_wrong = 0.0;
};

// Percentage of pairs where the correct text strictly beats the wrong one.
inline double pair_match_accuracy(const std::vector<PairScore>& pairs) {
  if (pairs.empty()) throw Error(ErrorCode::kInvalidArgument, "pair matching needs at least one pair");
  const auto wins = std::count_if(pairs.begin(), pairs.end(),
                                  [](const PairScore& p) { return p.score_correct > p.score_wrong; });
  return 100.0 * static_cast<double>(wins) / static_cast<double>(pairs.size());
}

struct TextStats {
  std::size_t n_texts = 0;
  std::size_t total_nouns = 0;
  std::size_t total_adjs = 0;
  double avg_nouns = 0.0;
  double avg_adjs = 0.0;
  double avg_length = 0.0;
  std::size_t total_length = 0;
};

inline TextStats text_stats(const std::vector<CaptionRecord>& captions) {
  TextStats s;
  s.n_texts = captions.size();
  for (const auto& c : captions) {
    std::size_t len = c.tokens.size();
    while (len > 0 && c.tokens[len - 1].pos == "PUNCT") --len;
    s.total_length += len;
    for (const auto& t : c.tokens) {
      if (t.pos == "NOUN" || t.pos == "PROPN") ++s.total_nouns;
      if (t.pos == "ADJ") ++s.total_adjs;
    }
  }
  if (s.n_texts > 0) {
    const auto n = static_cast<double>(s.n_texts);
    s.avg_nouns = static_cast<double>(s.total_nouns) / n;
    s.avg_adjs = static_cast<double>(s.total_adjs) / n;
    s.avg_length = static_cast<double>(s.total_length) / n;
  }
  return s;
}

// Percentages and averages are written with two decimals.
inline Json to_json(const RetrievalReport& r) {
  Json recalls = Json::object();
  for (const auto& [k, v] : r.recalls) recalls[std::to_string(k)] = round2(v);
  return Json{{"task", to_string(r.task)},
              {"pool_label", r.pool_label},
              {"n_queries", r.n_queries},
              {"pool_size", r.pool_size},
              {"recalls", std::move(recalls)}};
}

inline Json to_json(const TextStats& s) {
  return Json{{"n_texts", s.n_texts},         {"total_nouns", s.total_nouns},
              {"total_adjs", s.total_adjs},   {"avg_nouns", round2(s.avg_nouns)},
              {"avg_adjs", round2(s.avg_adjs)}, {"avg_length", round2(s.avg_length)}};
}

// Accepts {"q": "c"} or {"q": ["c1", "c2"]}.
inline GroundTruth ground_truth_from_json(const Json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kParse, "ground truth must be a JSON object");
  GroundTruth truth;
  for (const auto& [q, v] : j.items()) {
    if (v.is_string()) {
      truth[q].insert(v.get<std::string>());
    } else if (v.is_array()) {
      for (const auto& c : v) {
        if (!c.is_string()) throw Error(ErrorCode::kParse, "ground truth of \"" + q + "\" must hold strings");
        truth[q].insert(c.get<std::string>());
      }
    } else {
      throw Error(ErrorCode::kParse, "ground truth of \"" + q + "\" must be a string or array");
    }
  }
  return truth;
}

// T2I: caption -> its image. I2T: image -> its current captions.
inline GroundTruth ground_truth_from_captions(const std::vector<CaptionRecord>& captions, Task task) {
  GroundTruth truth;
  for (const auto& c : captions) {
    if (task == Task::kT2I) {
      truth[c.caption_id].insert(c.image_id);
    } else {
      truth[c.image_id].insert(c.caption_id);
    }
  }
  return truth;
}

}  // namespace fgbench
