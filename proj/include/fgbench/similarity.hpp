#pragma once

// Exact dense cosine similarity and top-k selection.
//
// Ordering everywhere is score descending, then source column ascending.
// All accumulation happens in double within a single row, so results do not
// depend on how rows are distributed over worker threads.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fgbench/dataset.hpp"
#include "fgbench/error.hpp"
#include "fgbench/parallel.hpp"

namespace fgbench {

struct RankedEntry {
  std::string candidate_id;
  std::size_t index = 0;  // column in the source score row / pool
  float score = 0.0f;

  bool operator==(const RankedEntry&) const = default;
};

struct RankedList {
  std::string query_id;
  std::size_t k = 0;
  std::vector<RankedEntry> entries;

  bool operator==(const RankedList&) const = default;
};

// Strict total order used by every ranking in the library.
inline bool ranks_before(std::span<const float> row, std::size_t a, std::size_t b) {
  return row[a] > row[b] || (row[a] == row[b] && a < b);
}

inline double dot(std::span<const float> a, std::span<const float> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += static_cast<double>(a[i]) * static_cast<double>(b[i]);
  return acc;
}

inline double norm(std::span<const float> a) { return std::sqrt(dot(a, a)); }

inline EmbeddingMatrix l2_normalize(EmbeddingMatrix m) {
  for (std::size_t r = 0; r < m.rows; ++r) {
    auto row = m.row(r);
    const double n = norm(row);
    if (n == 0.0) {
      throw Error(ErrorCode::kZeroRow, "cannot normalize all-zero row \"" + m.ids[r] + "\"", {m.ids[r]});
    }
    for (float& v : row) v = static_cast<float>(static_cast<double>(v) / n);
  }
  return m;
}

// Full cosine matrix: scores[i][j] = <q_i, c_j> / (|q_i| |c_j|).
inline ScoreMatrix cosine_scores(const EmbeddingMatrix& queries, const EmbeddingMatrix& candidates,
                                 std::size_t threads = 1) {
  if (queries.dim != candidates.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "query dim " + std::to_string(queries.dim) +
                                                   " ≠ candidate dim " + std::to_string(candidates.dim));
  }
  auto norms_of = [](const EmbeddingMatrix& m) {
    std::vector<double> norms(m.rows);
    for (std::size_t r = 0; r < m.rows; ++r) {
      norms[r] = norm(m.row(r));
      if (norms[r] == 0.0) {
        throw Error(ErrorCode::kZeroRow, "all-zero embedding row \"" + m.ids[r] + "\"", {m.ids[r]});
      }
    }
    return norms;
  };
  const std::vector<double> qn = norms_of(queries);
  const std::vector<double> cn = norms_of(candidates);

  ScoreMatrix out;
  out.query_ids = queries.ids;
  out.candidate_ids = candidates.ids;
  out.scores.resize(queries.rows * candidates.rows);
  parallel_for(queries.rows, threads, [&](std::size_t i) {
    auto q = queries.row(i);
    float* dst = out.scores.data() + i * candidates.rows;
    for (std::size_t j = 0; j < candidates.rows; ++j) {
      dst[j] = static_cast<float>(dot(q, candidates.row(j)) / (qn[i] * cn[j]));
    }
  });
  return out;
}

// Indices of the best `k` columns of `row`, best first. `exclude`, when set,
// is skipped entirely.
inline std::vector<std::size_t> topk_indices(std::span<const float> row, std::size_t k,
                                             std::optional<std::size_t> exclude = std::nullopt) {
  std::vector<std::size_t> idx;
  idx.reserve(row.size());
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!exclude || *exclude != j) idx.push_back(j);
  }
  const std::size_t take = std::min(k, idx.size());
  auto cmp = [&](std::size_t a, std::size_t b) { return ranks_before(row, a, b); };
  if (take < idx.size()) {
    std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(take), idx.end(), cmp);
    idx.resize(take);
  }
  std::sort(idx.begin(), idx.end(), cmp);
  return idx;
}

inline RankedList make_ranked_list(std::string query_id, std::span<const float> row,
                                   const std::vector<std::string>& candidate_ids, std::size_t k,
                                   std::optional<std::size_t> exclude = std::nullopt) {
  RankedList list;
  list.query_id = std::move(query_id);
  list.k = k;
  for (std::size_t j : topk_indices(row, k, exclude)) {
    list.entries.push_back({candidate_ids[j], j, row[j]});
  }
  return list;
}

inline std::vector<RankedList> topk(const ScoreMatrix& scores, std::size_t k, std::size_t threads = 1) {
  if (k < 1) throw Error(ErrorCode::kInvalidArgument, "top-k requires k >= 1");
  std::vector<RankedList> out(scores.rows());
  parallel_for(scores.rows(), threads, [&](std::size_t i) {
    out[i] = make_ranked_list(scores.query_ids[i], scores.row(i), scores.candidate_ids, k);
  });
  return out;
}

// Pessimistic 1-based rank: every other candidate scoring >= the target
// counts as ahead of it.
inline std::size_t rank_of_target(std::span<const float> row, std::size_t target_index) {
  if (target_index >= row.size()) {
    throw Error(ErrorCode::kInvalidArgument, "target index " + std::to_string(target_index) +
                                                 " out of range for row of " + std::to_string(row.size()));
  }
  const float t = row[target_index];
  std::size_t rank = 1;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != target_index && row[j] >= t) ++rank;
  }
  return rank;
}

// 1-based position of `index` under the engine order (ties by column).
inline std::size_t engine_rank(std::span<const float> row, std::size_t index) {
  std::size_t rank = 1;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (j != index && ranks_before(row, j, index)) ++rank;
  }
  return rank;
}

inline Json to_json(const RankedList& list) {
  Json entries = Json::array();
  for (const auto& e : list.entries) {
    entries.push_back(Json{{"candidate_id", e.candidate_id}, {"score", e.score}});
  }
  return Json{{"query_id", list.query_id}, {"k", list.k}, {"entries", std::move(entries)}};
}

}  // namespace fgbench
