#pragma once

// Similar-image pool construction:
//   1. prepare_candidates   original pool + non-excluded auxiliary images
//   2. image_similar_set /  per-target rankings by image-image and
//      text_similar_set     caption-image cosine
//   3. fuse_similar_sets    reciprocal-rank fusion into a 10-image set
//   4. assemble_pool        deduplicated union of all sets

#include <algorithm>
#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <vector>

#include "fgbench/dataset.hpp"
#include "fgbench/error.hpp"
#include "fgbench/parallel.hpp"
#include "fgbench/similarity.hpp"

namespace fgbench {

inline constexpr std::size_t kSimilarSetSize = 10;

enum class ImageSource { kOriginal, kAuxiliary };

inline const char* to_string(ImageSource s) { return s == ImageSource::kOriginal ? "original" : "auxiliary"; }

struct CandidatePool {
  std::vector<std::string> ids;
  std::set<std::string> old_pool_ids;
  std::vector<ImageSource> source_tags;  // aligned with ids
  EmbeddingMatrix embeddings;            // L2-normalized, rows aligned with ids
  IdIndex index;
  std::vector<std::string> warnings;

  ImageSource source_of(const std::string& id) const {
    auto r = index.find(id);
    if (!r) throw Error(ErrorCode::kUnknownId, "\"" + id + "\" is not in the candidate pool", {id});
    return source_tags[*r];
  }
};

// L2-normalized matrix with an id lookup; used for caption embeddings.
struct IndexedEmbeddings {
  EmbeddingMatrix matrix;
  IdIndex index;

  explicit IndexedEmbeddings(EmbeddingMatrix m) : matrix(l2_normalize(std::move(m))), index(matrix.ids) {}
};

struct SimilarSet {
  std::string target_id;
  std::vector<std::string> member_ids;          // target first, then 9 by fusion score
  std::map<std::string, double> fusion_scores;  // non-target members

  bool operator==(const SimilarSet&) const = default;
};

struct NewPool {
  std::vector<std::string> ids;
  std::unordered_map<std::string, std::vector<std::string>> provenance;
};

struct PoolConfig {
  std::size_t k_prime = 30;
  std::size_t k_dprime = 30;
  int rrf_constant = 60;
  std::size_t threads = 1;
};

// `image_embeddings` must hold a row for every manifest image; extra rows are
// ignored. Auxiliary ids already in the original pool (or repeated) are dropped.
inline CandidatePool prepare_candidates(const Manifest& manifest, const EmbeddingMatrix& image_embeddings,
                                        const EmbeddingMatrix& auxiliary) {
  std::vector<std::string> excluded;
  for (const auto& id : auxiliary.ids) {
    if (manifest.exclusion_ids.count(id)) excluded.push_back(id);
  }
  if (!excluded.empty()) {
    throw Error(ErrorCode::kExclusionOverlap,
                "auxiliary images overlap the exclusion list: " + join_ids(excluded), excluded);
  }
  if (auxiliary.rows > 0 && auxiliary.dim != image_embeddings.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "auxiliary dim " + std::to_string(auxiliary.dim) +
                                                   " ≠ original dim " + std::to_string(image_embeddings.dim));
  }

  EmbeddingMatrix merged = select_rows(image_embeddings, manifest.image_ids);
  CandidatePool pool;
  pool.old_pool_ids.insert(manifest.image_ids.begin(), manifest.image_ids.end());
  pool.ids = manifest.image_ids;
  pool.source_tags.assign(pool.ids.size(), ImageSource::kOriginal);

  std::set<std::string> seen(pool.old_pool_ids);
  std::size_t aux_added = 0;
  for (std::size_t r = 0; r < auxiliary.rows; ++r) {
    const auto& id = auxiliary.ids[r];
    if (!seen.insert(id).second) continue;
    pool.ids.push_back(id);
    pool.source_tags.push_back(ImageSource::kAuxiliary);
    auto row = auxiliary.row(r);
    merged.values.insert(merged.values.end(), row.begin(), row.end());
    ++merged.rows;
    ++aux_added;
  }
  merged.ids = pool.ids;
  pool.embeddings = l2_normalize(std::move(merged));
  pool.index = IdIndex(pool.ids);
  if (aux_added < pool.old_pool_ids.size()) {
    pool.warnings.push_back("auxiliary source adds " + std::to_string(aux_added) +
                            " images, fewer than the original pool of " +
                            std::to_string(pool.old_pool_ids.size()));
  }
  return pool;
}

// Top-k' pool images by cosine to the target's own embedding, target excluded.
inline RankedList image_similar_set(const std::string& target_id, const CandidatePool& pool, std::size_t k_prime) {
  auto t = pool.index.find(target_id);
  if (!t) throw Error(ErrorCode::kUnknownId, "unknown target \"" + target_id + "\"", {target_id});
  const auto target_row = pool.embeddings.row(*t);
  std::vector<float> scores(pool.embeddings.rows);
  for (std::size_t j = 0; j < scores.size(); ++j) {
    scores[j] = static_cast<float>(dot(target_row, pool.embeddings.row(j)));
  }
  return make_ranked_list(target_id, scores, pool.ids, k_prime, *t);
}

// Top-k'' pool images by the max over the target's captions of the
// caption-image cosine, target excluded.
inline RankedList text_similar_set(const std::string& target_id, const std::vector<std::string>& caption_ids,
                                   const IndexedEmbeddings& texts, const CandidatePool& pool,
                                   std::size_t k_dprime) {
  auto t = pool.index.find(target_id);
  if (!t) throw Error(ErrorCode::kUnknownId, "unknown target \"" + target_id + "\"", {target_id});
  if (caption_ids.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "target \"" + target_id + "\" has no captions", {target_id});
  }
  if (texts.matrix.dim != pool.embeddings.dim) {
    throw Error(ErrorCode::kDimensionMismatch, "text dim " + std::to_string(texts.matrix.dim) +
                                                   " ≠ image dim " + std::to_string(pool.embeddings.dim));
  }
  std::vector<float> scores(pool.embeddings.rows, -std::numeric_limits<float>::infinity());
  for (const auto& cid : caption_ids) {
    auto r = texts.index.find(cid);
    if (!r) throw Error(ErrorCode::kUnknownId, "no text embedding for caption \"" + cid + "\"", {cid});
    const auto caption_row = texts.matrix.row(*r);
    for (std::size_t j = 0; j < scores.size(); ++j) {
      scores[j] = std::max(scores[j], static_cast<float>(dot(caption_row, pool.embeddings.row(j))));
    }
  }
  return make_ranked_list(target_id, scores, pool.ids, k_dprime, *t);
}

// Reciprocal-rank fusion: score(c) = sum over lists containing c of
// 1 / (rrf_constant + rank), rank 1-based. Highest nine join the target.
inline SimilarSet fuse_similar_sets(const RankedList& image_list, const RankedList& text_list,
                                    const std::string& target_id, int rrf_constant = 60) {
  struct Fused {
    std::string id;
    std::size_t index;
    double score;
  };
  std::vector<Fused> fused;
  std::unordered_map<std::string, std::size_t> slot;
  for (const RankedList* list : {&image_list, &text_list}) {
    for (std::size_t r = 0; r < list->entries.size(); ++r) {
      const auto& e = list->entries[r];
      if (e.candidate_id == target_id) continue;
      const double contribution = 1.0 / (rrf_constant + static_cast<double>(r + 1));
      auto [it, inserted] = slot.emplace(e.candidate_id, fused.size());
      if (inserted) {
        fused.push_back({e.candidate_id, e.index, contribution});
      } else {
        fused[it->second].score += contribution;
      }
    }
  }
  const std::size_t needed = kSimilarSetSize - 1;
  if (fused.size() < needed) {
    throw Error(ErrorCode::kInsufficientCandidates,
                "target \"" + target_id + "\": only " + std::to_string(fused.size()) +
                    " distinct candidates, need " + std::to_string(needed),
                {target_id});
  }
  std::sort(fused.begin(), fused.end(), [](const Fused& a, const Fused& b) {
    return a.score > b.score || (a.score == b.score && a.index < b.index);
  });
  SimilarSet set;
  set.target_id = target_id;
  set.member_ids.push_back(target_id);
  for (std::size_t i = 0; i < needed; ++i) {
    set.member_ids.push_back(fused[i].id);
    set.fusion_scores.emplace(fused[i].id, fused[i].score);
  }
  return set;
}

// Union of all sets in first-seen order, recording which targets
// contributed each image.
inline NewPool assemble_pool(const std::vector<SimilarSet>& sets) {
  NewPool pool;
  for (const auto& s : sets) {
    for (const auto& id : s.member_ids) {
      auto [it, inserted] = pool.provenance.try_emplace(id);
      if (inserted) pool.ids.push_back(id);
      it->second.push_back(s.target_id);
    }
  }
  return pool;
}

struct PoolBuildResult {
  std::vector<SimilarSet> sets;
  NewPool new_pool;
};

// Targets are the manifest images that have captions, in manifest order.
inline std::vector<std::string> pool_targets(const Manifest& manifest) {
  const auto by_image = manifest.captions_by_image();
  std::vector<std::string> targets;
  for (const auto& id : manifest.image_ids) {
    if (by_image.count(id)) targets.push_back(id);
  }
  return targets;
}

inline PoolBuildResult build_pools(const Manifest& manifest, const CandidatePool& pool,
                                   const IndexedEmbeddings& texts, const PoolConfig& config) {
  if (config.k_prime < 1 || config.k_dprime < 1) {
    throw Error(ErrorCode::kInvalidArgument, "k' and k'' must be >= 1");
  }
  const auto by_image = manifest.captions_by_image();
  const auto targets = pool_targets(manifest);
  PoolBuildResult result;
  result.sets.resize(targets.size());
  parallel_for(targets.size(), config.threads, [&](std::size_t i) {
    const auto& t = targets[i];
    auto by_image_list = image_similar_set(t, pool, config.k_prime);
    auto by_text_list = text_similar_set(t, by_image.at(t), texts, pool, config.k_dprime);
    result.sets[i] = fuse_similar_sets(by_image_list, by_text_list, t, config.rrf_constant);
  });
  result.new_pool = assemble_pool(result.sets);
  return result;
}

inline Json to_json(const PoolBuildResult& r) {
  Json targets = Json::array();
  for (const auto& s : r.sets) {
    Json scores = Json::object();
    for (std::size_t i = 1; i < s.member_ids.size(); ++i) {
      scores[s.member_ids[i]] = s.fusion_scores.at(s.member_ids[i]);
    }
    targets.push_back(Json{{"target_id", s.target_id}, {"member_ids", s.member_ids}, {"fusion_scores", scores}});
  }
  Json provenance = Json::object();
  for (const auto& id : r.new_pool.ids) provenance[id] = r.new_pool.provenance.at(id);
  return Json{{"targets", std::move(targets)}, {"new_pool_ids", r.new_pool.ids}, {"provenance", std::move(provenance)}};
}

}  // namespace fgbench
