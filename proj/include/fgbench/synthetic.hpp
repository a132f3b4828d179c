#pragma once

// Seeded synthetic fixtures: planted-cluster candidate pools and random
// score matrices. Used by tests, the acceptance suite and demos.

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fgbench/dataset.hpp"
#include "fgbench/random.hpp"

namespace fgbench::synthetic {

inline std::vector<float> random_unit(Rng& rng, std::size_t dim) {
  std::vector<double> v(dim);
  double n = 0.0;
  for (double& x : v) {
    x = rng.normal();
    n += x * x;
  }
  n = std::sqrt(n);
  std::vector<float> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = static_cast<float>(v[i] / n);
  return out;
}

// base + sigma * N(0, I), renormalized.
inline std::vector<float> perturb(Rng& rng, const std::vector<float>& base, double sigma) {
  std::vector<double> v(base.size());
  double n = 0.0;
  for (std::size_t i = 0; i < base.size(); ++i) {
    v[i] = base[i] + sigma * rng.normal();
    n += v[i] * v[i];
  }
  n = std::sqrt(n);
  std::vector<float> out(base.size());
  for (std::size_t i = 0; i < base.size(); ++i) out[i] = static_cast<float>(v[i] / n);
  return out;
}

inline void append_row(EmbeddingMatrix& m, std::string id, const std::vector<float>& row) {
  m.dim = row.size();
  m.ids.push_back(std::move(id));
  m.values.insert(m.values.end(), row.begin(), row.end());
  ++m.rows;
}

struct PlantedConfig {
  std::size_t targets = 100;
  std::size_t planted_per_target = 9;
  std::size_t distractors = 1000;
  std::size_t captions_per_image = 5;
  std::size_t dim = 64;
  double planted_sigma = 0.05;  // per-dimension noise of a near-duplicate
  double caption_sigma = 0.05;  // per-dimension noise of a caption embedding
  std::uint64_t seed = 0;
};

struct PlantedFixture {
  Manifest manifest;                // image_ids = targets; captions populated
  EmbeddingMatrix image_embeddings;  // targets
  EmbeddingMatrix auxiliary;         // planted near-duplicates then distractors
  EmbeddingMatrix text_embeddings;   // one row per caption
  std::map<std::string, std::vector<std::string>> planted;  // target -> planted ids
};

inline std::string target_id(std::size_t t) { return "t" + std::to_string(t); }

// Targets are random unit vectors; each gets `planted_per_target`
// near-duplicates and `captions_per_image` caption embeddings perturbed
// around it. Distractors are independent random unit vectors. Auxiliary rows
// are shuffled so planted ids are not contiguous.
inline PlantedFixture planted_cluster_fixture(const PlantedConfig& cfg) {
  Rng rng(cfg.seed);
  PlantedFixture f;
  f.manifest.name = "planted-" + std::to_string(cfg.seed);
  f.manifest.captions_per_image = cfg.captions_per_image;
  struct AuxRow {
    std::string id;
    std::vector<float> v;
  };
  std::vector<AuxRow> aux;
  for (std::size_t t = 0; t < cfg.targets; ++t) {
    const std::string tid = target_id(t);
    const auto base = random_unit(rng, cfg.dim);
    f.manifest.image_ids.push_back(tid);
    append_row(f.image_embeddings, tid, base);
    for (std::size_t p = 0; p < cfg.planted_per_target; ++p) {
      const std::string pid = tid + "-p" + std::to_string(p);
      aux.push_back({pid, perturb(rng, base, cfg.planted_sigma)});
      f.planted[tid].push_back(pid);
    }
    for (std::size_t c = 0; c < cfg.captions_per_image; ++c) {
      CaptionRecord rec;
      rec.caption_id = tid + "-c" + std::to_string(c);
      rec.image_id = tid;
      rec.text = "caption " + std::to_string(c) + " of " + tid;
      f.manifest.captions.push_back(rec);
      append_row(f.text_embeddings, rec.caption_id, perturb(rng, base, cfg.caption_sigma));
    }
  }
  for (std::size_t d = 0; d < cfg.distractors; ++d) {
    aux.push_back({"d" + std::to_string(d), random_unit(rng, cfg.dim)});
  }
  rng.shuffle(aux);
  for (const auto& row : aux) append_row(f.auxiliary, row.id, row.v);
  f.auxiliary.dim = cfg.dim;
  return f;
}

// Seeded noisy re-embedding of one query per target (its first caption id):
// the target's own vector plus per-dimension noise of `sigma`.
inline EmbeddingMatrix noisy_queries(const PlantedFixture& f, double sigma, std::uint64_t seed) {
  Rng rng(seed);
  EmbeddingMatrix q;
  for (std::size_t t = 0; t < f.image_embeddings.rows; ++t) {
    auto row = f.image_embeddings.row(t);
    std::vector<float> base(row.begin(), row.end());
    append_row(q, f.image_embeddings.ids[t] + "-c0", perturb(rng, base, sigma));
  }
  return q;
}

// Uniform scores in [-1, 1). With `levels` > 0 values are quantized to that
// many steps, which produces plenty of exact ties.
inline ScoreMatrix random_score_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed, std::size_t levels = 0) {
  Rng rng(seed);
  ScoreMatrix s;
  for (std::size_t i = 0; i < rows; ++i) s.query_ids.push_back("q" + std::to_string(i));
  for (std::size_t j = 0; j < cols; ++j) s.candidate_ids.push_back("c" + std::to_string(j));
  s.scores.resize(rows * cols);
  for (float& v : s.scores) {
    double u = rng.uniform();
    if (levels > 0) u = std::floor(u * static_cast<double>(levels)) / static_cast<double>(levels);
    v = static_cast<float>(2.0 * u - 1.0);
  }
  return s;
}

}  // namespace fgbench::synthetic
