// fgbench: file-in/file-out pipeline for building and evaluating
// fine-grained image-text retrieval benchmarks.
//
// Exit codes: 0 success, 1 validation or data failure, 2 usage error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fgbench/fgbench.hpp"

namespace fs = std::filesystem;
using namespace fgbench;

namespace {

struct ValidationFailed {
  std::string message;
};

struct Common {
  std::optional<std::uint64_t> seed;
  std::size_t threads = 1;

  std::uint64_t resolved_seed() const {
    if (seed) return *seed;
    if (const char* env = std::getenv("FGBENCH_SEED")) {
      try {
        return std::stoull(env);
      } catch (const std::exception&) {
        throw Error(ErrorCode::kInvalidArgument, std::string("FGBENCH_SEED is not an integer: ") + env);
      }
    }
    return 0;
  }
};

void add_common(CLI::App* cmd, Common& common) {
  cmd->add_option("--seed", common.seed, "Random seed (falls back to FGBENCH_SEED, then 0)");
  cmd->add_option("--threads", common.threads, "Worker threads (0 = all cores)")->check(CLI::NonNegativeNumber);
}

void emit(const std::string& out, const std::string& text) {
  if (out.empty() || out == "-") {
    std::cout << text;
  } else {
    detail::write_file(out, text);
  }
}

void emit_json(const std::string& out, const Json& j) { emit(out, j.dump(2) + "\n"); }

void emit_jsonl(const std::string& out, const std::vector<Json>& rows) {
  std::string text;
  for (const auto& r : rows) text += r.dump() + "\n";
  emit(out, text);
}

Json load_json(const std::string& path) { return detail::parse_json(detail::read_file(path), path); }

fs::path ids_for(const std::string& embeddings, const std::string& ids) {
  return ids.empty() ? default_ids_path(embeddings) : fs::path(ids);
}

std::vector<std::size_t> parse_ks(const std::string& spec) {
  std::vector<std::size_t> ks;
  std::stringstream ss(spec);
  std::string part;
  while (std::getline(ss, part, ',')) {
    try {
      const long long v = std::stoll(part);
      if (v < 1) throw std::out_of_range("k");
      ks.push_back(static_cast<std::size_t>(v));
    } catch (const std::exception&) {
      throw CLI::ValidationError("--ks", "expected comma-separated positive integers, got \"" + spec + "\"");
    }
  }
  if (ks.empty() || !std::is_sorted(ks.begin(), ks.end())) {
    throw CLI::ValidationError("--ks", "values must be non-empty and sorted ascending");
  }
  return ks;
}

std::vector<std::string> load_id_list(const std::string& path) {
  Json j = load_json(path);
  if (j.is_object() && j.contains("new_pool_ids")) j = j["new_pool_ids"];
  if (!j.is_array()) throw Error(ErrorCode::kParse, path + ": expected a JSON array of ids");
  return j.get<std::vector<std::string>>();
}

std::vector<RenovationCandidate> load_candidates(const std::string& path) {
  std::vector<RenovationCandidate> out;
  auto rows = load_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(candidate_from_json(rows[i], path + ":" + std::to_string(i + 1)));
  }
  return out;
}

std::vector<Json> candidates_to_jsonl(const std::vector<RenovationCandidate>& cs) {
  std::vector<Json> rows;
  for (const auto& c : cs) rows.push_back(to_json(c));
  return rows;
}

// Candidates from captions + generation output {caption_id, generated_detail}.
std::vector<RenovationCandidate> build_candidates(const std::string& captions_path, const std::string& details_path) {
  const auto captions = load_captions(captions_path);
  std::map<std::string, const CaptionRecord*> by_id;
  for (const auto& c : captions) by_id[c.caption_id] = &c;
  std::vector<RenovationCandidate> out;
  auto rows = load_jsonl(details_path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string ctx = details_path + ":" + std::to_string(i + 1);
    const auto cid = detail::require_field<std::string>(rows[i], "caption_id", ctx);
    auto it = by_id.find(cid);
    if (it == by_id.end()) throw Error(ErrorCode::kUnknownId, ctx + ": unknown caption \"" + cid + "\"", {cid});
    out.push_back(make_candidate(*it->second, detail::require_field<std::string>(rows[i], "generated_detail", ctx)));
  }
  return out;
}

ClipscoreTable load_clipscores(const std::string& requests, const std::string& scores) {
  return ClipscoreTable::from_files(load_jsonl(requests), load_jsonl(scores));
}

// Attaches merger output {caption_id, merged_text} (line-aligned) to candidates.
void attach_merged(std::vector<RenovationCandidate>& cs, const std::string& merged_path) {
  auto rows = load_jsonl(merged_path);
  if (rows.size() != cs.size()) {
    throw Error(ErrorCode::kCountMismatch, merged_path + ": " + std::to_string(rows.size()) +
                                               " merged texts for " + std::to_string(cs.size()) + " candidates");
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const std::string ctx = merged_path + ":" + std::to_string(i + 1);
    const auto cid = detail::require_field<std::string>(rows[i], "caption_id", ctx);
    if (cid != cs[i].caption_id) {
      throw Error(ErrorCode::kFormat, ctx + ": caption \"" + cid + "\" ≠ candidate \"" + cs[i].caption_id + "\"", {cid});
    }
    cs[i].merged_text = detail::require_field<std::string>(rows[i], "merged_text", ctx);
  }
}

GroundTruth truth_from_options(const std::string& truth_path, const std::string& captions_path, Task task) {
  if (!truth_path.empty()) return ground_truth_from_json(load_json(truth_path));
  if (!captions_path.empty()) return ground_truth_from_captions(load_captions(captions_path), task);
  throw CLI::ValidationError("--truth", "either --truth or --captions is required");
}

// Contract validation for a single file, used by `validate` and adapters.
ValidationReport validate_jsonl_contract(const std::string& kind, const std::string& path) {
  ValidationReport report;
  static const std::map<std::string, std::vector<std::string>> kFields = {
      {"generation-requests", {"caption_id", "image_id", "prompted_input"}},
      {"generations", {"caption_id", "generated_detail"}},
      {"score-requests", {"caption_id", "image_id", "text"}},
      {"clipscores", {"caption_id", "clipscore"}},
      {"merged", {"caption_id", "merged_text"}},
      {"pairs", {"image_id", "score_correct", "score_wrong"}},
  };
  try {
    auto rows = load_jsonl(path);
    if (kind == "review-queue") {
      for (std::size_t i = 0; i < rows.size(); ++i) review_item_from_json(rows[i], path + ":" + std::to_string(i + 1));
      return report;
    }
    if (kind == "candidates") {
      for (std::size_t i = 0; i < rows.size(); ++i) candidate_from_json(rows[i], path + ":" + std::to_string(i + 1));
      return report;
    }
    auto it = kFields.find(kind);
    if (it == kFields.end()) throw CLI::ValidationError("--kind", "unknown contract kind \"" + kind + "\"");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      for (const auto& f : it->second) {
        if (!rows[i].is_object() || !rows[i].contains(f)) {
          report.issues.push_back({"contract", path + ":" + std::to_string(i + 1), "missing field \"" + f + "\""});
        } else if ((f == "clipscore" || f == "score_correct" || f == "score_wrong") ? !rows[i][f].is_number()
                                                                                      : !rows[i][f].is_string()) {
          report.issues.push_back({"contract", path + ":" + std::to_string(i + 1), "field \"" + f + "\" has the wrong type"});
        }
      }
    }
  } catch (const Error& e) {
    report.issues.push_back({"parse", path, e.what()});
  }
  return report;
}

ValidationReport wrap_load(const std::function<void()>& load, const std::string& subject) {
  ValidationReport report;
  try {
    load();
  } catch (const Error& e) {
    report.issues.push_back({"load", subject, e.what()});
  }
  return report;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fgbench: fine-grained image-text retrieval benchmark toolkit"};
  app.require_subcommand(1);
  std::function<void()> action;

  Common common;
  std::string out;

  // validate ---------------------------------------------------------------
  std::string v_manifest, v_embeddings, v_ids, v_captions, v_scores, v_kind, v_file;
  auto* validate = app.add_subcommand("validate", "Validate a dataset manifest or a single contract file");
  validate->add_option("--manifest", v_manifest, "Manifest JSON");
  validate->add_option("--embeddings", v_embeddings, "FGE1 embedding file");
  validate->add_option("--ids", v_ids, "Ids sidecar (default: <embeddings>.ids)");
  validate->add_option("--captions", v_captions, "Captions JSONL");
  validate->add_option("--scores", v_scores, "FGS1 score matrix");
  validate->add_option("--kind", v_kind,
                       "JSONL contract kind: generation-requests, generations, score-requests, clipscores, "
                       "merged, pairs, candidates, review-queue");
  validate->add_option("--file", v_file, "JSONL file checked against --kind");
  validate->add_option("--out", out, "Report path (default stdout)");
  add_common(validate, common);
  validate->callback([&] {
    action = [&] {
      ValidationReport report;
      if (!v_manifest.empty()) {
        try {
          report = validate_dataset(load_manifest(v_manifest));
        } catch (const Error& e) {
          report.issues.push_back({"manifest", v_manifest, e.what()});
        }
      } else if (!v_embeddings.empty()) {
        report = wrap_load([&] { load_embeddings(v_embeddings, ids_for(v_embeddings, v_ids)); }, v_embeddings);
      } else if (!v_captions.empty()) {
        report = wrap_load([&] { load_captions(v_captions); }, v_captions);
      } else if (!v_scores.empty()) {
        report = wrap_load([&] { load_scores(v_scores); }, v_scores);
      } else if (!v_kind.empty() && !v_file.empty()) {
        report = validate_jsonl_contract(v_kind, v_file);
      } else {
        throw CLI::ValidationError("validate", "one of --manifest, --embeddings, --captions, --scores, --kind/--file");
      }
      emit_json(out, to_json(report));
      if (!report.ok()) throw ValidationFailed{std::to_string(report.issues.size()) + " issue(s) found"};
    };
  });

  // mock-embed -------------------------------------------------------------
  std::string me_manifest, me_images, me_texts;
  std::size_t me_dim = 64;
  double me_noise = 0.1;
  auto* mock_embed = app.add_subcommand("mock-embed", "Deterministic seeded embeddings for a manifest");
  mock_embed->add_option("--manifest", me_manifest, "Manifest JSON")->required();
  mock_embed->add_option("--dim", me_dim, "Embedding dimension")->check(CLI::PositiveNumber);
  mock_embed->add_option("--noise", me_noise, "Image noise level");
  mock_embed->add_option("--out-images", me_images, "Image FGE1 output")->required();
  mock_embed->add_option("--out-texts", me_texts, "Text FGE1 output")->required();
  add_common(mock_embed, common);
  mock_embed->callback([&] {
    action = [&] {
      const auto text = detail::read_file(me_manifest);
      const auto j = detail::parse_json(text, me_manifest);
      const fs::path base = fs::path(me_manifest).parent_path();
      const auto captions_path = base / detail::require_field<std::string>(j, "captions_path", "manifest");
      const auto captions = load_captions(captions_path);
      const auto image_ids = detail::require_field<std::vector<std::string>>(j, "image_ids", "manifest");
      HashedEmbedder embedder(me_dim, common.resolved_seed());
      write_embeddings(embedder.embed_images(image_ids, captions, me_noise), me_images);
      write_embeddings(embedder.embed_captions(captions), me_texts);
    };
  });

  // build-pool -------------------------------------------------------------
  std::string bp_manifest, bp_aux, bp_aux_ids;
  PoolConfig pool_config;
  auto* build_pool = app.add_subcommand("build-pool", "Build similar-image sets and the new image pool");
  build_pool->add_option("--manifest", bp_manifest, "Manifest JSON")->required();
  build_pool->add_option("--aux", bp_aux, "Auxiliary image embeddings (FGE1)");
  build_pool->add_option("--aux-ids", bp_aux_ids, "Auxiliary ids sidecar (default: <aux>.ids)");
  build_pool->add_option("--k-prime", pool_config.k_prime, "Image-image list length")->check(CLI::PositiveNumber);
  build_pool->add_option("--k-dprime", pool_config.k_dprime, "Text-image list length")->check(CLI::PositiveNumber);
  build_pool->add_option("--rrf-constant", pool_config.rrf_constant, "Reciprocal-rank fusion constant")
      ->check(CLI::NonNegativeNumber);
  build_pool->add_option("--out", out, "pools.json path")->required();
  add_common(build_pool, common);
  build_pool->callback([&] {
    action = [&] {
      const auto manifest = load_manifest(bp_manifest);
      const auto images = load_embeddings(manifest.image_embeddings_path);
      EmbeddingMatrix aux;
      aux.dim = images.dim;
      if (!bp_aux.empty()) aux = load_embeddings(bp_aux, ids_for(bp_aux, bp_aux_ids));
      const auto pool = prepare_candidates(manifest, images, aux);
      for (const auto& w : pool.warnings) std::cerr << "warning: " << w << "\n";
      const IndexedEmbeddings texts(load_embeddings(manifest.text_embeddings_path));
      pool_config.threads = common.threads;
      const auto result = build_pools(manifest, pool, texts, pool_config);
      emit_json(out, to_json(result));
      std::cerr << result.sets.size() << " similar sets, new pool of " << result.new_pool.ids.size()
                << " images (candidates: " << pool.ids.size() << ")\n";
    };
  });

  // score-matrix -----------------------------------------------------------
  std::string sm_queries, sm_queries_ids, sm_candidates_ids;
  std::vector<std::string> sm_candidates;
  auto* score_matrix = app.add_subcommand("score-matrix", "Cosine score matrix between two embedding files");
  score_matrix->add_option("--queries", sm_queries, "Query FGE1")->required();
  score_matrix->add_option("--queries-ids", sm_queries_ids, "Query ids sidecar");
  score_matrix->add_option("--candidates", sm_candidates, "Candidate FGE1 files; rows are concatenated")->required();
  score_matrix->add_option("--candidates-ids", sm_candidates_ids, "Candidate ids sidecar (single candidate file)");
  score_matrix->add_option("--out", out, "FGS1 output")->required();
  add_common(score_matrix, common);
  score_matrix->callback([&] {
    action = [&] {
      const auto q = load_embeddings(sm_queries, ids_for(sm_queries, sm_queries_ids));
      if (!sm_candidates_ids.empty() && sm_candidates.size() != 1) {
        throw CLI::ValidationError("--candidates-ids", "requires exactly one --candidates file");
      }
      EmbeddingMatrix c;
      for (const auto& path : sm_candidates) {
        const auto part = load_embeddings(path, ids_for(path, sm_candidates_ids));
        if (c.rows > 0 && part.dim != c.dim) {
          throw Error(ErrorCode::kDimensionMismatch, path + " has dimension " + std::to_string(part.dim) +
                                                         ", expected " + std::to_string(c.dim));
        }
        c.dim = part.dim;
        c.rows += part.rows;
        c.ids.insert(c.ids.end(), part.ids.begin(), part.ids.end());
        c.values.insert(c.values.end(), part.values.begin(), part.values.end());
      }
      check_embedding_matrix(c);
      write_scores(cosine_scores(q, c, common.threads), out);
    };
  });

  // detect-coarse ----------------------------------------------------------
  std::string dc_scores, dc_captions, dc_manifest;
  auto* detect = app.add_subcommand("detect-coarse", "Label captions coarse/fine by the rank of their own image");
  detect->add_option("--scores", dc_scores, "Caption x image FGS1 scores");
  detect->add_option("--captions", dc_captions, "Captions JSONL (targets)");
  detect->add_option("--manifest", dc_manifest, "Manifest; scores computed over its original pool");
  detect->add_option("--out", out, "Labels JSONL");
  add_common(detect, common);
  detect->callback([&] {
    action = [&] {
      std::vector<CaptionRecord> captions;
      ScoreMatrix scores;
      if (!dc_manifest.empty()) {
        const auto m = load_manifest(dc_manifest);
        captions = m.captions;
        if (!dc_scores.empty()) {
          scores = load_scores(dc_scores);
        } else {
          const auto images = select_rows(load_embeddings(m.image_embeddings_path), m.image_ids);
          std::vector<std::string> cids;
          for (const auto& c : captions) cids.push_back(c.caption_id);
          const auto texts = select_rows(load_embeddings(m.text_embeddings_path), cids);
          scores = cosine_scores(texts, images, common.threads);
        }
      } else {
        if (dc_scores.empty() || dc_captions.empty()) {
          throw CLI::ValidationError("detect-coarse", "--scores and --captions (or --manifest) are required");
        }
        captions = load_captions(dc_captions);
        scores = load_scores(dc_scores);
      }
      std::map<std::string, std::string> targets;
      for (const auto& c : captions) targets[c.caption_id] = c.image_id;
      const auto labels = detect_coarse(scores, targets);
      std::vector<Json> rows;
      std::size_t coarse = 0;
      for (const auto& l : labels) {
        rows.push_back(to_json(l));
        coarse += l.label == Granularity::kCoarse;
      }
      emit_jsonl(out, rows);
      std::cerr << coarse << " of " << labels.size() << " captions coarse\n";
    };
  });

  // make-prompts -----------------------------------------------------------
  std::string mp_captions, mp_coarse;
  auto* make_prompts = app.add_subcommand("make-prompts", "Generation requests for coarse captions");
  make_prompts->add_option("--captions", mp_captions, "Captions JSONL")->required();
  make_prompts->add_option("--coarse", mp_coarse, "Labels from detect-coarse (default: every caption)");
  make_prompts->add_option("--out", out, "Generation request JSONL");
  add_common(make_prompts, common);
  make_prompts->callback([&] {
    action = [&] {
      std::optional<std::set<std::string>> coarse;
      if (!mp_coarse.empty()) {
        coarse.emplace();
        for (const auto& row : load_jsonl(mp_coarse)) {
          if (detail::require_field<std::string>(row, "label", mp_coarse) == "coarse") {
            coarse->insert(detail::require_field<std::string>(row, "caption_id", mp_coarse));
          }
        }
      }
      std::vector<Json> rows;
      for (const auto& c : load_captions(mp_captions)) {
        if (coarse && !coarse->count(c.caption_id)) continue;
        for (auto& r : generation_requests(build_prompts(c, extract_nouns(c)))) rows.push_back(std::move(r));
      }
      emit_jsonl(out, rows);
    };
  });

  // score-requests ---------------------------------------------------------
  std::string sr_captions, sr_details, sr_candidates, sr_merged;
  auto* score_req = app.add_subcommand("score-requests", "Scorer requests for original and candidate texts");
  score_req->add_option("--captions", sr_captions, "Captions JSONL (with --details)");
  score_req->add_option("--details", sr_details, "Generation output JSONL");
  score_req->add_option("--candidates", sr_candidates, "Candidates JSONL (with --merged)");
  score_req->add_option("--merged", sr_merged, "Merger output JSONL, line-aligned with --candidates");
  score_req->add_option("--out", out, "Scorer request JSONL");
  add_common(score_req, common);
  score_req->callback([&] {
    action = [&] {
      std::vector<RenovationCandidate> cs;
      if (!sr_details.empty() && !sr_captions.empty()) {
        cs = build_candidates(sr_captions, sr_details);
      } else if (!sr_candidates.empty()) {
        cs = load_candidates(sr_candidates);
        if (!sr_merged.empty()) attach_merged(cs, sr_merged);
      } else {
        throw CLI::ValidationError("score-requests", "--captions/--details or --candidates[/--merged] required");
      }
      emit_jsonl(out, score_requests(cs));
    };
  });

  // mock-score -------------------------------------------------------------
  std::string ms_requests, ms_images, ms_image_ids;
  std::size_t ms_dim = 64;
  auto* mock_score = app.add_subcommand("mock-score", "Deterministic stand-in scorer (cosine of hashed embeddings)");
  mock_score->add_option("--requests", ms_requests, "Scorer request JSONL")->required();
  mock_score->add_option("--image-embeddings", ms_images, "Image FGE1")->required();
  mock_score->add_option("--image-ids", ms_image_ids, "Image ids sidecar");
  mock_score->add_option("--dim", ms_dim, "Hashed embedding dimension")->check(CLI::PositiveNumber);
  mock_score->add_option("--out", out, "Clipscore JSONL");
  add_common(mock_score, common);
  mock_score->callback([&] {
    action = [&] {
      const auto images = load_embeddings(ms_images, ids_for(ms_images, ms_image_ids));
      if (images.dim != ms_dim) {
        throw Error(ErrorCode::kDimensionMismatch, "image dim " + std::to_string(images.dim) + " ≠ --dim " +
                                                       std::to_string(ms_dim));
      }
      HashedEmbedder embedder(ms_dim, common.resolved_seed());
      emit_jsonl(out, mock_score_requests(embedder, load_jsonl(ms_requests), images));
    };
  });

  // filter -----------------------------------------------------------------
  std::string f_captions, f_details, f_requests, f_scores;
  auto* filter = app.add_subcommand("filter", "Drop candidates scoring below their original caption");
  filter->add_option("--captions", f_captions, "Captions JSONL")->required();
  filter->add_option("--details", f_details, "Generation output JSONL")->required();
  filter->add_option("--requests", f_requests, "Scorer request JSONL")->required();
  filter->add_option("--clipscores", f_scores, "Scorer output JSONL")->required();
  filter->add_option("--out", out, "Surviving candidates JSONL");
  add_common(filter, common);
  filter->callback([&] {
    action = [&] {
      auto cs = build_candidates(f_captions, f_details);
      attach_scores(cs, load_clipscores(f_requests, f_scores));
      const auto kept = filter_candidates(cs);
      emit_jsonl(out, candidates_to_jsonl(kept));
      std::cerr << kept.size() << " of " << cs.size() << " candidates kept\n";
    };
  });

  // mock-merge -------------------------------------------------------------
  std::string mm_candidates;
  auto* mock_merge_cmd = app.add_subcommand("mock-merge", "Deterministic stand-in merger (template re-insertion)");
  mock_merge_cmd->add_option("--candidates", mm_candidates, "Candidates JSONL")->required();
  mock_merge_cmd->add_option("--out", out, "Merged JSONL {caption_id, merged_text}");
  add_common(mock_merge_cmd, common);
  mock_merge_cmd->callback([&] {
    action = [&] {
      std::vector<Json> rows;
      for (const auto& c : load_candidates(mm_candidates)) {
        rows.push_back(Json{{"caption_id", c.caption_id}, {"merged_text", mock_merge(c.original_text, c.generated_detail)}});
      }
      emit_jsonl(out, rows);
    };
  });

  // select-best ------------------------------------------------------------
  std::string sb_candidates, sb_merged, sb_requests, sb_scores;
  auto* select = app.add_subcommand("select-best", "Re-filter merged texts and keep the best per caption");
  select->add_option("--candidates", sb_candidates, "Candidates JSONL")->required();
  select->add_option("--merged", sb_merged, "Merger output JSONL")->required();
  select->add_option("--requests", sb_requests, "Scorer request JSONL")->required();
  select->add_option("--clipscores", sb_scores, "Scorer output JSONL")->required();
  select->add_option("--out", out, "Selected candidates JSONL");
  add_common(select, common);
  select->callback([&] {
    action = [&] {
      auto cs = load_candidates(sb_candidates);
      attach_merged(cs, sb_merged);
      attach_scores(cs, load_clipscores(sb_requests, sb_scores));
      std::vector<std::string> order;
      std::map<std::string, std::vector<RenovationCandidate>> groups;
      for (auto& c : cs) {
        if (!groups.count(c.caption_id)) order.push_back(c.caption_id);
        groups[c.caption_id].push_back(std::move(c));
      }
      std::vector<RenovationCandidate> selected;
      for (const auto& id : order) {
        if (auto best = select_best(filter_candidates(groups[id]))) selected.push_back(std::move(*best));
      }
      emit_jsonl(out, candidates_to_jsonl(selected));
      std::cerr << selected.size() << " of " << order.size() << " captions renovated\n";
    };
  });

  // split-merge-data -------------------------------------------------------
  std::string sp_captions;
  auto* split = app.add_subcommand("split-merge-data", "Merge-training pairs from parsed fine-grained captions");
  split->add_option("--captions", sp_captions, "Parsed captions JSONL")->required();
  split->add_option("--out", out, "Pairs JSONL {caption_id, kind, rest, detail}");
  add_common(split, common);
  split->callback([&] {
    action = [&] {
      std::vector<Json> rows;
      for (const auto& c : load_captions(sp_captions)) {
        for (const auto& p : split_for_merge_training(c)) rows.push_back(to_json(p, c.caption_id));
      }
      emit_jsonl(out, rows);
    };
  });

  // review export | apply --------------------------------------------------
  std::string rv_selected, rv_queue, rv_captions;
  auto* review = app.add_subcommand("review", "Manual-correction queue");
  review->require_subcommand(1);
  auto* review_export = review->add_subcommand("export", "Write pending review items");
  review_export->add_option("--selected", rv_selected, "Selected candidates JSONL")->required();
  review_export->add_option("--out", out, "Review queue JSONL")->required();
  add_common(review_export, common);
  review_export->callback([&] {
    action = [&] { export_review_queue(load_candidates(rv_selected), out); };
  });
  auto* review_apply = review->add_subcommand("apply", "Apply a resolved review queue to captions");
  review_apply->add_option("--queue", rv_queue, "Review queue JSONL")->required();
  review_apply->add_option("--captions", rv_captions, "Captions JSONL")->required();
  review_apply->add_option("--out", out, "Final captions JSONL");
  add_common(review_apply, common);
  review_apply->callback([&] {
    action = [&] {
      const auto finals = apply_corrections(fs::path(rv_queue));
      std::vector<Json> rows;
      for (const auto& c : apply_final_texts(load_captions(rv_captions), finals)) rows.push_back(to_json(c));
      emit_jsonl(out, rows);
    };
  });

  // evaluate ---------------------------------------------------------------
  std::string ev_scores, ev_truth, ev_captions, ev_task = "t2i", ev_ks = "1,5,10", ev_label = "full", ev_pool;
  auto* evaluate = app.add_subcommand("evaluate", "Recall@K for a score matrix");
  evaluate->add_option("--scores", ev_scores, "FGS1 score matrix (queries x candidates)")->required();
  evaluate->add_option("--truth", ev_truth, "Ground truth JSON {query: id | [ids]}");
  evaluate->add_option("--captions", ev_captions, "Derive ground truth from captions instead");
  evaluate->add_option("--task", ev_task, "t2i or i2t")->check(CLI::IsMember({"t2i", "i2t"}));
  evaluate->add_option("--ks", ev_ks, "Comma-separated K values");
  evaluate->add_option("--pool-label", ev_label, "Label stored in the report");
  evaluate->add_option("--pool", ev_pool, "Restrict candidates to this id list (JSON array or pools.json)");
  evaluate->add_option("--out", out, "report.json path");
  add_common(evaluate, common);
  evaluate->callback([&] {
    action = [&] {
      const Task task = parse_task(ev_task);
      const auto ks = parse_ks(ev_ks);
      auto scores = load_scores(ev_scores);
      if (!ev_pool.empty()) scores = restrict_candidates(scores, load_id_list(ev_pool));
      const auto truth = truth_from_options(ev_truth, ev_captions, task);
      emit_json(out, to_json(recall_at_k(scores, truth, ks, task, ev_label, common.threads)));
    };
  });

  // mini-test --------------------------------------------------------------
  std::string mt_scores, mt_truth, mt_captions, mt_similar, mt_sample, mt_ks = "1,5,10";
  std::size_t mt_sample_size = 100, mt_list_size = 100;
  auto* mini = app.add_subcommand("mini-test", "Sampled queries: whole pool vs per-query similar candidates");
  mini->add_option("--scores", mt_scores, "FGS1 caption x image scores")->required();
  mini->add_option("--truth", mt_truth, "Ground truth JSON");
  mini->add_option("--captions", mt_captions, "Derive ground truth from captions instead");
  mini->add_option("--similar", mt_similar, "JSON {query: [candidate ids]}")->required();
  mini->add_option("--sample", mt_sample, "JSON array of query ids (default: seeded sample)");
  mini->add_option("--sample-size", mt_sample_size, "Seeded sample size")->check(CLI::PositiveNumber);
  mini->add_option("--list-size", mt_list_size, "Required similar-list length")->check(CLI::PositiveNumber);
  mini->add_option("--ks", mt_ks, "Comma-separated K values");
  mini->add_option("--out", out, "Report array path");
  add_common(mini, common);
  mini->callback([&] {
    action = [&] {
      const auto ks = parse_ks(mt_ks);
      const auto scores = load_scores(mt_scores);
      const auto truth = truth_from_options(mt_truth, mt_captions, Task::kT2I);
      std::map<std::string, std::vector<std::string>> similar;
      const auto similar_json = load_json(mt_similar);
      for (const auto& [q, v] : similar_json.items()) similar[q] = v.get<std::vector<std::string>>();
      std::vector<std::string> sample;
      if (!mt_sample.empty()) {
        sample = load_id_list(mt_sample);
      } else {
        for (const auto& q : scores.query_ids) {
          if (similar.count(q)) sample.push_back(q);
        }
        Rng rng(common.resolved_seed());
        rng.shuffle(sample);
        if (sample.size() > mt_sample_size) sample.resize(mt_sample_size);
      }
      const auto pair = mini_test(scores, truth, similar, sample, ks, mt_list_size);
      emit_json(out, Json::array({to_json(pair.first), to_json(pair.second)}));
    };
  });

  // compare-pools ----------------------------------------------------------
  std::string cp_scores, cp_truth, cp_captions, cp_a, cp_b, cp_label_a = "random", cp_label_b = "similar",
                                                          cp_task = "t2i", cp_ks = "1,5,10";
  auto* compare = app.add_subcommand("compare-pools", "Same metric under two equal-size candidate pools");
  compare->add_option("--scores", cp_scores, "FGS1 score matrix")->required();
  compare->add_option("--truth", cp_truth, "Ground truth JSON");
  compare->add_option("--captions", cp_captions, "Derive ground truth from captions instead");
  compare->add_option("--pool-a", cp_a, "First pool (JSON array or pools.json)")->required();
  compare->add_option("--pool-b", cp_b, "Second pool (JSON array or pools.json)")->required();
  compare->add_option("--label-a", cp_label_a, "Label of the first pool");
  compare->add_option("--label-b", cp_label_b, "Label of the second pool");
  compare->add_option("--task", cp_task, "t2i or i2t")->check(CLI::IsMember({"t2i", "i2t"}));
  compare->add_option("--ks", cp_ks, "Comma-separated K values");
  compare->add_option("--out", out, "Report array path");
  add_common(compare, common);
  compare->callback([&] {
    action = [&] {
      const Task task = parse_task(cp_task);
      const auto pair = compare_pools(load_scores(cp_scores), truth_from_options(cp_truth, cp_captions, task),
                                      load_id_list(cp_a), load_id_list(cp_b), parse_ks(cp_ks), task, cp_label_a,
                                      cp_label_b);
      emit_json(out, Json::array({to_json(pair.first), to_json(pair.second)}));
    };
  });

  // pairs-eval -------------------------------------------------------------
  std::string pe_pairs;
  auto* pairs_eval = app.add_subcommand("pairs-eval", "Correct-vs-wrong text matching accuracy");
  pairs_eval->add_option("--pairs", pe_pairs, "JSONL {image_id, score_correct, score_wrong}")->required();
  pairs_eval->add_option("--out", out, "Result JSON");
  add_common(pairs_eval, common);
  pairs_eval->callback([&] {
    action = [&] {
      std::vector<PairScore> pairs;
      for (const auto& row : load_jsonl(pe_pairs)) {
        pairs.push_back({detail::require_field<std::string>(row, "image_id", pe_pairs),
                         detail::require_field<double>(row, "score_correct", pe_pairs),
                         detail::require_field<double>(row, "score_wrong", pe_pairs)});
      }
      emit_json(out, Json{{"n_pairs", pairs.size()}, {"accuracy", round2(pair_match_accuracy(pairs))}});
    };
  });

  // stats ------------------------------------------------------------------
  std::string st_captions;
  auto* stats = app.add_subcommand("stats", "Noun / adjective / length statistics of captions");
  stats->add_option("--captions", st_captions, "Parsed captions JSONL")->required();
  stats->add_option("--out", out, "Stats JSON");
  add_common(stats, common);
  stats->callback([&] { action = [&] { emit_json(out, to_json(text_stats(load_captions(st_captions)))); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e, std::cerr, std::cerr);
    std::cerr << app.help();
    return 2;
  }

  try {
    if (action) action();
    return 0;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return 2;
  } catch (const ValidationFailed& e) {
    std::cerr << "validation failed: " << e.message << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
