#pragma once

// Caption renovation orchestration. Generation, merging and scoring models
// live behind file contracts; this header covers everything around them:
// coarse-caption detection, prompt construction, clipscore filtering and
// selection, merge-training pairs from dependency parses, and the review
// queue.

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "fgbench/dataset.hpp"
#include "fgbench/error.hpp"
#include "fgbench/similarity.hpp"

namespace fgbench {

namespace text {

inline std::string lower(std::string_view s) {
  std::string out(s);
  for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline bool is_terminal_punct(char c) { return c == '.' || c == '!' || c == '?'; }

// Drops trailing terminal punctuation and whitespace.
inline std::string strip_terminal(std::string_view s) {
  std::string out = trim(s);
  while (!out.empty() && (is_terminal_punct(out.back()) || out.back() == ' ')) out.pop_back();
  return out;
}

inline std::string with_period(std::string_view s) {
  std::string out = trim(s);
  if (out.empty() || !is_terminal_punct(out.back())) out += '.';
  return out;
}

inline bool starts_with_ci(std::string_view s, std::string_view prefix) {
  return s.size() >= prefix.size() && lower(s.substr(0, prefix.size())) == lower(prefix);
}

// Whitespace split with closing punctuation and "'s" peeled off into their
// own tokens; the inverse of render_tokens for plain captions.
inline std::vector<std::string> simple_tokenize(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    std::size_t j = i;
    while (j < s.size() && s[j] != ' ') ++j;
    if (j > i) {
      std::string word(s.substr(i, j - i));
      std::vector<std::string> tail;
      while (!word.empty()) {
        const char c = word.back();
        if (c == '.' || c == ',' || c == ';' || c == ':' || c == '!' || c == '?' || c == ')') {
          tail.insert(tail.begin(), std::string(1, c));
          word.pop_back();
        } else if (word.size() > 2 && word.ends_with("'s")) {
          tail.insert(tail.begin(), "'s");
          word.resize(word.size() - 2);
        } else {
          break;
        }
      }
      if (!word.empty()) out.push_back(word);
      out.insert(out.end(), tail.begin(), tail.end());
    }
    i = j;
  }
  return out;
}

}  // namespace text

// ---------------------------------------------------------------------------
// Coarse-caption detection

enum class Granularity { kCoarse, kFine };

inline const char* to_string(Granularity g) { return g == Granularity::kCoarse ? "coarse" : "fine"; }

struct CoarseLabel {
  std::string caption_id;
  std::string image_id;
  std::size_t rank = 0;  // pessimistic rank of the target image
  Granularity label = Granularity::kCoarse;
};

// One label per score-matrix row (caption), in row order. A caption is fine
// only when its own image is strictly ahead of every other candidate.
inline std::vector<CoarseLabel> detect_coarse(const ScoreMatrix& t2i,
                                              const std::map<std::string, std::string>& targets) {
  IdIndex columns(t2i.candidate_ids);
  std::vector<CoarseLabel> out;
  out.reserve(t2i.rows());
  for (std::size_t i = 0; i < t2i.rows(); ++i) {
    const auto& cid = t2i.query_ids[i];
    auto target = targets.find(cid);
    if (target == targets.end()) {
      throw Error(ErrorCode::kUnknownId, "no target image for caption \"" + cid + "\"", {cid});
    }
    auto col = columns.find(target->second);
    if (!col) {
      throw Error(ErrorCode::kUnknownId,
                  "target image \"" + target->second + "\" of caption \"" + cid + "\" is not a candidate column",
                  {target->second});
    }
    const std::size_t rank = rank_of_target(t2i.row(i), *col);
    out.push_back({cid, target->second, rank, rank == 1 ? Granularity::kFine : Granularity::kCoarse});
  }
  return out;
}

inline Json to_json(const CoarseLabel& l) {
  return Json{{"caption_id", l.caption_id}, {"image_id", l.image_id}, {"rank", l.rank}, {"label", to_string(l.label)}};
}

// ---------------------------------------------------------------------------
// Prompts

// NOUN/PROPN surfaces in sentence order; repeats (case-insensitive) dropped.
inline std::vector<std::string> extract_nouns(const CaptionRecord& caption) {
  std::vector<std::string> nouns;
  std::unordered_set<std::string> seen;
  for (const auto& t : caption.tokens) {
    if (t.pos != "NOUN" && t.pos != "PROPN") continue;
    if (seen.insert(text::lower(t.surface)).second) nouns.push_back(t.surface);
  }
  return nouns;
}

// Surface-form number heuristic for choosing "is" / "are".
inline bool looks_plural(std::string_view noun) {
  static const std::set<std::string, std::less<>> kIrregular = {"people", "men", "women", "children",
                                                                "feet", "teeth", "mice", "geese"};
  const std::string w = text::lower(noun);
  if (kIrregular.count(w)) return true;
  if (w.size() <= 3 || w.back() != 's') return false;
  return !(w.ends_with("ss") || w.ends_with("us") || w.ends_with("is"));
}

struct Prompt {
  int template_row = 0;  // 1..5
  std::string text;

  bool operator==(const Prompt&) const = default;
};

struct PromptSet {
  std::string caption_id;
  std::string image_id;
  std::vector<std::string> nouns;
  std::vector<Prompt> prompts;
  std::vector<std::string> prompted_inputs;  // caption text + " " + prompt
};

// Template rows:
//   1 "It is"            new object / place / weather
//   2 "There is"         new object
//   3 "The X is|are"     attribute, once per noun
//   4 "The color of X"   color, once per noun
//   5 "The man|woman wears"  clothing, only for man / woman
inline PromptSet build_prompts(const CaptionRecord& caption, const std::vector<std::string>& nouns) {
  PromptSet set;
  set.caption_id = caption.caption_id;
  set.image_id = caption.image_id;
  set.nouns = nouns;
  set.prompts.push_back({1, "It is"});
  set.prompts.push_back({2, "There is"});
  for (const auto& x : nouns) {
    set.prompts.push_back({3, "The " + x + (looks_plural(x) ? " are" : " is")});
  }
  for (const auto& x : nouns) set.prompts.push_back({4, "The color of " + x});
  for (const auto& x : nouns) {
    const std::string w = text::lower(x);
    if (w == "man" || w == "woman") set.prompts.push_back({5, "The " + w + " wears"});
  }
  for (const auto& p : set.prompts) set.prompted_inputs.push_back(caption.text + " " + p.text);
  return set;
}

// Generation request lines: {caption_id, image_id, prompted_input}.
inline std::vector<Json> generation_requests(const PromptSet& set) {
  std::vector<Json> rows;
  for (const auto& input : set.prompted_inputs) {
    rows.push_back(Json{{"caption_id", set.caption_id}, {"image_id", set.image_id}, {"prompted_input", input}});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Renovation candidates

// d_c + " " + d_g with d_c closed by a period: "a dog. it is at night".
inline std::string combine_text(std::string_view original, std::string_view detail) {
  return text::with_period(original) + " " + text::trim(detail);
}

struct RenovationCandidate {
  std::string caption_id;
  std::string image_id;
  std::string original_text;
  std::string generated_detail;
  std::string combined_text;
  std::optional<std::string> merged_text;
  std::optional<double> clipscore_original;
  std::optional<double> clipscore_candidate;

  bool operator==(const RenovationCandidate&) const = default;
};

inline RenovationCandidate make_candidate(const CaptionRecord& caption, std::string detail) {
  RenovationCandidate c;
  c.caption_id = caption.caption_id;
  c.image_id = caption.image_id;
  c.original_text = caption.text;
  c.generated_detail = text::trim(detail);
  c.combined_text = combine_text(caption.text, c.generated_detail);
  return c;
}

// The text the candidate score refers to: merged text once merged.
inline const std::string& candidate_text(const RenovationCandidate& c) {
  return c.merged_text ? *c.merged_text : c.combined_text;
}

// Keeps candidates whose score is not lower than the original's.
inline std::vector<RenovationCandidate> filter_candidates(const std::vector<RenovationCandidate>& candidates) {
  std::vector<RenovationCandidate> kept;
  for (const auto& c : candidates) {
    if (!c.clipscore_original || !c.clipscore_candidate) {
      throw Error(ErrorCode::kMissingScore, "candidate for caption \"" + c.caption_id + "\" is missing a clipscore",
                  {c.caption_id});
    }
    if (*c.clipscore_candidate >= *c.clipscore_original) kept.push_back(c);
  }
  return kept;
}

// Highest candidate score, earliest on ties. nullopt means "no renovation".
inline std::optional<RenovationCandidate> select_best(const std::vector<RenovationCandidate>& candidates) {
  const RenovationCandidate* best = nullptr;
  for (const auto& c : candidates) {
    if (!c.merged_text) {
      throw Error(ErrorCode::kInvalidArgument,
                  "candidate for caption \"" + c.caption_id + "\" has no merged text", {c.caption_id});
    }
    if (!c.clipscore_candidate) {
      throw Error(ErrorCode::kMissingScore, "candidate for caption \"" + c.caption_id + "\" is missing a clipscore",
                  {c.caption_id});
    }
    if (!best || *c.clipscore_candidate > *best->clipscore_candidate) best = &c;
  }
  if (!best) return std::nullopt;
  return *best;
}

inline Json to_json(const RenovationCandidate& c) {
  auto opt = [](const auto& v) { return v ? Json(*v) : Json(nullptr); };
  return Json{{"caption_id", c.caption_id},
              {"image_id", c.image_id},
              {"original_text", c.original_text},
              {"generated_detail", c.generated_detail},
              {"combined_text", c.combined_text},
              {"merged_text", opt(c.merged_text)},
              {"clipscore_original", opt(c.clipscore_original)},
              {"clipscore_candidate", opt(c.clipscore_candidate)}};
}

inline RenovationCandidate candidate_from_json(const Json& j, const std::string& ctx) {
  auto opt_string = [&](const char* key) -> std::optional<std::string> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return detail::require_field<std::string>(j, key, ctx);
  };
  auto opt_double = [&](const char* key) -> std::optional<double> {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return detail::require_field<double>(j, key, ctx);
  };
  RenovationCandidate c;
  c.caption_id = detail::require_field<std::string>(j, "caption_id", ctx);
  c.image_id = detail::require_field<std::string>(j, "image_id", ctx);
  c.original_text = detail::require_field<std::string>(j, "original_text", ctx);
  c.generated_detail = detail::require_field<std::string>(j, "generated_detail", ctx);
  c.combined_text = detail::require_field<std::string>(j, "combined_text", ctx);
  c.merged_text = opt_string("merged_text");
  c.clipscore_original = opt_double("clipscore_original");
  c.clipscore_candidate = opt_double("clipscore_candidate");
  return c;
}

// ---------------------------------------------------------------------------
// Clipscore tables (scorer contract)

// Scorer requests are {caption_id, image_id, text}; responses are
// {caption_id, clipscore}, line-aligned with the requests.
class ClipscoreTable {
 public:
  void add(const std::string& caption_id, const std::string& text, double score) {
    table_[key(caption_id, text)] = score;
  }

  std::optional<double> find(const std::string& caption_id, const std::string& text) const {
    auto it = table_.find(key(caption_id, text));
    if (it == table_.end()) return std::nullopt;
    return it->second;
  }

  static ClipscoreTable from_files(const std::vector<Json>& requests, const std::vector<Json>& responses) {
    if (requests.size() != responses.size()) {
      throw Error(ErrorCode::kCountMismatch, "scorer returned " + std::to_string(responses.size()) +
                                                 " scores for " + std::to_string(requests.size()) + " requests");
    }
    ClipscoreTable t;
    for (std::size_t i = 0; i < requests.size(); ++i) {
      const std::string ctx = "score line " + std::to_string(i + 1);
      const auto cid = detail::require_field<std::string>(requests[i], "caption_id", ctx);
      const auto text = detail::require_field<std::string>(requests[i], "text", ctx);
      const auto rid = detail::require_field<std::string>(responses[i], "caption_id", ctx);
      if (rid != cid) {
        throw Error(ErrorCode::kFormat, ctx + ": response caption \"" + rid + "\" ≠ request \"" + cid + "\"", {rid});
      }
      t.add(cid, text, detail::require_field<double>(responses[i], "clipscore", ctx));
    }
    return t;
  }

 private:
  static std::string key(const std::string& caption_id, const std::string& text) {
    return caption_id + '\x1f' + text;
  }
  std::unordered_map<std::string, double> table_;
};

// Request lines for scoring each caption's original text once followed by
// every distinct candidate text, grouped in first-seen caption order.
inline std::vector<Json> score_requests(const std::vector<RenovationCandidate>& candidates) {
  std::vector<Json> rows;
  std::set<std::pair<std::string, std::string>> emitted;
  auto emit = [&](const RenovationCandidate& c, const std::string& text) {
    if (emitted.emplace(c.caption_id, text).second) {
      rows.push_back(Json{{"caption_id", c.caption_id}, {"image_id", c.image_id}, {"text", text}});
    }
  };
  for (const auto& c : candidates) {
    emit(c, c.original_text);
    emit(c, candidate_text(c));
  }
  return rows;
}

inline void attach_scores(std::vector<RenovationCandidate>& candidates, const ClipscoreTable& table) {
  for (auto& c : candidates) {
    c.clipscore_original = table.find(c.caption_id, c.original_text);
    c.clipscore_candidate = table.find(c.caption_id, candidate_text(c));
    if (!c.clipscore_original || !c.clipscore_candidate) {
      throw Error(ErrorCode::kMissingScore, "no clipscore for a text of caption \"" + c.caption_id + "\"",
                  {c.caption_id});
    }
  }
}

// ---------------------------------------------------------------------------
// Merge-training pairs from dependency parses

enum class SplitKind { kPrepositionalPhrase, kAdjectiveNoun };

inline const char* to_string(SplitKind k) {
  return k == SplitKind::kPrepositionalPhrase ? "prepositional-phrase" : "adjective-noun";
}

struct SplitPair {
  std::string rest;    // sentence without the structure, closed by a period
  std::string detail;  // "it is <pp>." or "the <noun> is <adj>."
  SplitKind kind = SplitKind::kPrepositionalPhrase;
  std::size_t span_begin = 0;
  std::size_t span_end = 0;  // exclusive

  bool operator==(const SplitPair&) const = default;
};

namespace detail {

class ParseTree {
 public:
  explicit ParseTree(const CaptionRecord& c) : tokens_(c.tokens), children_(c.tokens.size()) {
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (tokens_[i].head >= 0) children_[static_cast<std::size_t>(tokens_[i].head)].push_back(i);
    }
  }

  const Token& operator[](std::size_t i) const { return tokens_[i]; }
  std::size_t size() const { return tokens_.size(); }
  const std::vector<std::size_t>& children(std::size_t i) const { return children_[i]; }

  // Contiguous [begin, end) covered by the subtree of i, or nullopt when the
  // subtree has gaps or reaches the root.
  std::optional<std::pair<std::size_t, std::size_t>> subtree_span(std::size_t i) const {
    std::vector<std::size_t> stack{i};
    std::vector<std::size_t> nodes;
    std::vector<bool> visited(tokens_.size(), false);
    while (!stack.empty()) {
      const std::size_t n = stack.back();
      stack.pop_back();
      if (visited[n]) continue;
      visited[n] = true;
      nodes.push_back(n);
      for (std::size_t ch : children_[n]) stack.push_back(ch);
    }
    const auto [lo, hi] = std::minmax_element(nodes.begin(), nodes.end());
    if (*hi - *lo + 1 != nodes.size()) return std::nullopt;
    return std::make_pair(*lo, *hi + 1);
  }

  bool is_nominal(std::size_t i) const {
    const auto& p = tokens_[i].pos;
    return p == "NOUN" || p == "PROPN" || p == "PRON" || p == "NUM";
  }

  // Attachment point of a phrase: a verb or the sentence root.
  bool is_clause_anchor(int head) const {
    if (head < 0) return false;
    const auto& h = tokens_[static_cast<std::size_t>(head)];
    return h.pos == "VERB" || h.pos == "AUX" || h.head == -1;
  }

  std::string render(std::size_t begin, std::size_t end) const {
    std::vector<std::string> s;
    for (std::size_t i = begin; i < end; ++i) s.push_back(tokens_[i].surface);
    return render_tokens(s);
  }

  // Sentence with [begin, end) removed and trailing punctuation replaced by
  // a single period.
  std::string render_without(std::size_t begin, std::size_t end) const {
    std::vector<std::string> s;
    for (std::size_t i = 0; i < tokens_.size(); ++i) {
      if (i < begin || i >= end) s.push_back(tokens_[i].surface);
    }
    while (!s.empty() && !s.back().empty() && std::ispunct(static_cast<unsigned char>(s.back().front())) &&
           attaches_left(s.back())) {
      s.pop_back();
    }
    return render_tokens(s) + ".";
  }

 private:
  const std::vector<Token>& tokens_;
  std::vector<std::vector<std::size_t>> children_;
};

inline bool relation_is(std::string_view deprel, std::string_view base) {
  return deprel == base || (deprel.size() > base.size() && deprel.substr(0, base.size()) == base &&
                            deprel[base.size()] == ':');
}

}  // namespace detail

// Extracts (rest, detail) training pairs. Two structures are recognized:
//
//   prepositional phrase  an ADP heading a nominal (prep/pobj style) or a
//                         nominal with an ADP "case" dependent at its left
//                         edge (obl/nmod style), attached to a verb or root;
//   adjective-noun        an "amod" ADJ (with its own dependents) on a noun.
//
// Each pair removes only its own span; pairs are ordered by span start.
inline std::vector<SplitPair> split_for_merge_training(const CaptionRecord& caption) {
  detail::ParseTree tree(caption);
  std::vector<SplitPair> pairs;
  for (std::size_t i = 0; i < tree.size(); ++i) {
    const Token& t = tree[i];
    bool pp = false;
    if (t.pos == "ADP" && tree.is_clause_anchor(t.head)) {
      pp = std::any_of(tree.children(i).begin(), tree.children(i).end(),
                       [&](std::size_t c) { return tree.is_nominal(c); });
    } else if (tree.is_nominal(i) && tree.is_clause_anchor(t.head) &&
               (detail::relation_is(t.deprel, "obl") || detail::relation_is(t.deprel, "nmod"))) {
      auto span = tree.subtree_span(i);
      pp = span && std::any_of(tree.children(i).begin(), tree.children(i).end(), [&](std::size_t c) {
             return c == span->first && tree[c].pos == "ADP" && detail::relation_is(tree[c].deprel, "case");
           });
    }
    if (pp) {
      if (auto span = tree.subtree_span(i)) {
        pairs.push_back({tree.render_without(span->first, span->second),
                         "it is " + tree.render(span->first, span->second) + ".", SplitKind::kPrepositionalPhrase,
                         span->first, span->second});
      }
      continue;
    }
    if (t.pos == "ADJ" && detail::relation_is(t.deprel, "amod") && t.head >= 0) {
      const Token& noun = tree[static_cast<std::size_t>(t.head)];
      if (noun.pos != "NOUN" && noun.pos != "PROPN") continue;
      if (auto span = tree.subtree_span(i)) {
        pairs.push_back({tree.render_without(span->first, span->second),
                         "the " + noun.surface + " is " + tree.render(span->first, span->second) + ".",
                         SplitKind::kAdjectiveNoun, span->first, span->second});
      }
    }
  }
  std::stable_sort(pairs.begin(), pairs.end(),
                   [](const SplitPair& a, const SplitPair& b) { return a.span_begin < b.span_begin; });
  return pairs;
}

inline Json to_json(const SplitPair& p, const std::string& caption_id) {
  return Json{{"caption_id", caption_id}, {"kind", to_string(p.kind)}, {"rest", p.rest}, {"detail", p.detail}};
}

// ---------------------------------------------------------------------------
// Review queue

enum class ReviewStatus { kPending, kAccepted, kCorrected, kRejected };

inline const char* to_string(ReviewStatus s) {
  switch (s) {
    case ReviewStatus::kPending: return "pending";
    case ReviewStatus::kAccepted: return "accepted";
    case ReviewStatus::kCorrected: return "corrected";
    case ReviewStatus::kRejected: return "rejected";
  }
  return "pending";
}

inline ReviewStatus parse_review_status(const std::string& s) {
  if (s == "pending") return ReviewStatus::kPending;
  if (s == "accepted") return ReviewStatus::kAccepted;
  if (s == "corrected") return ReviewStatus::kCorrected;
  if (s == "rejected") return ReviewStatus::kRejected;
  throw Error(ErrorCode::kParse, "unknown review status \"" + s + "\"");
}

struct ReviewItem {
  std::string caption_id;
  std::string image_id;
  std::string original_text;
  std::string candidate_text;
  ReviewStatus status = ReviewStatus::kPending;
  std::optional<std::string> corrected_text;

  bool operator==(const ReviewItem&) const = default;
};

inline Json to_json(const ReviewItem& r) {
  return Json{{"caption_id", r.caption_id},
              {"image_id", r.image_id},
              {"original_text", r.original_text},
              {"candidate_text", r.candidate_text},
              {"status", to_string(r.status)},
              {"corrected_text", r.corrected_text ? Json(*r.corrected_text) : Json(nullptr)}};
}

inline ReviewItem review_item_from_json(const Json& j, const std::string& ctx) {
  ReviewItem r;
  r.caption_id = detail::require_field<std::string>(j, "caption_id", ctx);
  r.image_id = detail::require_field<std::string>(j, "image_id", ctx);
  r.original_text = detail::require_field<std::string>(j, "original_text", ctx);
  r.candidate_text = detail::require_field<std::string>(j, "candidate_text", ctx);
  r.status = parse_review_status(detail::require_field<std::string>(j, "status", ctx));
  if (j.contains("corrected_text") && !j["corrected_text"].is_null()) {
    r.corrected_text = detail::require_field<std::string>(j, "corrected_text", ctx);
  }
  if (r.corrected_text.has_value() != (r.status == ReviewStatus::kCorrected)) {
    throw Error(ErrorCode::kParse, ctx + ": corrected_text must be present exactly when status is corrected",
                {r.caption_id});
  }
  return r;
}

inline std::vector<ReviewItem> make_review_items(const std::vector<RenovationCandidate>& selected) {
  std::vector<ReviewItem> items;
  for (const auto& c : selected) {
    items.push_back({c.caption_id, c.image_id, c.original_text, candidate_text(c), ReviewStatus::kPending, std::nullopt});
  }
  return items;
}

inline std::filesystem::path export_review_queue(const std::vector<RenovationCandidate>& selected,
                                                 const std::filesystem::path& path) {
  std::vector<Json> rows;
  for (const auto& item : make_review_items(selected)) rows.push_back(to_json(item));
  write_jsonl(path, rows);
  return path;
}

inline std::vector<ReviewItem> load_review_queue(const std::filesystem::path& path) {
  std::vector<ReviewItem> items;
  auto rows = load_jsonl(path);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    items.push_back(review_item_from_json(rows[i], path.string() + " item " + std::to_string(i + 1)));
  }
  return items;
}

// Final text per reviewed caption: accepted -> candidate, corrected ->
// correction, rejected -> original. Fails while anything is pending.
inline std::map<std::string, std::string> apply_corrections(const std::vector<ReviewItem>& items) {
  std::vector<std::string> pending;
  for (const auto& r : items) {
    if (r.status == ReviewStatus::kPending) pending.push_back(r.caption_id);
  }
  if (!pending.empty()) {
    throw Error(ErrorCode::kPendingItems, "unresolved review item(s): " + join_ids(pending), pending);
  }
  std::map<std::string, std::string> finals;
  for (const auto& r : items) {
    switch (r.status) {
      case ReviewStatus::kAccepted: finals[r.caption_id] = r.candidate_text; break;
      case ReviewStatus::kCorrected: finals[r.caption_id] = *r.corrected_text; break;
      default: finals[r.caption_id] = r.original_text; break;
    }
  }
  return finals;
}

inline std::map<std::string, std::string> apply_corrections(const std::filesystem::path& queue_path) {
  return apply_corrections(load_review_queue(queue_path));
}

// Replaces caption texts in place. Changed captions lose their token
// annotations, which no longer match the text.
inline std::vector<CaptionRecord> apply_final_texts(std::vector<CaptionRecord> captions,
                                                    const std::map<std::string, std::string>& finals) {
  for (auto& c : captions) {
    auto it = finals.find(c.caption_id);
    if (it != finals.end() && it->second != c.text) {
      c.text = it->second;
      c.tokens.clear();
    }
  }
  return captions;
}

}  // namespace fgbench
