#pragma once

// Persistent data types and their file formats.
//
//   Embeddings  "FGE1" | u32 rows | u32 dim | rows*dim float32, all little-endian,
//               row-major; ids in a sidecar text file, one per line, aligned.
//   Scores      "FGS1" | u32 header length | JSON {query_ids, candidate_ids}
//               | rows*cols float32 little-endian, row-major.
//   Captions    JSONL {caption_id, image_id, text, tokens[{surface,pos,head,deprel}]}.
//   Manifest    JSON {name, image_ids, captions_path, image_embeddings_path,
//               text_embeddings_path, exclusion_ids, captions_per_image}.

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "fgbench/error.hpp"

namespace fgbench {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Low-level byte helpers.

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

inline std::uint32_t get_u32(std::string_view in, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + i])) << (8 * i);
  }
  return v;
}

inline void put_f32(std::string& out, float f) { put_u32(out, std::bit_cast<std::uint32_t>(f)); }

inline float get_f32(std::string_view in, std::size_t offset) {
  return std::bit_cast<float>(get_u32(in, offset));
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIo, "cannot open " + path.string() + " for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIo, "write failed for " + path.string());
}

inline std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.emplace_back(line);
    start = end + 1;
  }
  return lines;
}

inline std::vector<std::string> find_duplicates(const std::vector<std::string>& ids) {
  std::unordered_set<std::string> seen;
  std::vector<std::string> dups;
  for (const auto& id : ids) {
    if (!seen.insert(id).second) dups.push_back(id);
  }
  return dups;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Id lookup.

class IdIndex {
 public:
  IdIndex() = default;
  explicit IdIndex(const std::vector<std::string>& ids) {
    map_.reserve(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) map_.emplace(ids[i], i);
  }

  std::optional<std::size_t> find(const std::string& id) const {
    auto it = map_.find(id);
    if (it == map_.end()) return std::nullopt;
    return it->second;
  }

  bool contains(const std::string& id) const { return map_.count(id) > 0; }
  std::size_t size() const { return map_.size(); }

 private:
  std::unordered_map<std::string, std::size_t> map_;
};

// ---------------------------------------------------------------------------
// EmbeddingMatrix

struct EmbeddingMatrix {
  std::vector<std::string> ids;
  std::size_t rows = 0;
  std::size_t dim = 0;
  std::vector<float> values;

  std::span<const float> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::span<float> row(std::size_t i) { return {values.data() + i * dim, dim}; }
};

// Checks |ids| = rows, distinct ids, values sized rows*dim and all finite.
inline void check_embedding_matrix(const EmbeddingMatrix& m) {
  if (m.ids.size() != m.rows) {
    throw Error(ErrorCode::kCountMismatch, "embedding matrix has " + std::to_string(m.rows) +
                                               " rows but " + std::to_string(m.ids.size()) + " ids");
  }
  if (m.values.size() != m.rows * m.dim) {
    throw Error(ErrorCode::kFormat, "embedding payload size does not match rows*dim");
  }
  if (auto dups = detail::find_duplicates(m.ids); !dups.empty()) {
    throw Error(ErrorCode::kDuplicateId, "duplicate embedding id(s): " + join_ids(dups), dups);
  }
  for (std::size_t r = 0; r < m.rows; ++r) {
    for (std::size_t c = 0; c < m.dim; ++c) {
      if (!std::isfinite(m.values[r * m.dim + c])) {
        const std::string where = std::to_string(r) + "," + std::to_string(c);
        throw Error(ErrorCode::kNonFinite, "non-finite embedding value at (" + where + ")", {where});
      }
    }
  }
}

inline std::string encode_embeddings(const EmbeddingMatrix& m) {
  std::string out = "FGE1";
  out.reserve(12 + m.values.size() * 4);
  detail::put_u32(out, static_cast<std::uint32_t>(m.rows));
  detail::put_u32(out, static_cast<std::uint32_t>(m.dim));
  for (float v : m.values) detail::put_f32(out, v);
  return out;
}

inline std::string encode_ids(const std::vector<std::string>& ids) {
  std::string out;
  for (const auto& id : ids) {
    out += id;
    out += '\n';
  }
  return out;
}

inline std::vector<std::string> decode_ids(std::string_view text) {
  auto lines = detail::split_lines(text);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].empty()) {
      throw Error(ErrorCode::kFormat, "empty id on line " + std::to_string(i + 1));
    }
  }
  return lines;
}

inline EmbeddingMatrix decode_embeddings(std::string_view bytes, std::vector<std::string> ids) {
  if (bytes.size() < 12 || bytes.substr(0, 4) != "FGE1") {
    throw Error(ErrorCode::kFormat, "embedding file magic mismatch (expected FGE1)");
  }
  EmbeddingMatrix m;
  m.rows = detail::get_u32(bytes, 4);
  m.dim = detail::get_u32(bytes, 8);
  const std::size_t expected = 12 + m.rows * m.dim * 4;
  if (bytes.size() != expected) {
    throw Error(ErrorCode::kFormat, "embedding payload is " + std::to_string(bytes.size()) +
                                        " bytes, header implies " + std::to_string(expected));
  }
  if (ids.size() != m.rows) {
    throw Error(ErrorCode::kCountMismatch, "header declares " + std::to_string(m.rows) +
                                               " rows but ids file has " + std::to_string(ids.size()));
  }
  m.ids = std::move(ids);
  m.values.resize(m.rows * m.dim);
  for (std::size_t i = 0; i < m.values.size(); ++i) m.values[i] = detail::get_f32(bytes, 12 + 4 * i);
  check_embedding_matrix(m);
  return m;
}

// Conventional sidecar path: "<embeddings>.ids".
inline std::filesystem::path default_ids_path(const std::filesystem::path& embeddings) {
  return std::filesystem::path(embeddings.string() + ".ids");
}

inline EmbeddingMatrix load_embeddings(const std::filesystem::path& path,
                                       const std::filesystem::path& ids_path) {
  auto ids = decode_ids(detail::read_file(ids_path));
  return decode_embeddings(detail::read_file(path), std::move(ids));
}

inline EmbeddingMatrix load_embeddings(const std::filesystem::path& path) {
  return load_embeddings(path, default_ids_path(path));
}

inline void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path,
                             const std::filesystem::path& ids_path) {
  check_embedding_matrix(m);
  detail::write_file(path, encode_embeddings(m));
  detail::write_file(ids_path, encode_ids(m.ids));
}

inline void write_embeddings(const EmbeddingMatrix& m, const std::filesystem::path& path) {
  write_embeddings(m, path, default_ids_path(path));
}

// Copies the named rows, in the given order.
inline EmbeddingMatrix select_rows(const EmbeddingMatrix& m, const std::vector<std::string>& ids) {
  IdIndex index(m.ids);
  EmbeddingMatrix out;
  out.dim = m.dim;
  out.rows = ids.size();
  out.ids = ids;
  out.values.reserve(ids.size() * m.dim);
  for (const auto& id : ids) {
    auto r = index.find(id);
    if (!r) throw Error(ErrorCode::kUnknownId, "no embedding for id \"" + id + "\"", {id});
    auto src = m.row(*r);
    out.values.insert(out.values.end(), src.begin(), src.end());
  }
  return out;
}

// ---------------------------------------------------------------------------
// Captions

inline const std::set<std::string, std::less<>>& universal_pos_tags() {
  static const std::set<std::string, std::less<>> tags = {
      "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM",
      "PART", "PRON", "PROPN", "PUNCT", "SCONJ", "SYM", "VERB", "X"};
  return tags;
}

struct Token {
  std::string surface;
  std::string pos;  // Universal POS tag
  int head = -1;    // 0-based index of the head token, -1 for the root
  std::string deprel;

  bool operator==(const Token&) const = default;
};

struct CaptionRecord {
  std::string caption_id;
  std::string image_id;
  std::string text;
  std::vector<Token> tokens;

  bool operator==(const CaptionRecord&) const = default;
};

inline void check_tokens(const CaptionRecord& c) {
  const int n = static_cast<int>(c.tokens.size());
  for (int i = 0; i < n; ++i) {
    const Token& t = c.tokens[static_cast<std::size_t>(i)];
    if (!universal_pos_tags().count(t.pos)) {
      throw Error(ErrorCode::kParse, "caption \"" + c.caption_id + "\" token " + std::to_string(i) +
                                         " has non-UPOS tag \"" + t.pos + "\"",
                  {c.caption_id});
    }
    if (t.head != -1 && (t.head < 0 || t.head >= n || t.head == i)) {
      throw Error(ErrorCode::kParse, "caption \"" + c.caption_id + "\" token " + std::to_string(i) +
                                         " has invalid head " + std::to_string(t.head),
                  {c.caption_id});
    }
  }
}

inline Json to_json(const Token& t) {
  return Json{{"surface", t.surface}, {"pos", t.pos}, {"head", t.head}, {"deprel", t.deprel}};
}

inline Json to_json(const CaptionRecord& c) {
  Json tokens = Json::array();
  for (const auto& t : c.tokens) tokens.push_back(to_json(t));
  return Json{{"caption_id", c.caption_id}, {"image_id", c.image_id}, {"text", c.text},
              {"tokens", std::move(tokens)}};
}

namespace detail {

template <typename T>
T require_field(const Json& j, const char* key, const std::string& context) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::kParse, context + ": missing field \"" + key + "\"");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw Error(ErrorCode::kParse, context + ": field \"" + key + "\" has the wrong type");
  }
}

inline Json parse_json(std::string_view text, const std::string& context) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kParse, context + ": " + e.what());
  }
}

}  // namespace detail

inline CaptionRecord caption_from_json(const Json& j, const std::string& context) {
  CaptionRecord c;
  c.caption_id = detail::require_field<std::string>(j, "caption_id", context);
  c.image_id = detail::require_field<std::string>(j, "image_id", context);
  c.text = detail::require_field<std::string>(j, "text", context);
  if (j.contains("tokens")) {
    if (!j["tokens"].is_array()) throw Error(ErrorCode::kParse, context + ": tokens must be an array");
    for (const auto& tj : j["tokens"]) {
      Token t;
      t.surface = detail::require_field<std::string>(tj, "surface", context);
      t.pos = detail::require_field<std::string>(tj, "pos", context);
      t.head = detail::require_field<int>(tj, "head", context);
      t.deprel = detail::require_field<std::string>(tj, "deprel", context);
      c.tokens.push_back(std::move(t));
    }
  }
  check_tokens(c);
  return c;
}

// Parses every non-blank line of a JSONL document.
inline std::vector<Json> parse_jsonl(std::string_view text, const std::string& source) {
  std::vector<Json> out;
  auto lines = detail::split_lines(text);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (lines[i].find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(detail::parse_json(lines[i], source + ":" + std::to_string(i + 1)));
  }
  return out;
}

inline std::vector<Json> load_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(detail::read_file(path), path.string());
}

inline void write_jsonl(const std::filesystem::path& path, const std::vector<Json>& rows) {
  std::string out;
  for (const auto& r : rows) {
    out += r.dump();
    out += '\n';
  }
  detail::write_file(path, out);
}

inline std::vector<CaptionRecord> parse_captions(std::string_view text, const std::string& source) {
  std::vector<CaptionRecord> out;
  auto rows = parse_jsonl(text, source);
  out.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back(caption_from_json(rows[i], source + " record " + std::to_string(i + 1)));
  }
  std::vector<std::string> ids;
  for (const auto& c : out) ids.push_back(c.caption_id);
  if (auto dups = detail::find_duplicates(ids); !dups.empty()) {
    throw Error(ErrorCode::kDuplicateId, "duplicate caption id(s): " + join_ids(dups), dups);
  }
  return out;
}

inline std::vector<CaptionRecord> load_captions(const std::filesystem::path& path) {
  return parse_captions(detail::read_file(path), path.string());
}

inline void write_captions(const std::filesystem::path& path, const std::vector<CaptionRecord>& captions) {
  std::vector<Json> rows;
  rows.reserve(captions.size());
  for (const auto& c : captions) rows.push_back(to_json(c));
  write_jsonl(path, rows);
}

// Punctuation that attaches to the preceding word when rendering tokens.
inline bool attaches_left(std::string_view surface) {
  static constexpr std::array<std::string_view, 8> kLeft = {".", ",", ";", ":", "!", "?", ")", "'s"};
  return std::find(kLeft.begin(), kLeft.end(), surface) != kLeft.end();
}

// Renders token surfaces as text: single spaces, closing punctuation attached.
inline std::string render_tokens(const std::vector<std::string>& surfaces) {
  std::string out;
  for (const auto& s : surfaces) {
    if (!out.empty() && !attaches_left(s)) out += ' ';
    out += s;
  }
  return out;
}

// True when the token surfaces spell the caption text, ignoring whitespace.
inline bool tokens_reconstruct_text(const CaptionRecord& c) {
  auto squash = [](std::string_view s) {
    std::string out;
    for (char ch : s) {
      if (ch != ' ' && ch != '\t' && ch != '\n') out += ch;
    }
    return out;
  };
  std::string joined;
  for (const auto& t : c.tokens) joined += t.surface;
  return squash(joined) == squash(c.text);
}

// ---------------------------------------------------------------------------
// Manifest

struct Manifest {
  std::string name;
  std::vector<std::string> image_ids;
  std::filesystem::path captions_path;
  std::filesystem::path image_embeddings_path;
  std::filesystem::path text_embeddings_path;
  std::set<std::string> exclusion_ids;
  std::size_t captions_per_image = 0;

  // Loaded from captions_path; file order.
  std::vector<CaptionRecord> captions;

  // Caption ids per image, in caption file order. Images without captions
  // are absent (they are candidates only, never targets).
  std::map<std::string, std::vector<std::string>> captions_by_image() const {
    std::map<std::string, std::vector<std::string>> out;
    for (const auto& c : captions) out[c.image_id].push_back(c.caption_id);
    return out;
  }
};

// Validates and materializes a manifest document. Relative paths resolve
// against `base_dir`; `captions_text` is the content of the captions file.
inline Manifest parse_manifest(std::string_view manifest_text, const std::filesystem::path& base_dir,
                               std::optional<std::string_view> captions_text = std::nullopt) {
  const std::string ctx = "manifest";
  Json j = detail::parse_json(manifest_text, ctx);
  if (!j.is_object()) throw Error(ErrorCode::kParse, "manifest must be a JSON object");
  Manifest m;
  m.name = detail::require_field<std::string>(j, "name", ctx);
  m.image_ids = detail::require_field<std::vector<std::string>>(j, "image_ids", ctx);
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_absolute() ? path : base_dir / path;
  };
  m.captions_path = resolve(detail::require_field<std::string>(j, "captions_path", ctx));
  m.image_embeddings_path = resolve(detail::require_field<std::string>(j, "image_embeddings_path", ctx));
  m.text_embeddings_path = resolve(detail::require_field<std::string>(j, "text_embeddings_path", ctx));
  if (j.contains("exclusion_ids")) {
    auto ex = detail::require_field<std::vector<std::string>>(j, "exclusion_ids", ctx);
    m.exclusion_ids.insert(ex.begin(), ex.end());
  }

  if (auto dups = detail::find_duplicates(m.image_ids); !dups.empty()) {
    throw Error(ErrorCode::kDuplicateId, "duplicate image id(s) in manifest: " + join_ids(dups), dups);
  }
  std::vector<std::string> overlap;
  for (const auto& id : m.image_ids) {
    if (m.exclusion_ids.count(id)) overlap.push_back(id);
  }
  if (!overlap.empty()) {
    throw Error(ErrorCode::kExclusionOverlap,
                "image pool overlaps the exclusion list: " + join_ids(overlap), overlap);
  }

  m.captions = captions_text ? parse_captions(*captions_text, m.captions_path.string())
                             : load_captions(m.captions_path);
  IdIndex images(m.image_ids);
  std::vector<std::string> dangling;
  for (const auto& c : m.captions) {
    if (!images.contains(c.image_id)) dangling.push_back(c.caption_id + "->" + c.image_id);
  }
  if (!dangling.empty()) {
    throw Error(ErrorCode::kDanglingReference,
                "caption(s) reference images missing from image_ids: " + join_ids(dangling), dangling);
  }

  if (j.contains("captions_per_image")) {
    const long long value = detail::require_field<long long>(j, "captions_per_image", ctx);
    if (value < 1) throw Error(ErrorCode::kParse, "captions_per_image must be >= 1");
    m.captions_per_image = static_cast<std::size_t>(value);
  } else {
    // Inferred as captions per captioned image.
    const auto by_image = m.captions_by_image();
    m.captions_per_image = by_image.empty() ? 0 : m.captions.size() / by_image.size();
  }
  return m;
}

inline Manifest load_manifest(const std::filesystem::path& path) {
  return parse_manifest(detail::read_file(path), path.parent_path());
}

inline Json to_json(const Manifest& m) {
  return Json{{"name", m.name},
              {"image_ids", m.image_ids},
              {"captions_path", m.captions_path.string()},
              {"image_embeddings_path", m.image_embeddings_path.string()},
              {"text_embeddings_path", m.text_embeddings_path.string()},
              {"exclusion_ids", std::vector<std::string>(m.exclusion_ids.begin(), m.exclusion_ids.end())},
              {"captions_per_image", m.captions_per_image}};
}

// ---------------------------------------------------------------------------
// ScoreMatrix

struct ScoreMatrix {
  std::vector<std::string> query_ids;
  std::vector<std::string> candidate_ids;
  std::vector<float> scores;  // row-major |queries| x |candidates|

  std::size_t rows() const { return query_ids.size(); }
  std::size_t cols() const { return candidate_ids.size(); }
  std::span<const float> row(std::size_t i) const { return {scores.data() + i * cols(), cols()}; }
  std::span<float> row(std::size_t i) { return {scores.data() + i * cols(), cols()}; }
};

inline void check_score_matrix(const ScoreMatrix& s) {
  if (s.scores.size() != s.rows() * s.cols()) {
    throw Error(ErrorCode::kFormat, "score payload size does not match queries*candidates");
  }
  if (auto d = detail::find_duplicates(s.query_ids); !d.empty()) {
    throw Error(ErrorCode::kDuplicateId, "duplicate query id(s): " + join_ids(d), d);
  }
  if (auto d = detail::find_duplicates(s.candidate_ids); !d.empty()) {
    throw Error(ErrorCode::kDuplicateId, "duplicate candidate id(s): " + join_ids(d), d);
  }
  for (std::size_t i = 0; i < s.scores.size(); ++i) {
    if (!std::isfinite(s.scores[i])) {
      const std::string where = std::to_string(i / std::max<std::size_t>(s.cols(), 1)) + "," +
                                std::to_string(i % std::max<std::size_t>(s.cols(), 1));
      throw Error(ErrorCode::kNonFinite, "non-finite score at (" + where + ")", {where});
    }
  }
}

inline std::string encode_scores(const ScoreMatrix& s) {
  const std::string header = Json{{"query_ids", s.query_ids}, {"candidate_ids", s.candidate_ids}}.dump();
  std::string out = "FGS1";
  detail::put_u32(out, static_cast<std::uint32_t>(header.size()));
  out += header;
  out.reserve(out.size() + s.scores.size() * 4);
  for (float v : s.scores) detail::put_f32(out, v);
  return out;
}

inline ScoreMatrix decode_scores(std::string_view bytes) {
  if (bytes.size() < 8 || bytes.substr(0, 4) != "FGS1") {
    throw Error(ErrorCode::kFormat, "score file magic mismatch (expected FGS1)");
  }
  const std::size_t header_len = detail::get_u32(bytes, 4);
  if (bytes.size() < 8 + header_len) throw Error(ErrorCode::kFormat, "score header truncated");
  Json header = detail::parse_json(bytes.substr(8, header_len), "score header");
  ScoreMatrix s;
  s.query_ids = detail::require_field<std::vector<std::string>>(header, "query_ids", "score header");
  s.candidate_ids = detail::require_field<std::vector<std::string>>(header, "candidate_ids", "score header");
  const std::size_t n = s.query_ids.size() * s.candidate_ids.size();
  if (bytes.size() != 8 + header_len + 4 * n) {
    throw Error(ErrorCode::kFormat, "score payload size does not match header");
  }
  s.scores.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.scores[i] = detail::get_f32(bytes, 8 + header_len + 4 * i);
  check_score_matrix(s);
  return s;
}

inline ScoreMatrix load_scores(const std::filesystem::path& path) {
  return decode_scores(detail::read_file(path));
}

inline void write_scores(const ScoreMatrix& s, const std::filesystem::path& path) {
  check_score_matrix(s);
  detail::write_file(path, encode_scores(s));
}

// ---------------------------------------------------------------------------
// Dataset validation

struct ValidationIssue {
  std::string kind;  // caption-count, missing-embedding, embedding-file, exclusion-overlap, text-mismatch
  std::string subject;
  std::string message;

  bool operator==(const ValidationIssue&) const = default;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;
  bool ok() const { return issues.empty(); }
};

inline Json to_json(const ValidationReport& r) {
  Json issues = Json::array();
  for (const auto& i : r.issues) {
    issues.push_back(Json{{"kind", i.kind}, {"subject", i.subject}, {"message", i.message}});
  }
  return Json{{"ok", r.ok()}, {"issues", std::move(issues)}};
}

// Cross-checks a loaded manifest against its embedding files. Problems are
// collected, never thrown.
inline ValidationReport validate_dataset(const Manifest& m) {
  ValidationReport report;
  auto add = [&](std::string kind, std::string subject, std::string message) {
    report.issues.push_back({std::move(kind), std::move(subject), std::move(message)});
  };

  for (const auto& [image, caps] : m.captions_by_image()) {
    if (caps.size() != m.captions_per_image) {
      add("caption-count", image,
          "image \"" + image + "\": caption count " + std::to_string(caps.size()) + " ≠ " +
              std::to_string(m.captions_per_image));
    }
  }
  for (const auto& c : m.captions) {
    if (!c.tokens.empty() && !tokens_reconstruct_text(c)) {
      add("text-mismatch", c.caption_id, "caption \"" + c.caption_id + "\": tokens do not reconstruct text");
    }
  }

  std::optional<std::size_t> image_dim;
  try {
    EmbeddingMatrix images = load_embeddings(m.image_embeddings_path);
    image_dim = images.dim;
    IdIndex index(images.ids);
    for (const auto& id : m.image_ids) {
      if (!index.contains(id)) add("missing-embedding", id, "image \"" + id + "\" has no image embedding");
    }
    for (const auto& id : images.ids) {
      if (m.exclusion_ids.count(id)) {
        add("exclusion-overlap", id, "candidate image \"" + id + "\" is in the exclusion list");
      }
    }
  } catch (const Error& e) {
    add("embedding-file", m.image_embeddings_path.string(), e.what());
  }

  try {
    EmbeddingMatrix texts = load_embeddings(m.text_embeddings_path);
    IdIndex index(texts.ids);
    if (image_dim && *image_dim != texts.dim) {
      add("embedding-file", m.text_embeddings_path.string(),
          "text embedding dim " + std::to_string(texts.dim) + " ≠ image embedding dim " +
              std::to_string(*image_dim));
    }
    for (const auto& c : m.captions) {
      if (!index.contains(c.caption_id)) {
        add("missing-embedding", c.caption_id, "caption \"" + c.caption_id + "\" has no text embedding");
      }
    }
  } catch (const Error& e) {
    add("embedding-file", m.text_embeddings_path.string(), e.what());
  }
  return report;
}

}  // namespace fgbench
