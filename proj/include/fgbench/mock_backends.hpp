#pragma once

// Deterministic stand-ins for the model backends, so every pipeline path
// runs without model weights:
//   HashedEmbedder  bag-of-words text embedding from seeded word vectors;
//                   image embeddings derived from an image's captions
//   mock_merge      template re-insertion of a detail into its sentence
//   mock_clipscore  cosine between a hashed text embedding and an image row

#include <cctype>
#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "fgbench/dataset.hpp"
#include "fgbench/random.hpp"
#include "fgbench/similarity.hpp"
#include "fgbench/text_renovator.hpp"

namespace fgbench {

class HashedEmbedder {
 public:
  HashedEmbedder(std::size_t dim, std::uint64_t seed) : dim_(dim), seed_(seed) {}

  std::size_t dim() const { return dim_; }

  std::vector<double> word_vector(std::string_view word) const {
    Rng rng(mix_seed(seed_, word));
    std::vector<double> v(dim_);
    for (double& x : v) x = rng.normal();
    return v;
  }

  static std::vector<std::string> words(std::string_view s) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
      const auto c = static_cast<unsigned char>(ch);
      if (std::isalnum(c)) {
        cur += static_cast<char>(std::tolower(c));
      } else if (!cur.empty()) {
        out.push_back(std::move(cur));
        cur.clear();
      }
    }
    if (!cur.empty()) out.push_back(std::move(cur));
    return out;
  }

  // Unit-norm sum of word vectors.
  std::vector<float> embed_text(std::string_view s) const {
    std::vector<double> acc(dim_, 0.0);
    auto ws = words(s);
    if (ws.empty()) ws.push_back("");
    for (const auto& w : ws) {
      const auto v = word_vector(w);
      for (std::size_t i = 0; i < dim_; ++i) acc[i] += v[i];
    }
    return unit(acc);
  }

  // Unit-norm mean of the image's caption embeddings plus seeded noise;
  // caption-less images get a pure noise vector.
  std::vector<float> embed_image(std::string_view image_id, const std::vector<std::string>& caption_texts,
                                 double noise = 0.1) const {
    std::vector<double> acc(dim_, 0.0);
    for (const auto& t : caption_texts) {
      const auto e = embed_text(t);
      for (std::size_t i = 0; i < dim_; ++i) acc[i] += e[i];
    }
    if (!caption_texts.empty()) {
      for (double& x : acc) x /= static_cast<double>(caption_texts.size());
    }
    Rng rng(mix_seed(seed_, std::string("image:") + std::string(image_id)));
    const double scale = caption_texts.empty() ? 1.0 : noise / std::sqrt(static_cast<double>(dim_));
    for (double& x : acc) x += scale * rng.normal();
    return unit(acc);
  }

  EmbeddingMatrix embed_captions(const std::vector<CaptionRecord>& captions) const {
    EmbeddingMatrix m;
    m.dim = dim_;
    for (const auto& c : captions) {
      m.ids.push_back(c.caption_id);
      const auto e = embed_text(c.text);
      m.values.insert(m.values.end(), e.begin(), e.end());
    }
    m.rows = m.ids.size();
    return m;
  }

  EmbeddingMatrix embed_images(const std::vector<std::string>& image_ids,
                               const std::vector<CaptionRecord>& captions, double noise = 0.1) const {
    std::map<std::string, std::vector<std::string>> texts;
    for (const auto& c : captions) texts[c.image_id].push_back(c.text);
    EmbeddingMatrix m;
    m.dim = dim_;
    for (const auto& id : image_ids) {
      m.ids.push_back(id);
      auto it = texts.find(id);
      const auto e = embed_image(id, it == texts.end() ? std::vector<std::string>{} : it->second, noise);
      m.values.insert(m.values.end(), e.begin(), e.end());
    }
    m.rows = m.ids.size();
    return m;
  }

 private:
  std::vector<float> unit(const std::vector<double>& v) const {
    double n = 0.0;
    for (double x : v) n += x * x;
    n = std::sqrt(n);
    std::vector<float> out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(n > 0 ? v[i] / n : 0.0);
    return out;
  }

  std::size_t dim_;
  std::uint64_t seed_;
};

// Re-inserts a detail sentence into its rest sentence:
//   "it is <phrase>."      -> rest + " " + phrase + "."
//   "the <noun> is <adj>." -> adj placed before the first <noun> in rest
// Anything else is appended as a trailing clause.
inline std::string mock_merge(std::string_view rest, std::string_view detail) {
  const std::string body = text::strip_terminal(rest);
  const std::string d = text::strip_terminal(detail);
  if (text::starts_with_ci(d, "it is ")) return body + " " + d.substr(6) + ".";
  if (text::starts_with_ci(d, "the ")) {
    const auto is_pos = d.find(" is ", 4);
    if (is_pos != std::string::npos) {
      const std::string noun = d.substr(4, is_pos - 4);
      const std::string adj = d.substr(is_pos + 4);
      auto words = text::simple_tokenize(body);
      for (std::size_t i = 0; i < words.size(); ++i) {
        if (text::lower(words[i]) == text::lower(noun)) {
          auto adj_words = text::simple_tokenize(adj);
          words.insert(words.begin() + static_cast<std::ptrdiff_t>(i), adj_words.begin(), adj_words.end());
          return render_tokens(words) + ".";
        }
      }
    }
  }
  return body + " " + d + ".";
}

inline double mock_clipscore(const HashedEmbedder& embedder, std::string_view text, std::span<const float> image) {
  const auto e = embedder.embed_text(text);
  const double n = norm(image);
  return n == 0.0 ? 0.0 : dot(std::span<const float>(e), image) / n;
}

// Scores scorer-contract request rows against an image embedding matrix.
inline std::vector<Json> mock_score_requests(const HashedEmbedder& embedder, const std::vector<Json>& requests,
                                             const EmbeddingMatrix& images) {
  IdIndex index(images.ids);
  std::vector<Json> out;
  for (std::size_t i = 0; i < requests.size(); ++i) {
    const std::string ctx = "score request " + std::to_string(i + 1);
    const auto cid = detail::require_field<std::string>(requests[i], "caption_id", ctx);
    const auto iid = detail::require_field<std::string>(requests[i], "image_id", ctx);
    const auto text = detail::require_field<std::string>(requests[i], "text", ctx);
    auto r = index.find(iid);
    if (!r) throw Error(ErrorCode::kUnknownId, ctx + ": no image embedding for \"" + iid + "\"", {iid});
    out.push_back(Json{{"caption_id", cid}, {"clipscore", mock_clipscore(embedder, text, images.row(*r))}});
  }
  return out;
}

}  // namespace fgbench
