#pragma once

// Test-only oracles and fixtures. The oracles here are brute force and share
// no code with the library's ranking or recall paths.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <unistd.h>

#include "fgbench/fgbench.hpp"

namespace fgtest {

using fgbench::CaptionRecord;
using fgbench::Token;

// Column order by (-score, index) via a full stable sort.
inline std::vector<std::size_t> full_sort_order(const std::vector<float>& row) {
  std::vector<std::size_t> idx(row.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return row[a] > row[b]; });
  return idx;
}

inline std::vector<float> row_of(const fgbench::ScoreMatrix& s, std::size_t i) {
  auto r = s.row(i);
  return {r.begin(), r.end()};
}

// 1-based position of `target` after sorting with ties placed before it.
inline std::size_t ties_first_rank(const std::vector<float>& row, std::size_t target) {
  std::vector<std::pair<float, int>> keyed;
  for (std::size_t j = 0; j < row.size(); ++j) keyed.emplace_back(row[j], j == target ? 1 : 0);
  std::sort(keyed.begin(), keyed.end(), [](const auto& a, const auto& b) {
    return a.first > b.first || (a.first == b.first && a.second < b.second);
  });
  for (std::size_t p = 0; p < keyed.size(); ++p) {
    if (keyed[p].second == 1) return p + 1;
  }
  return 0;
}

// Percentage of queries with any truth id among the first K of the full sort.
inline std::map<std::size_t, double> membership_recall(const fgbench::ScoreMatrix& s,
                                                       const fgbench::GroundTruth& truth,
                                                       const std::vector<std::size_t>& ks) {
  std::map<std::size_t, double> out;
  for (std::size_t k : ks) {
    std::size_t hits = 0;
    for (std::size_t i = 0; i < s.rows(); ++i) {
      const auto order = full_sort_order(row_of(s, i));
      const auto& t = truth.at(s.query_ids[i]);
      for (std::size_t p = 0; p < std::min(k, order.size()); ++p) {
        if (t.count(s.candidate_ids[order[p]])) {
          ++hits;
          break;
        }
      }
    }
    out[k] = 100.0 * static_cast<double>(hits) / static_cast<double>(s.rows());
  }
  return out;
}

class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static int counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("fgbench-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// ---------------------------------------------------------------------------
// Annotated parse fixtures

class SentenceBuilder {
 public:
  int add(std::string surface, std::string pos, std::string deprel) {
    tokens_.push_back({std::move(surface), std::move(pos), -1, std::move(deprel)});
    return static_cast<int>(tokens_.size()) - 1;
  }
  void attach(int child, int head) { tokens_[static_cast<std::size_t>(child)].head = head; }

  CaptionRecord build(std::string caption_id, std::string image_id) const {
    CaptionRecord c;
    c.caption_id = std::move(caption_id);
    c.image_id = std::move(image_id);
    c.tokens = tokens_;
    std::vector<std::string> s;
    for (const auto& t : tokens_) s.push_back(t.surface);
    c.text = fgbench::render_tokens(s);
    return c;
  }

 private:
  std::vector<Token> tokens_;
};

// spaCy-style parse of the worked example sentence.
inline CaptionRecord frisbee_spacy() {
  SentenceBuilder b;
  const int a1 = b.add("a", "DET", "det");
  const int young = b.add("young", "ADJ", "amod");
  const int boy = b.add("boy", "NOUN", "nsubj");
  const int play = b.add("play", "VERB", "ROOT");
  const int a2 = b.add("a", "DET", "det");
  const int frisbee = b.add("frisbee", "NOUN", "dobj");
  const int on = b.add("on", "ADP", "prep");
  const int top = b.add("top", "NOUN", "pobj");
  const int of = b.add("of", "ADP", "prep");
  const int a3 = b.add("a", "DET", "det");
  const int mountain = b.add("mountain", "NOUN", "pobj");
  const int dot = b.add(".", "PUNCT", "punct");
  b.attach(a1, boy);
  b.attach(young, boy);
  b.attach(boy, play);
  b.attach(a2, frisbee);
  b.attach(frisbee, play);
  b.attach(on, play);
  b.attach(top, on);
  b.attach(of, top);
  b.attach(a3, mountain);
  b.attach(mountain, of);
  b.attach(dot, play);
  return b.build("frisbee-spacy", "img-frisbee");
}

// Universal Dependencies style parse of the same sentence.
inline CaptionRecord frisbee_ud() {
  SentenceBuilder b;
  const int a1 = b.add("a", "DET", "det");
  const int young = b.add("young", "ADJ", "amod");
  const int boy = b.add("boy", "NOUN", "nsubj");
  const int play = b.add("play", "VERB", "root");
  const int a2 = b.add("a", "DET", "det");
  const int frisbee = b.add("frisbee", "NOUN", "obj");
  const int on = b.add("on", "ADP", "case");
  const int top = b.add("top", "NOUN", "obl");
  const int of = b.add("of", "ADP", "case");
  const int a3 = b.add("a", "DET", "det");
  const int mountain = b.add("mountain", "NOUN", "nmod");
  const int dot = b.add(".", "PUNCT", "punct");
  b.attach(a1, boy);
  b.attach(young, boy);
  b.attach(boy, play);
  b.attach(a2, frisbee);
  b.attach(frisbee, play);
  b.attach(on, top);
  b.attach(top, play);
  b.attach(of, mountain);
  b.attach(a3, mountain);
  b.attach(mountain, top);
  b.attach(dot, play);
  return b.build("frisbee-ud", "img-frisbee");
}

inline CaptionRecord red_car() {
  SentenceBuilder b;
  const int a = b.add("a", "DET", "det");
  const int red = b.add("red", "ADJ", "amod");
  const int car = b.add("car", "NOUN", "ROOT");
  const int dot = b.add(".", "PUNCT", "punct");
  b.attach(a, car);
  b.attach(red, car);
  b.attach(dot, car);
  return b.build("red-car", "img-car");
}

inline CaptionRecord dog_runs() {
  SentenceBuilder b;
  const int a = b.add("a", "DET", "det");
  const int dog = b.add("dog", "NOUN", "nsubj");
  const int runs = b.add("runs", "VERB", "ROOT");
  const int dot = b.add(".", "PUNCT", "punct");
  b.attach(a, dog);
  b.attach(dog, runs);
  b.attach(dot, runs);
  return b.build("dog-runs", "img-dog");
}

// "a woman standing on a sidewalk" without a final period.
inline CaptionRecord woman_sidewalk() {
  SentenceBuilder b;
  const int a1 = b.add("a", "DET", "det");
  const int woman = b.add("woman", "NOUN", "ROOT");
  const int standing = b.add("standing", "VERB", "acl");
  const int on = b.add("on", "ADP", "prep");
  const int a2 = b.add("a", "DET", "det");
  const int sidewalk = b.add("sidewalk", "NOUN", "pobj");
  b.attach(a1, woman);
  b.attach(standing, woman);
  b.attach(on, standing);
  b.attach(a2, sidewalk);
  b.attach(sidewalk, on);
  return b.build("woman-sidewalk", "img-woman");
}

struct AnnotatedSentence {
  CaptionRecord caption;
  std::size_t pp_count = 0;  // prepositional phrases attached to the clause
};

// Deterministic 50-sentence fixture alternating spaCy and UD parse styles,
// with optional adjectives, objects, multi-word and repeated prepositional
// phrases, and noun-rooted fragments.
inline std::vector<AnnotatedSentence> annotated_fixture(std::size_t n = 50, std::uint64_t seed = 11) {
  static const std::vector<std::string> subjects = {"man", "woman", "dog", "boy", "girl", "cat", "player", "child"};
  static const std::vector<std::string> adjectives = {"young", "red", "small", "old", "white", "tall"};
  static const std::vector<std::string> verbs = {"sits", "stands", "plays", "runs", "walks", "rides"};
  static const std::vector<std::string> objects = {"frisbee", "ball", "bike", "skateboard", "kite"};
  static const std::vector<std::string> preps = {"on", "in", "near", "under", "behind", "beside"};
  static const std::vector<std::string> places = {"bench", "table", "field", "street", "beach", "park", "hill"};

  fgbench::Rng rng(seed);
  auto pick = [&](const std::vector<std::string>& v) { return v[rng.below(v.size())]; };

  std::vector<AnnotatedSentence> out;
  for (std::size_t s = 0; s < n; ++s) {
    const bool ud = s % 2 == 1;
    const bool noun_root = s % 10 == 7;
    const bool with_adj = rng.below(2) == 0;
    const bool with_obj = !noun_root && rng.below(2) == 0;
    const std::size_t n_pp = 1 + (rng.below(3) == 0 ? 1 : 0);
    const bool multiword = rng.below(4) == 0;

    SentenceBuilder b;
    const int det = b.add("a", "DET", "det");
    int adj = -1;
    if (with_adj) adj = b.add(pick(adjectives), "ADJ", "amod");
    const int subj = b.add(pick(subjects), "NOUN", noun_root ? (ud ? "root" : "ROOT") : "nsubj");
    b.attach(det, subj);
    if (adj >= 0) b.attach(adj, subj);
    int anchor = subj;
    if (!noun_root) {
      anchor = b.add(pick(verbs), "VERB", ud ? "root" : "ROOT");
      b.attach(subj, anchor);
    }
    if (with_obj) {
      const int odet = b.add("a", "DET", "det");
      const int obj = b.add(pick(objects), "NOUN", ud ? "obj" : "dobj");
      b.attach(odet, obj);
      b.attach(obj, anchor);
    }
    for (std::size_t p = 0; p < n_pp; ++p) {
      const bool mw = multiword && p == 0;
      const std::string prep = mw ? "on" : pick(preps);
      if (!ud) {
        const int adp = b.add(prep, "ADP", "prep");
        b.attach(adp, anchor);
        if (mw) {
          const int top = b.add("top", "NOUN", "pobj");
          const int of = b.add("of", "ADP", "prep");
          const int pdet = b.add("the", "DET", "det");
          const int place = b.add(pick(places), "NOUN", "pobj");
          b.attach(top, adp);
          b.attach(of, top);
          b.attach(pdet, place);
          b.attach(place, of);
        } else {
          const int pdet = b.add("the", "DET", "det");
          const int place = b.add(pick(places), "NOUN", "pobj");
          b.attach(pdet, place);
          b.attach(place, adp);
        }
      } else {
        const int adp = b.add(prep, "ADP", "case");
        if (mw) {
          const int top = b.add("top", "NOUN", noun_root ? "nmod" : "obl");
          const int of = b.add("of", "ADP", "case");
          const int pdet = b.add("the", "DET", "det");
          const int place = b.add(pick(places), "NOUN", "nmod");
          b.attach(adp, top);
          b.attach(top, anchor);
          b.attach(of, place);
          b.attach(pdet, place);
          b.attach(place, top);
        } else {
          const int pdet = b.add("the", "DET", "det");
          const int place = b.add(pick(places), "NOUN", noun_root ? "nmod" : "obl");
          b.attach(adp, place);
          b.attach(pdet, place);
          b.attach(place, anchor);
        }
      }
    }
    const int dot = b.add(".", "PUNCT", "punct");
    b.attach(dot, anchor);
    out.push_back({b.build("s" + std::to_string(s), "img-s" + std::to_string(s)), n_pp});
  }
  return out;
}

// Lower-cased word multiset of a text, punctuation dropped.
inline std::multiset<std::string> word_multiset(const std::string& text) {
  auto words = fgbench::HashedEmbedder::words(text);
  return {words.begin(), words.end()};
}

inline std::multiset<std::string> token_multiset(const CaptionRecord& c) {
  std::multiset<std::string> out;
  for (const auto& t : c.tokens) {
    if (t.pos != "PUNCT") out.insert(fgbench::text::lower(t.surface));
  }
  return out;
}

}  // namespace fgtest
