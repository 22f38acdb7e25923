#pragma once

#include <deque>
#include <map>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "refhist/tokenize.hpp"
#include "refhist/types.hpp"

namespace refhist {

using TokenId = std::int64_t;

/// Per-article token table; a token ID is assigned once, at first insertion,
/// and never re-bound to a different surface.
class TokenTable {
 public:
  TokenId add(std::string surface, std::int64_t origin_revision) {
    surfaces_.push_back(std::move(surface));
    origins_.push_back(origin_revision);
    return static_cast<TokenId>(surfaces_.size());  // ids are 1-based
  }
  const std::string& surface(TokenId id) const { return surfaces_.at(static_cast<std::size_t>(id - 1)); }
  std::int64_t origin_revision(TokenId id) const { return origins_.at(static_cast<std::size_t>(id - 1)); }
  std::size_t size() const { return surfaces_.size(); }

 private:
  std::vector<std::string> surfaces_;
  std::vector<std::int64_t> origins_;
};

struct TokenView {
  std::int64_t revision_id = 0;
  std::vector<TokenId> ids;  // reading order, parallel to tokenize(wikitext)
};

struct ArticleAttribution {
  TokenTable table;
  std::vector<TokenView> views;  // one per revision, same order as input
};

namespace detail {

struct SentenceRef {
  std::size_t flat_begin = 0;  // index into the revision's flat token list
  std::size_t size = 0;
  std::size_t para = 0;
  std::string key;  // '\x1f'-joined surfaces
};

struct ParagraphRef {
  std::size_t first_sentence = 0;
  std::size_t n_sentences = 0;
  std::size_t flat_begin = 0;
  std::size_t size = 0;
  std::string key;
};

struct RevisionShape {
  std::vector<std::string> tokens;  // flat surfaces
  std::vector<SentenceRef> sentences;
  std::vector<ParagraphRef> paragraphs;
};

inline std::string join_key(const std::vector<std::string>& toks, std::size_t begin,
                            std::size_t count) {
  std::string key;
  for (std::size_t i = 0; i < count; ++i) {
    if (i) key += '\x1f';
    key += toks[begin + i];
  }
  return key;
}

// Paragraph boundary: blank line. Sentence boundary: '.', '!' or '?' token,
// or paragraph end.
inline RevisionShape shape_revision(std::string_view text) {
  RevisionShape shape;
  // byte offsets where paragraphs start
  std::vector<std::pair<std::size_t, std::size_t>> para_ranges;
  {
    std::size_t pos = 0;
    std::size_t para_start = 0;
    bool in_para = false;
    std::size_t line_start = 0;
    auto flush = [&](std::size_t end) {
      if (in_para) para_ranges.emplace_back(para_start, end);
      in_para = false;
    };
    while (pos <= text.size()) {
      if (pos == text.size() || text[pos] == '\n') {
        std::string_view line = text.substr(line_start, pos - line_start);
        bool blank = line.find_first_not_of(" \t\r") == std::string_view::npos;
        if (blank) {
          flush(line_start);
        } else if (!in_para) {
          in_para = true;
          para_start = line_start;
        }
        if (pos == text.size()) {
          flush(text.size());
          break;
        }
        line_start = pos + 1;
      }
      ++pos;
    }
  }

  auto spans = tokenize_spans(text);
  shape.tokens.reserve(spans.size());
  for (auto& s : spans) shape.tokens.push_back(s.surface);

  std::size_t ti = 0;
  for (auto [pb, pe] : para_ranges) {
    ParagraphRef para;
    para.first_sentence = shape.sentences.size();
    para.flat_begin = ti;
    std::size_t sent_begin = ti;
    while (ti < spans.size() && spans[ti].begin < pe) {
      const std::string& sf = shape.tokens[ti];
      ++ti;
      bool terminator = (sf == "." || sf == "!" || sf == "?");
      bool para_end = (ti == spans.size() || spans[ti].begin >= pe);
      if (terminator || para_end) {
        SentenceRef sent;
        sent.flat_begin = sent_begin;
        sent.size = ti - sent_begin;
        sent.para = shape.paragraphs.size();
        sent.key = join_key(shape.tokens, sent.flat_begin, sent.size);
        shape.sentences.push_back(std::move(sent));
        sent_begin = ti;
      }
    }
    para.n_sentences = shape.sentences.size() - para.first_sentence;
    para.size = ti - para.flat_begin;
    para.key = join_key(shape.tokens, para.flat_begin, para.size);
    if (para.size > 0) shape.paragraphs.push_back(std::move(para));
  }
  return shape;
}

// LCS over surfaces; on backtrack ties, prefers matching the rightmost
// occurrences so that an insertion before an existing duplicate gets the
// fresh ID while the older instance keeps its own.
inline void lcs_assign(const std::vector<std::string>& toks_prev, std::size_t pb, std::size_t pn,
                       const std::vector<TokenId>& prev_ids,
                       const std::vector<std::string>& toks_cur, std::size_t cb, std::size_t cn,
                       std::vector<TokenId>& assign, std::vector<bool>& prev_carried) {
  std::vector<std::vector<std::uint32_t>> dp(pn + 1, std::vector<std::uint32_t>(cn + 1, 0));
  for (std::size_t i = 1; i <= pn; ++i)
    for (std::size_t j = 1; j <= cn; ++j) {
      if (toks_prev[pb + i - 1] == toks_cur[cb + j - 1])
        dp[i][j] = dp[i - 1][j - 1] + 1;
      else
        dp[i][j] = std::max(dp[i - 1][j], dp[i][j - 1]);
    }
  std::size_t i = pn, j = cn;
  while (i > 0 && j > 0) {
    if (toks_prev[pb + i - 1] == toks_cur[cb + j - 1] && dp[i][j] == dp[i - 1][j - 1] + 1) {
      assign[cb + j - 1] = prev_ids[pb + i - 1];
      prev_carried[pb + i - 1] = true;
      --i;
      --j;
    } else if (dp[i - 1][j] >= dp[i][j - 1]) {
      --i;
    } else {
      --j;
    }
  }
}

inline double overlap_coefficient(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() || b.empty()) return 0.0;
  const auto& small = a.size() <= b.size() ? a : b;
  const auto& big = a.size() <= b.size() ? b : a;
  std::size_t inter = 0;
  for (const auto& s : small) inter += big.count(s);
  return static_cast<double>(inter) / static_cast<double>(small.size());
}

// Pool of verbatim-deleted segments, keyed by surface sequence. FIFO per key.
class ReinsertionPool {
 public:
  void push(const std::string& key, std::vector<TokenId> ids) {
    pool_[key].push_back(std::move(ids));
  }
  // Reclaims the oldest entry for `key` whose ids are all currently dead.
  std::optional<std::vector<TokenId>> reclaim(const std::string& key,
                                              const std::unordered_set<TokenId>& live) {
    auto it = pool_.find(key);
    if (it == pool_.end()) return std::nullopt;
    auto& dq = it->second;
    for (std::size_t k = 0; k < dq.size(); ++k) {
      bool ok = true;
      for (TokenId id : dq[k])
        if (live.count(id)) {
          ok = false;
          break;
        }
      if (ok) {
        auto ids = std::move(dq[k]);
        dq.erase(dq.begin() + static_cast<std::ptrdiff_t>(k));
        if (dq.empty()) pool_.erase(it);
        return ids;
      }
    }
    return std::nullopt;
  }

 private:
  std::map<std::string, std::deque<std::vector<TokenId>>> pool_;
};

}  // namespace detail

/// Assigns stable token IDs across an article's revision sequence. Revision 0
/// gets fresh IDs in reading order; later revisions keep IDs for content
/// matched against the previous revision (paragraph hash, then sentence hash,
/// then LCS within paired sentences), reclaim IDs of verbatim-reinserted
/// deleted sentences/paragraphs, and mint fresh IDs for the rest.
inline ArticleAttribution attribute_article(const std::vector<RevisionRecord>& revisions) {
  ArticleAttribution out;
  detail::ReinsertionPool pool;
  detail::RevisionShape prev_shape;
  std::vector<TokenId> prev_ids;

  for (const RevisionRecord& rev : revisions) {
    detail::RevisionShape shape = detail::shape_revision(rev.wikitext);
    const std::size_t n = shape.tokens.size();
    std::vector<TokenId> assign(n, 0);
    std::vector<bool> prev_carried(prev_ids.size(), false);

    if (!out.views.empty()) {
      // live ids = ids present in the previous view
      std::unordered_set<TokenId> live(prev_ids.begin(), prev_ids.end());

      // 1. paragraph hash matching, greedy in order
      std::map<std::string, std::deque<std::size_t>> prev_para_by_key;
      for (std::size_t p = 0; p < prev_shape.paragraphs.size(); ++p)
        prev_para_by_key[prev_shape.paragraphs[p].key].push_back(p);
      std::vector<bool> prev_para_matched(prev_shape.paragraphs.size(), false);
      std::vector<bool> cur_para_matched(shape.paragraphs.size(), false);
      for (std::size_t p = 0; p < shape.paragraphs.size(); ++p) {
        auto it = prev_para_by_key.find(shape.paragraphs[p].key);
        if (it == prev_para_by_key.end() || it->second.empty()) continue;
        std::size_t q = it->second.front();
        it->second.pop_front();
        const auto& cp = shape.paragraphs[p];
        const auto& pp = prev_shape.paragraphs[q];
        for (std::size_t i = 0; i < cp.size; ++i) {
          assign[cp.flat_begin + i] = prev_ids[pp.flat_begin + i];
          prev_carried[pp.flat_begin + i] = true;
        }
        prev_para_matched[q] = cur_para_matched[p] = true;
      }

      // 2. whole-paragraph reinsertion
      for (std::size_t p = 0; p < shape.paragraphs.size(); ++p) {
        if (cur_para_matched[p]) continue;
        const auto& cp = shape.paragraphs[p];
        if (auto ids = pool.reclaim(cp.key, live)) {
          for (std::size_t i = 0; i < cp.size; ++i) {
            assign[cp.flat_begin + i] = (*ids)[i];
            live.insert((*ids)[i]);
          }
          cur_para_matched[p] = true;
        }
      }

      // collect unmatched sentences on both sides
      std::vector<std::size_t> prev_unmatched_sents, cur_unmatched_sents;
      for (std::size_t s = 0; s < prev_shape.sentences.size(); ++s)
        if (!prev_para_matched[prev_shape.sentences[s].para]) prev_unmatched_sents.push_back(s);
      for (std::size_t s = 0; s < shape.sentences.size(); ++s)
        if (!cur_para_matched[shape.sentences[s].para]) cur_unmatched_sents.push_back(s);

      // 3. sentence hash matching across unmatched paragraphs
      std::map<std::string, std::deque<std::size_t>> prev_sent_by_key;
      for (std::size_t s : prev_unmatched_sents)
        prev_sent_by_key[prev_shape.sentences[s].key].push_back(s);
      std::vector<bool> prev_sent_matched(prev_shape.sentences.size(), false);
      std::vector<bool> cur_sent_matched(shape.sentences.size(), false);
      for (std::size_t s : cur_unmatched_sents) {
        auto it = prev_sent_by_key.find(shape.sentences[s].key);
        if (it == prev_sent_by_key.end() || it->second.empty()) continue;
        std::size_t q = it->second.front();
        it->second.pop_front();
        const auto& cs = shape.sentences[s];
        const auto& ps = prev_shape.sentences[q];
        for (std::size_t i = 0; i < cs.size; ++i) {
          assign[cs.flat_begin + i] = prev_ids[ps.flat_begin + i];
          prev_carried[ps.flat_begin + i] = true;
        }
        prev_sent_matched[q] = cur_sent_matched[s] = true;
      }

      // 4. sentence reinsertion
      for (std::size_t s : cur_unmatched_sents) {
        if (cur_sent_matched[s]) continue;
        const auto& cs = shape.sentences[s];
        if (auto ids = pool.reclaim(cs.key, live)) {
          for (std::size_t i = 0; i < cs.size; ++i) {
            assign[cs.flat_begin + i] = (*ids)[i];
            live.insert((*ids)[i]);
          }
          cur_sent_matched[s] = true;
        }
      }

      // 5. pair remaining sentences by surface overlap, LCS inside each pair
      struct PairScore {
        double score;
        std::size_t dist;
        std::size_t prev_s;
        std::size_t cur_s;
      };
      std::vector<PairScore> scores;
      std::vector<std::set<std::string>> prev_sets(prev_shape.sentences.size()),
          cur_sets(shape.sentences.size());
      for (std::size_t q : prev_unmatched_sents) {
        if (prev_sent_matched[q]) continue;
        const auto& ps = prev_shape.sentences[q];
        prev_sets[q] = std::set<std::string>(prev_shape.tokens.begin() + static_cast<std::ptrdiff_t>(ps.flat_begin),
                                             prev_shape.tokens.begin() + static_cast<std::ptrdiff_t>(ps.flat_begin + ps.size));
      }
      for (std::size_t s : cur_unmatched_sents) {
        if (cur_sent_matched[s]) continue;
        const auto& cs = shape.sentences[s];
        cur_sets[s] = std::set<std::string>(shape.tokens.begin() + static_cast<std::ptrdiff_t>(cs.flat_begin),
                                            shape.tokens.begin() + static_cast<std::ptrdiff_t>(cs.flat_begin + cs.size));
      }
      for (std::size_t q : prev_unmatched_sents) {
        if (prev_sent_matched[q]) continue;
        for (std::size_t s : cur_unmatched_sents) {
          if (cur_sent_matched[s]) continue;
          double sc = detail::overlap_coefficient(prev_sets[q], cur_sets[s]);
          if (sc < 0.5) continue;
          std::size_t dist = prev_shape.sentences[q].flat_begin > shape.sentences[s].flat_begin
                                 ? prev_shape.sentences[q].flat_begin - shape.sentences[s].flat_begin
                                 : shape.sentences[s].flat_begin - prev_shape.sentences[q].flat_begin;
          scores.push_back({sc, dist, q, s});
        }
      }
      std::stable_sort(scores.begin(), scores.end(), [](const PairScore& a, const PairScore& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.dist != b.dist) return a.dist < b.dist;
        return std::tie(a.prev_s, a.cur_s) < std::tie(b.prev_s, b.cur_s);
      });
      for (const auto& p : scores) {
        if (prev_sent_matched[p.prev_s] || cur_sent_matched[p.cur_s]) continue;
        prev_sent_matched[p.prev_s] = cur_sent_matched[p.cur_s] = true;
        const auto& ps = prev_shape.sentences[p.prev_s];
        const auto& cs = shape.sentences[p.cur_s];
        detail::lcs_assign(prev_shape.tokens, ps.flat_begin, ps.size, prev_ids, shape.tokens,
                           cs.flat_begin, cs.size, assign, prev_carried);
      }

      // pool wholly-deleted paragraphs and deleted sentences for later
      // verbatim reinsertion
      for (std::size_t q = 0; q < prev_shape.paragraphs.size(); ++q) {
        if (prev_para_matched[q]) continue;
        const auto& pp = prev_shape.paragraphs[q];
        bool any_sentence_survived = false;
        for (std::size_t s = pp.first_sentence; s < pp.first_sentence + pp.n_sentences; ++s)
          if (prev_sent_matched[s]) any_sentence_survived = true;
        if (!any_sentence_survived) {
          std::vector<TokenId> ids(prev_ids.begin() + static_cast<std::ptrdiff_t>(pp.flat_begin),
                                   prev_ids.begin() + static_cast<std::ptrdiff_t>(pp.flat_begin + pp.size));
          pool.push(pp.key, std::move(ids));
        }
        for (std::size_t s = pp.first_sentence; s < pp.first_sentence + pp.n_sentences; ++s) {
          if (prev_sent_matched[s]) continue;
          const auto& ps = prev_shape.sentences[s];
          std::vector<TokenId> ids(prev_ids.begin() + static_cast<std::ptrdiff_t>(ps.flat_begin),
                                   prev_ids.begin() + static_cast<std::ptrdiff_t>(ps.flat_begin + ps.size));
          pool.push(ps.key, std::move(ids));
        }
      }
    }

    // fresh ids for everything still unassigned, in reading order
    for (std::size_t i = 0; i < n; ++i)
      if (assign[i] == 0) assign[i] = out.table.add(shape.tokens[i], rev.revision_id);

    TokenView view;
    view.revision_id = rev.revision_id;
    view.ids = assign;
    out.views.push_back(std::move(view));
    prev_shape = std::move(shape);
    prev_ids = std::move(assign);
  }
  return out;
}

}  // namespace refhist
