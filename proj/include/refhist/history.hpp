#pragma once

#include <algorithm>
#include <map>
#include <unordered_set>

#include "refhist/ref_extract.hpp"

namespace refhist {

enum class ActionKind { Creation, Modification, Deletion, Reinsertion, Unknown };

inline const char* to_string(ActionKind a) {
  switch (a) {
    case ActionKind::Creation: return "creation";
    case ActionKind::Modification: return "modification";
    case ActionKind::Deletion: return "deletion";
    case ActionKind::Reinsertion: return "reinsertion";
    case ActionKind::Unknown: return "unknown";
  }
  return "?";
}

struct RefSnapshot {
  ActionKind a = ActionKind::Unknown;
  std::vector<TokenId> t;  // empty iff a == Deletion
  std::int64_t r = 0;      // revision id
  std::uint64_t h = 0;
  EditorIdentity e;
  Instant z = 0;
  // bookkeeping for downstream stages (not part of the tuple itself)
  std::size_t rev_index = 0;  // index into the article's revision list
  std::pair<std::size_t, std::size_t> raw_span{0, 0};
  std::string raw_text;  // inner wikitext of the ref; empty for deletions
};

struct RefHistory {
  std::int64_t article_id = 0;
  std::vector<RefSnapshot> snapshots;
};

struct MatcherConfig {
  double jaccard_threshold = 0.2;
  bool subset_rule_enabled = true;
};

/// |x ∩ y| / |x ∪ y|; both empty => 0.
inline double jaccard(const std::vector<TokenId>& x, const std::vector<TokenId>& y) {
  if (x.empty() && y.empty()) return 0.0;
  std::unordered_set<TokenId> xs(x.begin(), x.end());
  std::size_t inter = 0;
  std::unordered_set<TokenId> seen;
  for (TokenId id : y)
    if (seen.insert(id).second && xs.count(id)) ++inter;
  std::size_t uni = xs.size() + seen.size() - inter;
  return uni == 0 ? 0.0 : static_cast<double>(inter) / static_cast<double>(uni);
}

/// Everything the matcher needs for one article.
struct ArticleData {
  Article article;
  ArticleAttribution attribution;
  std::vector<std::vector<RefOccurrence>> occurrences;  // per revision
};

/// Runs tokenization, attribution and ref extraction for one article.
inline ArticleData prepare_article(Article article, ExtractStats* stats = nullptr) {
  ArticleData data;
  data.attribution = attribute_article(article.revisions);
  data.occurrences.reserve(article.revisions.size());
  for (std::size_t i = 0; i < article.revisions.size(); ++i)
    data.occurrences.push_back(
        extract_refs(article.revisions[i], data.attribution.views[i], stats));
  data.article = std::move(article);
  return data;
}

namespace detail {

struct Chain {
  std::uint64_t h = 0;
  // (revision index, occurrence index), strictly increasing revision index
  std::vector<std::pair<std::size_t, std::size_t>> occs;
  bool consumed = false;
};

// Candidate selection shared by the modification and reinsertion steps:
// highest Jaccard above the threshold, else the subset fallback; ties broken
// by smallest minimum token id, then document position.
inline int pick_candidate(const std::vector<std::size_t>& cand_chains,
                          const std::vector<Chain>& chains,
                          const std::vector<std::vector<RefOccurrence>>& occs,
                          const std::vector<TokenId>& surviving, const MatcherConfig& cfg) {
  double best_jac = cfg.jaccard_threshold;
  int best = -1;
  auto better_tiebreak = [&](const RefOccurrence& a, const RefOccurrence& b) {
    TokenId amin = *std::min_element(a.t.begin(), a.t.end());
    TokenId bmin = *std::min_element(b.t.begin(), b.t.end());
    if (amin != bmin) return amin < bmin;
    return a.doc_position < b.doc_position;
  };
  auto occ_of = [&](std::size_t ci) -> const RefOccurrence& {
    const auto& [ri, oi] = chains[ci].occs.front();
    return occs[ri][oi];
  };
  for (std::size_t k = 0; k < cand_chains.size(); ++k) {
    const RefOccurrence& c = occ_of(cand_chains[k]);
    double jac = jaccard(surviving, c.t);
    if (jac > best_jac ||
        (best >= 0 && jac == best_jac && better_tiebreak(c, occ_of(cand_chains[static_cast<std::size_t>(best)])))) {
      best_jac = jac;
      best = static_cast<int>(k);
    }
  }
  if (best >= 0) return best;
  if (!cfg.subset_rule_enabled || surviving.empty()) return -1;
  std::unordered_set<TokenId> surv(surviving.begin(), surviving.end());
  for (std::size_t k = 0; k < cand_chains.size(); ++k) {
    const RefOccurrence& c = occ_of(cand_chains[k]);
    std::unordered_set<TokenId> cs(c.t.begin(), c.t.end());
    bool subset = true;
    for (TokenId id : surv)
      if (!cs.count(id)) {
        subset = false;
        break;
      }
    if (subset &&
        (best < 0 || better_tiebreak(c, occ_of(cand_chains[static_cast<std::size_t>(best)]))))
      best = static_cast<int>(k);
  }
  return best;
}

}  // namespace detail

/// Chains each article's RefOccurrences into per-reference histories.
/// Identical hashes link trivially; a reference missing from the successor
/// revision is matched against that revision's first-seen references by
/// Jaccard over surviving token ids (subset fallback), else recorded as
/// deleted and scanned forward for reinsertion.
inline std::vector<RefHistory> build_histories(const ArticleData& data,
                                               const MatcherConfig& cfg = {}) {
  const auto& occs = data.occurrences;
  const std::size_t n_revs = occs.size();

  // hash chains; per revision a hash occurs at most once
  std::vector<detail::Chain> chains;
  {
    std::map<std::uint64_t, std::size_t> by_hash;
    for (std::size_t ri = 0; ri < n_revs; ++ri)
      for (std::size_t oi = 0; oi < occs[ri].size(); ++oi) {
        auto [it, inserted] = by_hash.try_emplace(occs[ri][oi].h, chains.size());
        if (inserted) chains.push_back({occs[ri][oi].h, {}, false});
        chains[it->second].occs.emplace_back(ri, oi);
      }
  }
  // chains first seen in each revision, in document order
  std::vector<std::vector<std::size_t>> chains_born_at(n_revs);
  {
    std::vector<std::size_t> order(chains.size());
    for (std::size_t i = 0; i < chains.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      auto ka = std::make_pair(chains[a].occs.front().first,
                               occs[chains[a].occs.front().first][chains[a].occs.front().second].doc_position);
      auto kb = std::make_pair(chains[b].occs.front().first,
                               occs[chains[b].occs.front().first][chains[b].occs.front().second].doc_position);
      return ka < kb;
    });
    for (std::size_t i : order) chains_born_at[chains[i].occs.front().first].push_back(i);
  }

  auto live_candidates = [&](std::size_t rev) {
    std::vector<std::size_t> out;
    for (std::size_t ci : chains_born_at[rev])
      if (!chains[ci].consumed) out.push_back(ci);
    return out;
  };
  auto survivors = [&](const std::vector<TokenId>& t, std::size_t rev) {
    const auto& view = data.attribution.views[rev].ids;
    std::unordered_set<TokenId> in_view(view.begin(), view.end());
    std::vector<TokenId> out;
    for (TokenId id : t)
      if (in_view.count(id)) out.push_back(id);
    return out;
  };
  auto snapshot_of = [&](ActionKind a, std::size_t ri, std::size_t oi) {
    const RefOccurrence& occ = occs[ri][oi];
    RefSnapshot s;
    s.a = a;
    s.t = occ.t;
    s.r = occ.revision_id;
    s.h = occ.h;
    s.e = occ.e;
    s.z = occ.z;
    s.rev_index = ri;
    s.raw_span = occ.raw_span;
    s.raw_text = data.article.revisions[ri].wikitext.substr(occ.raw_span.first,
                                                            occ.raw_span.second - occ.raw_span.first);
    return s;
  };

  std::vector<RefHistory> histories;
  for (std::size_t ri = 0; ri < n_revs; ++ri) {
    for (std::size_t seed : chains_born_at[ri]) {
      if (chains[seed].consumed) continue;
      chains[seed].consumed = true;

      RefHistory hist;
      hist.article_id = data.article.article_id;
      std::size_t cur_chain = seed;
      std::size_t cur_pos = 0;  // index into chains[cur_chain].occs
      hist.snapshots.push_back(
          snapshot_of(ActionKind::Creation, chains[seed].occs[0].first, chains[seed].occs[0].second));

      std::size_t j = chains[seed].occs[0].first;
      bool alive = true;
      while (alive && j + 1 < n_revs) {
        const auto& chain_occs = chains[cur_chain].occs;
        if (cur_pos + 1 < chain_occs.size() && chain_occs[cur_pos + 1].first == j + 1) {
          ++cur_pos;  // same hash, no action
          ++j;
          continue;
        }
        const std::vector<TokenId>& t_cur = occs[chain_occs[cur_pos].first][chain_occs[cur_pos].second].t;
        auto surv = survivors(t_cur, j + 1);
        auto cands = live_candidates(j + 1);
        int pick = detail::pick_candidate(cands, chains, occs, surv, cfg);
        if (pick >= 0) {
          std::size_t ci = cands[static_cast<std::size_t>(pick)];
          chains[ci].consumed = true;
          cur_chain = ci;
          cur_pos = 0;
          hist.snapshots.push_back(snapshot_of(ActionKind::Modification, chains[ci].occs[0].first,
                                               chains[ci].occs[0].second));
          ++j;
          continue;
        }
        // deletion at R_{j+1}
        {
          RefSnapshot del;
          del.a = ActionKind::Deletion;
          del.h = occs[chain_occs[cur_pos].first][chain_occs[cur_pos].second].h;
          del.r = data.article.revisions[j + 1].revision_id;
          del.e = data.article.revisions[j + 1].editor;
          del.z = data.article.revisions[j + 1].timestamp;
          del.rev_index = j + 1;
          hist.snapshots.push_back(std::move(del));
        }
        // reinsertion scan from R_{j+2}: own hash first, then candidates
        alive = false;
        for (std::size_t k = j + 2; k < n_revs; ++k) {
          if (cur_pos + 1 < chain_occs.size() && chain_occs[cur_pos + 1].first == k) {
            ++cur_pos;
            hist.snapshots.push_back(snapshot_of(ActionKind::Reinsertion,
                                                 chains[cur_chain].occs[cur_pos].first,
                                                 chains[cur_chain].occs[cur_pos].second));
            j = k;
            alive = true;
            break;
          }
          auto surv_k = survivors(t_cur, k);
          auto cands_k = live_candidates(k);
          int pick_k = detail::pick_candidate(cands_k, chains, occs, surv_k, cfg);
          if (pick_k >= 0) {
            std::size_t ci = cands_k[static_cast<std::size_t>(pick_k)];
            chains[ci].consumed = true;
            cur_chain = ci;
            cur_pos = 0;
            hist.snapshots.push_back(snapshot_of(ActionKind::Reinsertion, chains[ci].occs[0].first,
                                                 chains[ci].occs[0].second));
            j = k;
            alive = true;
            break;
          }
        }
      }
      histories.push_back(std::move(hist));
    }
  }
  return histories;
}

}  // namespace refhist
