#pragma once

#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <regex>

#include "refhist/history.hpp"

namespace refhist {

enum class DidKind { DOI, ISBN, PMID, PMCID, ISSN, ARXIV };

inline const char* to_string(DidKind k) {
  switch (k) {
    case DidKind::DOI: return "doi";
    case DidKind::ISBN: return "isbn";
    case DidKind::PMID: return "pmid";
    case DidKind::PMCID: return "pmcid";
    case DidKind::ISSN: return "issn";
    case DidKind::ARXIV: return "arxiv";
  }
  return "?";
}

struct DidAnnotation {
  DidKind kind;
  std::string value;            // normalized
  std::size_t snapshot_index = 0;  // first snapshot containing it
  bool operator==(const DidAnnotation&) const = default;
};

enum class LifecycleClass { DBorn, DLag, NoDid };

inline const char* to_string(LifecycleClass c) {
  switch (c) {
    case LifecycleClass::DBorn: return "dborn";
    case LifecycleClass::DLag: return "dlag";
    case LifecycleClass::NoDid: return "nodid";
  }
  return "?";
}

struct DidLifecycle {
  LifecycleClass cls = LifecycleClass::NoDid;
  std::optional<std::int64_t> lag_days;  // DLag only
};

struct DidWarnings {
  std::size_t checksum_failures = 0;  // kept anyway; we track what editors wrote
};

namespace detail {

inline bool isbn10_checksum_ok(const std::string& d) {
  int sum = 0;
  for (int i = 0; i < 10; ++i) {
    int v = d[static_cast<std::size_t>(i)] == 'X' ? 10 : d[static_cast<std::size_t>(i)] - '0';
    sum += (10 - i) * v;
  }
  return sum % 11 == 0;
}

inline bool isbn13_checksum_ok(const std::string& d) {
  int sum = 0;
  for (int i = 0; i < 13; ++i) sum += (d[static_cast<std::size_t>(i)] - '0') * (i % 2 ? 3 : 1);
  return sum % 10 == 0;
}

inline bool issn_checksum_ok(const std::string& d) {  // "NNNN-NNNC"
  int sum = 0;
  int w = 8;
  for (char c : d) {
    if (c == '-') continue;
    sum += w == 1 && c == 'X' ? 10 * 1 : (c - '0') * w;
    --w;
  }
  return sum % 11 == 0;
}

struct DidPatterns {
  std::regex doi{R"(10\.\d{4,9}/[^\s|}<"']+)"};
  std::regex isbn{R"(isbn(?:-1[03])?[\s=:|]*([\dXx][\dXx \-]{7,15}[\dXx]))", std::regex::icase};
  std::regex pmid{R"(pmid[\s=:|]*(\d{1,9}))", std::regex::icase};
  std::regex pmc{R"(pmc(?:id)?[\s=:|]*(?:pmc)?(\d{1,9}))", std::regex::icase};
  std::regex issn{R"(issn[\s=:|]*(\d{4})[\s\-]?(\d{3}[\dXx]))", std::regex::icase};
  std::regex arxiv{R"(arxiv[\s=:|]*(?:id[\s=:|]*)?((?:\d{4}\.\d{4,5})|(?:[a-z\-]+(?:\.[A-Za-z]{2})?/\d{7})))",
                   std::regex::icase};
};

inline const DidPatterns& did_patterns() {
  static const DidPatterns p;
  return p;
}

}  // namespace detail

/// All distinct (kind, value) pairs in one raw reference text, document order.
/// Checksum failures (ISBN/ISSN) are counted but the annotation is kept.
inline std::vector<DidAnnotation> extract_dids(const std::string& raw_ref_text,
                                               DidWarnings* warn = nullptr) {
  const auto& pat = detail::did_patterns();
  struct Hit {
    std::size_t pos;
    DidKind kind;
    std::string value;
  };
  std::vector<Hit> hits;
  auto scan = [&](const std::regex& re, DidKind kind, int group,
                  auto normalize) {
    auto begin = std::sregex_iterator(raw_ref_text.begin(), raw_ref_text.end(), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      std::optional<std::string> v = normalize(*it);
      if (v) hits.push_back({static_cast<std::size_t>(it->position(group)), kind, std::move(*v)});
    }
  };

  scan(pat.doi, DidKind::DOI, 0, [](const std::smatch& m) -> std::optional<std::string> {
    std::string v = ascii_lower(m.str(0));
    while (!v.empty() && (v.back() == '.' || v.back() == ',' || v.back() == ';' ||
                          v.back() == ':' || v.back() == ')' || v.back() == ']'))
      v.pop_back();
    return v;
  });
  scan(pat.isbn, DidKind::ISBN, 1, [&](const std::smatch& m) -> std::optional<std::string> {
    // The capture can greedily swallow trailing numbers ("ISBN 0-553-10953-7
    // 1998", possibly reaching exactly 13 digits); try each whitespace
    // boundary left to right and keep the shortest valid-length prefix.
    std::string cap = m.str(1);
    std::vector<std::size_t> ends;
    for (std::size_t i = 0; i < cap.size(); ++i)
      if (cap[i] == ' ') ends.push_back(i);
    ends.push_back(cap.size());
    std::string digits;
    bool found = false;
    for (std::size_t end : ends) {
      digits.clear();
      for (std::size_t i = 0; i < end; ++i) {
        char c = cap[i];
        if (c != ' ' && c != '-') digits += (c == 'x' ? 'X' : c);
      }
      if (digits.size() == 10 || digits.size() == 13) {
        found = true;
        break;
      }
    }
    if (!found) return std::nullopt;
    if (digits.find('X') != std::string::npos && (digits.size() != 10 || digits.back() != 'X'))
      return std::nullopt;
    if (warn) {
      bool ok = digits.size() == 10 ? detail::isbn10_checksum_ok(digits)
                                    : detail::isbn13_checksum_ok(digits);
      if (!ok) ++warn->checksum_failures;
    }
    return digits;
  });
  scan(pat.pmid, DidKind::PMID, 1,
       [](const std::smatch& m) -> std::optional<std::string> { return m.str(1); });
  scan(pat.pmc, DidKind::PMCID, 1,
       [](const std::smatch& m) -> std::optional<std::string> { return m.str(1); });
  scan(pat.issn, DidKind::ISSN, 1, [&](const std::smatch& m) -> std::optional<std::string> {
    std::string v = m.str(1) + "-" + m.str(2);
    if (v.back() == 'x') v.back() = 'X';
    if (warn && !detail::issn_checksum_ok(v)) ++warn->checksum_failures;
    return v;
  });
  scan(pat.arxiv, DidKind::ARXIV, 1, [](const std::smatch& m) -> std::optional<std::string> {
    return ascii_lower(m.str(1));
  });

  // PMID cue also matches inside "pmcid"; and the DOI regex can swallow text a
  // cue-based match also found. Distinct (kind,value) in first-position order.
  std::stable_sort(hits.begin(), hits.end(),
                   [](const Hit& a, const Hit& b) { return a.pos < b.pos; });
  std::vector<DidAnnotation> out;
  for (auto& h : hits) {
    DidAnnotation ann{h.kind, std::move(h.value), 0};
    if (std::find(out.begin(), out.end(), ann) == out.end()) out.push_back(std::move(ann));
  }
  return out;
}

/// Distinct DIDs over a whole history with the index of the first snapshot
/// carrying each.
inline std::vector<DidAnnotation> annotate_history(const RefHistory& history,
                                                   DidWarnings* warn = nullptr) {
  std::vector<DidAnnotation> out;
  for (std::size_t i = 0; i < history.snapshots.size(); ++i) {
    const auto& s = history.snapshots[i];
    if (s.a == ActionKind::Deletion) continue;
    for (auto& ann : extract_dids(s.raw_text, warn)) {
      ann.snapshot_index = i;
      bool known = false;
      for (const auto& prev : out)
        if (prev.kind == ann.kind && prev.value == ann.value) {
          known = true;
          break;
        }
      if (!known) out.push_back(std::move(ann));
    }
  }
  return out;
}

/// Table 1 classes. DBorn: a DID in the creation snapshot; DLag: first DID in
/// a later snapshot, lag in whole days; NoDid otherwise.
inline DidLifecycle classify_lifecycle(const RefHistory& history) {
  auto anns = annotate_history(history);
  if (anns.empty()) return {LifecycleClass::NoDid, std::nullopt};
  std::size_t first = anns[0].snapshot_index;
  for (const auto& a : anns) first = std::min(first, a.snapshot_index);
  if (first == 0) return {LifecycleClass::DBorn, std::nullopt};
  Instant z0 = history.snapshots[0].z;
  Instant zd = history.snapshots[first].z;
  return {LifecycleClass::DLag, (zd - z0) / 86400};
}

// ---- DID-only chaining -----------------------------------------------------

/// Alternative chaining where two occurrences belong to the same reference iff
/// they share at least one normalized DID. Occurrences without DIDs are
/// invisible; a reference is born when its DID first appears.
inline std::vector<RefHistory> did_only_histories(const ArticleData& data) {
  const std::size_t n_revs = data.occurrences.size();
  // occurrence -> DID keys
  struct OccRef {
    std::size_t rev, idx;
    std::vector<std::string> keys;
  };
  std::vector<OccRef> with_dids;
  std::map<std::string, std::size_t> key_group;  // DID key -> group id (union-find)
  std::vector<std::size_t> parent;
  std::function<std::size_t(std::size_t)> find = [&](std::size_t x) {
    return parent[x] == x ? x : parent[x] = find(parent[x]);
  };
  for (std::size_t ri = 0; ri < n_revs; ++ri)
    for (std::size_t oi = 0; oi < data.occurrences[ri].size(); ++oi) {
      const auto& occ = data.occurrences[ri][oi];
      std::string raw = data.article.revisions[ri].wikitext.substr(
          occ.raw_span.first, occ.raw_span.second - occ.raw_span.first);
      auto anns = extract_dids(raw);
      if (anns.empty()) continue;
      OccRef o{ri, oi, {}};
      for (const auto& a : anns) o.keys.push_back(std::string(to_string(a.kind)) + ":" + a.value);
      for (const auto& k : o.keys)
        if (!key_group.count(k)) {
          key_group[k] = parent.size();
          parent.push_back(parent.size());
        }
      for (std::size_t i = 1; i < o.keys.size(); ++i)
        parent[find(key_group[o.keys[0]])] = find(key_group[o.keys[i]]);
      with_dids.push_back(std::move(o));
    }

  // group -> per-revision presence
  std::map<std::size_t, std::map<std::size_t, std::size_t>> presence;  // group -> rev -> occ idx
  for (const auto& o : with_dids) {
    std::size_t g = find(key_group[o.keys[0]]);
    auto& revs = presence[g];
    revs.try_emplace(o.rev, o.idx);  // first occurrence in the revision wins
  }

  std::vector<RefHistory> out;
  std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> order;
  for (const auto& [g, revs] : presence) {
    const auto& [ri, oi] = *revs.begin();
    order.push_back({{ri, data.occurrences[ri][oi].doc_position}, g});
  }
  std::sort(order.begin(), order.end());

  for (const auto& [key, g] : order) {
    const auto& revs = presence[g];
    RefHistory hist;
    hist.article_id = data.article.article_id;
    bool first = true;
    bool deleted = false;
    std::uint64_t last_hash = 0;
    std::size_t last_rev = 0;
    auto push_occ = [&](ActionKind a, std::size_t ri, std::size_t oi) {
      const auto& occ = data.occurrences[ri][oi];
      RefSnapshot s;
      s.a = a;
      s.t = occ.t;
      s.r = occ.revision_id;
      s.h = occ.h;
      s.e = occ.e;
      s.z = occ.z;
      s.rev_index = ri;
      s.raw_span = occ.raw_span;
      s.raw_text = data.article.revisions[ri].wikitext.substr(
          occ.raw_span.first, occ.raw_span.second - occ.raw_span.first);
      hist.snapshots.push_back(std::move(s));
      last_hash = occ.h;
      last_rev = ri;
    };
    for (const auto& [ri, oi] : revs) {
      if (first) {
        push_occ(ActionKind::Creation, ri, oi);
        first = false;
        continue;
      }
      if (ri != last_rev + 1 && !deleted) {
        // absent in the revision right after the last presence: deletion there
        RefSnapshot del;
        del.a = ActionKind::Deletion;
        del.h = last_hash;
        del.r = data.article.revisions[last_rev + 1].revision_id;
        del.e = data.article.revisions[last_rev + 1].editor;
        del.z = data.article.revisions[last_rev + 1].timestamp;
        del.rev_index = last_rev + 1;
        hist.snapshots.push_back(std::move(del));
        deleted = true;
      }
      if (deleted) {
        push_occ(ActionKind::Reinsertion, ri, oi);
        deleted = false;
      } else if (data.occurrences[ri][oi].h != last_hash) {
        push_occ(ActionKind::Modification, ri, oi);
      } else {
        last_rev = ri;  // unchanged, no action
      }
    }
    // vanished before the end of the article and never came back
    if (!deleted && last_rev + 1 < n_revs) {
      RefSnapshot del;
      del.a = ActionKind::Deletion;
      del.h = last_hash;
      del.r = data.article.revisions[last_rev + 1].revision_id;
      del.e = data.article.revisions[last_rev + 1].editor;
      del.z = data.article.revisions[last_rev + 1].timestamp;
      del.rev_index = last_rev + 1;
      hist.snapshots.push_back(std::move(del));
    }
    out.push_back(std::move(hist));
  }
  return out;
}

// ---- DID time series -------------------------------------------------------

enum class Granularity { Month, Year };

struct DidTimelines {
  // (a) DID-adding modifications per period (period key: month index or year)
  std::map<int, std::size_t> did_added;
  // (b) lag-days histogram per creation year
  std::map<int, std::map<std::int64_t, std::size_t>> lag_by_creation_year;
  // (c) DID-R percentage per period: full method vs DID-only reading
  struct Coverage {
    std::size_t existing = 0;       // histories created by period end
    std::size_t did_r = 0;          // of those, DID-R at corpus cutoff
    std::size_t did_visible = 0;    // of those, DID present by period end
    double full_pct = 0.0;
    double did_only_pct = 0.0;
  };
  std::map<int, Coverage> coverage;
  // (d) remaining omitted DLag percentage per period
  struct Omitted {
    std::size_t still_lacking = 0;  // DLag existing, no DID yet at period end
    std::size_t eventually = 0;     // DLag existing (all get one by cutoff)
    double pct = 0.0;
  };
  std::map<int, Omitted> omitted;
};

/// Derived DID-centric series over final histories (Table 1 semantics: all
/// classifications are relative to the corpus cutoff).
inline DidTimelines did_timelines(const std::vector<RefHistory>& histories,
                                  Granularity granularity) {
  auto period_of = [&](Instant z) {
    return granularity == Granularity::Month ? month_index_of(z) : year_of(z);
  };
  DidTimelines out;
  if (histories.empty()) return out;

  struct Row {
    int created_period;
    std::optional<int> first_did_period;
    LifecycleClass cls;
  };
  std::vector<Row> rows;
  int last_period = std::numeric_limits<int>::min();
  for (const auto& h : histories) {
    if (h.snapshots.empty()) continue;
    auto anns = annotate_history(h);
    DidLifecycle lc = classify_lifecycle(h);
    Row row{period_of(h.snapshots[0].z), std::nullopt, lc.cls};
    if (!anns.empty()) {
      std::size_t first = anns[0].snapshot_index;
      for (const auto& a : anns) first = std::min(first, a.snapshot_index);
      row.first_did_period = period_of(h.snapshots[first].z);
      if (first > 0) {
        ++out.did_added[*row.first_did_period];
        out.lag_by_creation_year[year_of(h.snapshots[0].z)]
                                [(h.snapshots[first].z - h.snapshots[0].z) / 86400]++;
      }
    }
    for (const auto& s : h.snapshots) last_period = std::max(last_period, period_of(s.z));
    rows.push_back(row);
  }

  int first_period = rows[0].created_period;
  for (const auto& r : rows) first_period = std::min(first_period, r.created_period);
  for (int p = first_period; p <= last_period; ++p) {
    auto& cov = out.coverage[p];
    auto& om = out.omitted[p];
    for (const auto& r : rows) {
      if (r.created_period > p) continue;
      ++cov.existing;
      if (r.cls != LifecycleClass::NoDid) ++cov.did_r;
      if (r.first_did_period && *r.first_did_period <= p) ++cov.did_visible;
      if (r.cls == LifecycleClass::DLag) {
        ++om.eventually;
        if (*r.first_did_period > p) ++om.still_lacking;
      }
    }
    cov.full_pct = cov.existing ? 100.0 * static_cast<double>(cov.did_r) / static_cast<double>(cov.existing) : 0.0;
    cov.did_only_pct = cov.existing ? 100.0 * static_cast<double>(cov.did_visible) / static_cast<double>(cov.existing) : 0.0;
    om.pct = om.eventually ? 100.0 * static_cast<double>(om.still_lacking) / static_cast<double>(om.eventually) : 0.0;
  }
  return out;
}

}  // namespace refhist
