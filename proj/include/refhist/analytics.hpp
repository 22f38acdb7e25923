#pragma once

#include <array>
#include <cmath>
#include <map>
#include <random>
#include <set>

#include "refhist/did.hpp"
#include "refhist/history.hpp"

namespace refhist {

// ---- corpus statistics -----------------------------------------------------

struct ActionTimeline {
  // period -> count per action kind (Creation, Modification, Deletion, Reinsertion)
  std::map<int, std::array<std::size_t, 4>> counts;
  // each action's series normalized to sum 1 across periods
  std::map<int, std::array<double, 4>> proportions;
};

enum class HistoryFilter { All, DidR };

inline std::size_t action_slot(ActionKind a) {
  switch (a) {
    case ActionKind::Creation: return 0;
    case ActionKind::Modification: return 1;
    case ActionKind::Deletion: return 2;
    case ActionKind::Reinsertion: return 3;
    default: throw std::logic_error("unknown action in final history");
  }
}

inline ActionTimeline action_timeline(const std::vector<RefHistory>& histories,
                                      Granularity period, HistoryFilter filter) {
  ActionTimeline out;
  for (const auto& h : histories) {
    if (filter == HistoryFilter::DidR &&
        classify_lifecycle(h).cls == LifecycleClass::NoDid)
      continue;
    for (const auto& s : h.snapshots) {
      int p = period == Granularity::Month ? month_index_of(s.z) : year_of(s.z);
      out.counts[p][action_slot(s.a)]++;
    }
  }
  std::array<double, 4> totals{};
  for (const auto& [p, c] : out.counts)
    for (std::size_t i = 0; i < 4; ++i) totals[i] += static_cast<double>(c[i]);
  for (const auto& [p, c] : out.counts) {
    auto& props = out.proportions[p];
    for (std::size_t i = 0; i < 4; ++i)
      props[i] = totals[i] > 0 ? static_cast<double>(c[i]) / totals[i] : 0.0;
  }
  return out;
}

/// Fraction of references created before each instant that are deleted without
/// a later reinsertion, judged at corpus cutoff.
inline std::vector<double> deletion_survival(const std::vector<RefHistory>& histories,
                                             const std::vector<Instant>& as_of,
                                             HistoryFilter filter = HistoryFilter::All) {
  struct Row {
    Instant created;
    bool dead;  // last action is a deletion
  };
  std::vector<Row> rows;
  for (const auto& h : histories) {
    if (h.snapshots.empty()) continue;
    if (filter == HistoryFilter::DidR &&
        classify_lifecycle(h).cls == LifecycleClass::NoDid)
      continue;
    rows.push_back({h.snapshots.front().z, h.snapshots.back().a == ActionKind::Deletion});
  }
  std::vector<double> out;
  out.reserve(as_of.size());
  for (Instant t : as_of) {
    std::size_t denom = 0, num = 0;
    for (const auto& r : rows)
      if (r.created < t) {
        ++denom;
        if (r.dead) ++num;
      }
    out.push_back(denom ? static_cast<double>(num) / static_cast<double>(denom) : 0.0);
  }
  return out;
}

// ---- editor profiles -------------------------------------------------------

struct EditorProfile {
  std::string key;  // account name, or IP for anonymous sessions
  EditorKind kind = EditorKind::Registered;
  std::array<std::size_t, 4> counts{};  // per action kind
  std::size_t articles_touched = 0;

  std::size_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }
};

using FeatureVector = std::array<double, 4>;  // action proportions, sums to 1

inline FeatureVector to_features(const EditorProfile& p) {
  double tot = static_cast<double>(p.total());
  FeatureVector f{};
  for (std::size_t i = 0; i < 4; ++i) f[i] = static_cast<double>(p.counts[i]) / tot;
  return f;
}

/// One profile per distinct editor key, sorted by key for determinism.
inline std::vector<EditorProfile> build_profiles(const std::vector<RefHistory>& histories) {
  struct Acc {
    EditorKind kind;
    std::array<std::size_t, 4> counts{};
    std::set<std::int64_t> articles;
  };
  std::map<std::string, Acc> by_key;
  for (const auto& h : histories)
    for (const auto& s : h.snapshots) {
      auto [it, inserted] = by_key.try_emplace(s.e.key());
      if (inserted) it->second.kind = s.e.kind;
      it->second.counts[action_slot(s.a)]++;
      it->second.articles.insert(h.article_id);
    }
  std::vector<EditorProfile> out;
  out.reserve(by_key.size());
  for (auto& [key, acc] : by_key) {
    EditorProfile p;
    p.key = key;
    p.kind = acc.kind;
    p.counts = acc.counts;
    p.articles_touched = acc.articles.size();
    out.push_back(std::move(p));
  }
  return out;
}

/// Right-continuous ECDF over total action counts for editors of `kind`.
/// Returns sorted (count, cumulative_fraction) step points.
inline std::vector<std::pair<std::size_t, double>> ecdf(
    const std::vector<EditorProfile>& profiles, EditorKind kind) {
  std::vector<std::size_t> counts;
  for (const auto& p : profiles)
    if (p.kind == kind) counts.push_back(p.total());
  std::sort(counts.begin(), counts.end());
  std::vector<std::pair<std::size_t, double>> out;
  const double n = static_cast<double>(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (!out.empty() && out.back().first == counts[i]) {
      out.back().second = static_cast<double>(i + 1) / n;
    } else {
      out.emplace_back(counts[i], static_cast<double>(i + 1) / n);
    }
  }
  return out;
}

// ---- clustering ------------------------------------------------------------

struct ClusterModel {
  std::size_t k = 0;
  std::vector<FeatureVector> centroids;
  std::vector<std::size_t> assignment;  // per input point
  std::vector<double> silhouettes;      // empty when k < 2
  double mean_silhouette = 0.0;
  std::uint64_t seed = 0;
  double inertia = 0.0;
};

namespace detail {

inline double sq_dist(const FeatureVector& a, const FeatureVector& b) {
  double d = 0;
  for (std::size_t i = 0; i < 4; ++i) d += (a[i] - b[i]) * (a[i] - b[i]);
  return d;
}

}  // namespace detail

/// Lloyd's algorithm with k-means++ seeding from a seeded PRNG.
inline ClusterModel kmeans(const std::vector<FeatureVector>& features, std::size_t k,
                           std::uint64_t seed, std::size_t max_iter = 300,
                           double tol = 1e-6) {
  const std::size_t n = features.size();
  if (k < 1) throw std::invalid_argument("kmeans: k must be >= 1");
  if (k > n) throw std::invalid_argument("kmeans: k larger than the number of points");

  std::mt19937_64 rng(seed);
  ClusterModel model;
  model.k = k;
  model.seed = seed;

  // k-means++ seeding
  std::vector<FeatureVector>& cent = model.centroids;
  {
    std::uniform_int_distribution<std::size_t> first(0, n - 1);
    cent.push_back(features[first(rng)]);
    std::vector<double> d2(n);
    while (cent.size() < k) {
      double total = 0;
      for (std::size_t i = 0; i < n; ++i) {
        double best = detail::sq_dist(features[i], cent[0]);
        for (std::size_t c = 1; c < cent.size(); ++c)
          best = std::min(best, detail::sq_dist(features[i], cent[c]));
        d2[i] = best;
        total += best;
      }
      if (total <= 0) {  // fewer distinct points than k: reuse duplicates
        std::uniform_int_distribution<std::size_t> any(0, n - 1);
        cent.push_back(features[any(rng)]);
        continue;
      }
      std::uniform_real_distribution<double> pick(0.0, total);
      double target = pick(rng);
      std::size_t chosen = n - 1;
      double run = 0;
      for (std::size_t i = 0; i < n; ++i) {
        run += d2[i];
        if (run >= target) {
          chosen = i;
          break;
        }
      }
      cent.push_back(features[chosen]);
    }
  }

  model.assignment.assign(n, 0);
  for (std::size_t iter = 0; iter < max_iter; ++iter) {
    for (std::size_t i = 0; i < n; ++i) {
      double best = detail::sq_dist(features[i], cent[0]);
      std::size_t arg = 0;
      for (std::size_t c = 1; c < k; ++c) {
        double d = detail::sq_dist(features[i], cent[c]);
        if (d < best) {
          best = d;
          arg = c;
        }
      }
      model.assignment[i] = arg;
    }
    std::vector<FeatureVector> next(k, FeatureVector{});
    std::vector<std::size_t> sizes(k, 0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t d = 0; d < 4; ++d) next[model.assignment[i]][d] += features[i][d];
      ++sizes[model.assignment[i]];
    }
    double shift = 0;
    for (std::size_t c = 0; c < k; ++c) {
      if (sizes[c] == 0) {
        next[c] = cent[c];  // keep an empty cluster's centroid in place
        continue;
      }
      for (std::size_t d = 0; d < 4; ++d) next[c][d] /= static_cast<double>(sizes[c]);
      shift = std::max(shift, std::sqrt(detail::sq_dist(cent[c], next[c])));
    }
    cent = std::move(next);
    if (shift < tol) break;
  }
  // final assignment against converged centroids
  model.inertia = 0;
  for (std::size_t i = 0; i < n; ++i) {
    double best = detail::sq_dist(features[i], cent[0]);
    std::size_t arg = 0;
    for (std::size_t c = 1; c < k; ++c) {
      double d = detail::sq_dist(features[i], cent[c]);
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    model.assignment[i] = arg;
    model.inertia += best;
  }
  return model;
}

/// Rousseeuw silhouettes: s(i) = (b-a)/max(a,b); singleton clusters score 0.
inline std::pair<std::vector<double>, double> silhouette(
    const std::vector<FeatureVector>& features, const std::vector<std::size_t>& assignment) {
  const std::size_t n = features.size();
  std::size_t k = 0;
  for (std::size_t a : assignment) k = std::max(k, a + 1);
  std::vector<std::size_t> sizes(k, 0);
  for (std::size_t a : assignment) ++sizes[a];
  std::size_t non_empty = 0;
  for (std::size_t s : sizes)
    if (s) ++non_empty;
  if (non_empty < 2) throw std::invalid_argument("silhouette needs at least two clusters");

  std::vector<double> s(n, 0.0);
  double mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> dist_sum(k, 0.0);
    for (std::size_t j = 0; j < n; ++j) {
      if (i == j) continue;
      dist_sum[assignment[j]] += std::sqrt(detail::sq_dist(features[i], features[j]));
    }
    std::size_t own = assignment[i];
    if (sizes[own] <= 1) {
      s[i] = 0.0;
      continue;
    }
    double a = dist_sum[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < k; ++c)
      if (c != own && sizes[c] > 0)
        b = std::min(b, dist_sum[c] / static_cast<double>(sizes[c]));
    double denom = std::max(a, b);
    s[i] = denom > 0 ? (b - a) / denom : 0.0;
  }
  for (double v : s) mean += v;
  mean /= static_cast<double>(n);
  return {std::move(s), mean};
}

// ---- clustering tree -------------------------------------------------------

struct ClusTreeEdge {
  std::size_t k_from = 0;
  std::size_t cluster_from = 0;
  std::size_t cluster_to = 0;  // at k_from + 1
  std::size_t count = 0;       // editors moving along this edge
  double in_prop = 0.0;        // count / destination cluster size
};

struct ClusTree {
  std::vector<ClusTreeEdge> edges;
  // (k, cluster) -> size
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> node_sizes;
};

/// Cross-k membership flow between consecutive models over the same points.
inline ClusTree clustree(const std::vector<ClusterModel>& models) {
  ClusTree out;
  for (std::size_t m = 0; m < models.size(); ++m) {
    if (m > 0 && models[m].assignment.size() != models[m - 1].assignment.size())
      throw std::invalid_argument("clustree: models cover different point sets");
    for (std::size_t i = 0; i < models[m].assignment.size(); ++i)
      out.node_sizes[{models[m].k, models[m].assignment[i]}]++;
  }
  for (std::size_t m = 0; m + 1 < models.size(); ++m) {
    const auto& a = models[m];
    const auto& b = models[m + 1];
    std::map<std::pair<std::size_t, std::size_t>, std::size_t> flow;
    for (std::size_t i = 0; i < a.assignment.size(); ++i)
      flow[{a.assignment[i], b.assignment[i]}]++;
    for (const auto& [key, count] : flow) {
      ClusTreeEdge e;
      e.k_from = a.k;
      e.cluster_from = key.first;
      e.cluster_to = key.second;
      e.count = count;
      e.in_prop = static_cast<double>(count) /
                  static_cast<double>(out.node_sizes.at({b.k, key.second}));
      out.edges.push_back(e);
    }
  }
  return out;
}

// ---- rankings --------------------------------------------------------------

struct RankedEditor {
  std::string key;
  std::size_t score = 0;
};

/// Editors ranked by an action count (slot 0..3) or total actions (slot 4),
/// descending, key ascending on ties. Anonymous editors are excluded.
inline std::vector<RankedEditor> ranking(const std::vector<EditorProfile>& profiles,
                                         std::size_t slot, std::size_t limit = 10000) {
  if (slot > 4) throw std::invalid_argument("ranking: slot out of range");
  std::vector<RankedEditor> out;
  for (const auto& p : profiles) {
    if (p.kind == EditorKind::NonRegistered) continue;
    out.push_back({p.key, slot == 4 ? p.total() : p.counts[slot]});
  }
  std::sort(out.begin(), out.end(), [](const RankedEditor& a, const RankedEditor& b) {
    if (a.score != b.score) return a.score > b.score;
    return a.key < b.key;
  });
  if (out.size() > limit) out.resize(limit);
  return out;
}

// ---- rank similarity -------------------------------------------------------

/// Extrapolated rank-biased overlap at persistence p over duplicate-free
/// lists, evaluated to depth D = min(|S|,|T|) with the agreement-persists
/// extrapolation tail.
inline double rbo(const std::vector<std::string>& s, const std::vector<std::string>& t,
                  double p) {
  if (s.empty() || t.empty()) throw std::invalid_argument("rbo: empty ranking");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("rbo: p must be in (0,1)");
  const std::size_t depth = std::min(s.size(), t.size());
  std::set<std::string> seen_s, seen_t;
  std::size_t overlap = 0;
  double sum = 0.0;
  double pd = 1.0;  // p^(d-1)
  double agreement = 0.0;
  for (std::size_t d = 1; d <= depth; ++d) {
    const std::string& x = s[d - 1];
    const std::string& y = t[d - 1];
    if (x == y) {
      ++overlap;
    } else {
      if (seen_t.count(x)) ++overlap;
      if (seen_s.count(y)) ++overlap;
    }
    seen_s.insert(x);
    seen_t.insert(y);
    agreement = static_cast<double>(overlap) / static_cast<double>(d);
    sum += pd * agreement;
    pd *= p;
  }
  return (1.0 - p) * sum + pd * agreement;  // pd == p^depth here
}

/// Jaccard over the top-k prefixes of two rankings.
inline double topk_jaccard(const std::vector<std::string>& s,
                           const std::vector<std::string>& t, std::size_t k) {
  if (k == 0) throw std::invalid_argument("topk_jaccard: k must be positive");
  if (k > s.size() || k > t.size())
    throw std::invalid_argument("topk_jaccard: k exceeds list length");
  std::set<std::string> a(s.begin(), s.begin() + static_cast<std::ptrdiff_t>(k));
  std::set<std::string> b(t.begin(), t.begin() + static_cast<std::ptrdiff_t>(k));
  std::size_t inter = 0;
  for (const auto& x : a) inter += b.count(x);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

}  // namespace refhist
