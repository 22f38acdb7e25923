#pragma once

#include <array>
#include <cmath>
#include <istream>
#include <random>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "refhist/history.hpp"

namespace refhist {

// ---- gold data -------------------------------------------------------------

enum class GoldLabel { Equivalent, Distinct, Unclear };

struct GoldPair {
  std::int64_t article_id = 0;
  std::int64_t rev_a = 0;
  std::int64_t rev_b = 0;
  std::string text_a;
  std::string text_b;
  GoldLabel label = GoldLabel::Unclear;
  double confidence = 0.0;

  /// Pairs below the agreement floor stay out of metric computation.
  bool usable() const { return label != GoldLabel::Unclear && confidence >= 0.7; }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  out.push_back(std::move(field));
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += "\"\"";
    else out += c;
  }
  out += '"';
  return out;
}

}  // namespace detail

/// CSV columns: article_id,rev_a,rev_b,text_a,text_b,label,confidence.
/// A leading header row is skipped; comment lines start with '#'.
inline std::vector<GoldPair> load_gold_csv(std::istream& in) {
  std::vector<GoldPair> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    auto fields = detail::split_csv_line(line);
    if (lineno == 1 && !fields.empty() && fields[0] == "article_id") continue;
    if (fields.size() != 7)
      throw std::runtime_error("gold line " + std::to_string(lineno) + ": expected 7 fields, got " +
                               std::to_string(fields.size()));
    try {
      GoldPair p;
      p.article_id = std::stoll(fields[0]);
      p.rev_a = std::stoll(fields[1]);
      p.rev_b = std::stoll(fields[2]);
      p.text_a = fields[3];
      p.text_b = fields[4];
      if (fields[5] == "Equivalent") p.label = GoldLabel::Equivalent;
      else if (fields[5] == "Distinct") p.label = GoldLabel::Distinct;
      else if (fields[5] == "Unclear") p.label = GoldLabel::Unclear;
      else throw std::runtime_error("unknown label: " + fields[5]);
      p.confidence = std::stod(fields[6]);
      if (p.confidence < 0.0 || p.confidence > 1.0)
        throw std::runtime_error("confidence out of [0,1]");
      out.push_back(std::move(p));
    } catch (const std::exception& e) {
      throw std::runtime_error("gold line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// ---- metrics ---------------------------------------------------------------

struct MetricsReport {
  double precision = 0.0;
  double recall = 0.0;
  double accuracy = 0.0;
  double f1 = 0.0;
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  bool zero_support = false;  // no positive predictions; precision reported as 1
};

inline MetricsReport metrics_from_counts(std::size_t tp, std::size_t fp, std::size_t tn,
                                         std::size_t fn) {
  MetricsReport m;
  m.tp = tp;
  m.fp = fp;
  m.tn = tn;
  m.fn = fn;
  if (tp + fp == 0) {
    m.precision = 1.0;
    m.zero_support = true;
  } else {
    m.precision = static_cast<double>(tp) / static_cast<double>(tp + fp);
  }
  m.recall = tp + fn == 0 ? 0.0 : static_cast<double>(tp) / static_cast<double>(tp + fn);
  std::size_t total = tp + fp + tn + fn;
  m.accuracy = total == 0 ? 0.0 : static_cast<double>(tp + tn) / static_cast<double>(total);
  m.f1 = m.precision + m.recall > 0 ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
                                    : 0.0;
  return m;
}

// ---- cosine baseline -------------------------------------------------------

/// Cosine of term-frequency vectors over surface tokens; both empty => 0.
inline double cosine_baseline(const std::string& text_a, const std::string& text_b) {
  std::unordered_map<std::string, double> tf_a, tf_b;
  for (auto& t : tokenize(text_a)) tf_a[t] += 1.0;
  for (auto& t : tokenize(text_b)) tf_b[t] += 1.0;
  if (tf_a.empty() || tf_b.empty()) return 0.0;
  double dot = 0, na = 0, nb = 0;
  for (const auto& [t, v] : tf_a) {
    na += v * v;
    auto it = tf_b.find(t);
    if (it != tf_b.end()) dot += v * it->second;
  }
  for (const auto& [t, v] : tf_b) nb += v * v;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---- stratified sampling ---------------------------------------------------

constexpr std::size_t kNumStrata = 8;

/// Half-open 0.125-wide strata; the last one is closed at 1.
inline std::size_t stratum_of(double jac) {
  if (jac < 0.0 || jac > 1.0) throw std::invalid_argument("similarity out of [0,1]");
  auto s = static_cast<std::size_t>(jac / 0.125);
  return std::min<std::size_t>(s, kNumStrata - 1);
}

struct SampledPair {
  std::int64_t article_id = 0;
  std::int64_t rev_a = 0;  // revision ids
  std::int64_t rev_b = 0;
  std::string text_a;
  std::string text_b;
  std::vector<TokenId> tokens_a;
  std::vector<TokenId> tokens_b;
  double jaccard = 0.0;
  std::size_t stratum = 0;
};

struct SampleReport {
  std::vector<SampledPair> pairs;
  std::array<std::size_t, kNumStrata> fill{};  // per-stratum counts
  bool complete = false;
};

namespace detail {

inline std::string occ_text(const ArticleData& ad, std::size_t ri, const RefOccurrence& occ) {
  return ad.article.revisions[ri].wikitext.substr(occ.raw_span.first,
                                                  occ.raw_span.second - occ.raw_span.first);
}

}  // namespace detail

/// Random-walk stratified sampling of near-match reference pairs.
/// Picks a random (article, revision, reference), then walks forward over
/// revisions; in each later revision every reference without an exact hash
/// match back in the starting revision pairs up with the picked one and lands
/// in the stratum of their token-id Jaccard, until all buckets are full.
/// Stops early (complete=false) when `max_walks` restarts fail to finish.
inline SampleReport stratified_sample(const std::vector<ArticleData>& corpus,
                                      std::size_t bucket_size, std::uint64_t seed,
                                      std::size_t max_walks = 200000) {
  SampleReport report;
  std::vector<std::size_t> eligible;  // articles with at least one reference
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (const auto& revs : corpus[i].occurrences)
      if (!revs.empty()) {
        eligible.push_back(i);
        break;
      }
  if (eligible.empty()) return report;

  std::mt19937_64 rng(seed);
  auto full = [&] {
    for (std::size_t s = 0; s < kNumStrata; ++s)
      if (report.fill[s] < bucket_size) return false;
    return true;
  };

  for (std::size_t walk = 0; walk < max_walks && !full(); ++walk) {
    const ArticleData& ad =
        corpus[eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)]];
    std::vector<std::size_t> revs_with_refs;
    for (std::size_t ri = 0; ri < ad.occurrences.size(); ++ri)
      if (!ad.occurrences[ri].empty()) revs_with_refs.push_back(ri);
    if (revs_with_refs.empty()) continue;
    std::size_t r0 = revs_with_refs[std::uniform_int_distribution<std::size_t>(
        0, revs_with_refs.size() - 1)(rng)];
    const auto& refs0 = ad.occurrences[r0];
    const RefOccurrence& f =
        refs0[std::uniform_int_distribution<std::size_t>(0, refs0.size() - 1)(rng)];
    std::unordered_set<std::uint64_t> hashes_r0;
    for (const auto& occ : refs0) hashes_r0.insert(occ.h);

    for (std::size_t s = r0 + 1; s < ad.occurrences.size(); ++s) {
      for (const auto& c : ad.occurrences[s]) {
        if (hashes_r0.count(c.h)) continue;
        double jac = jaccard(f.t, c.t);
        std::size_t stratum = stratum_of(jac);
        if (report.fill[stratum] >= bucket_size) continue;
        SampledPair p;
        p.article_id = ad.article.article_id;
        p.rev_a = f.revision_id;
        p.rev_b = c.revision_id;
        p.text_a = detail::occ_text(ad, r0, f);
        p.text_b = detail::occ_text(ad, s, c);
        p.tokens_a = f.t;
        p.tokens_b = c.t;
        p.jaccard = jac;
        p.stratum = stratum;
        report.fill[stratum]++;
        report.pairs.push_back(std::move(p));
      }
    }
  }
  report.complete = full();
  return report;
}

/// Same walk with unbounded buckets: per-stratum counts of candidate pairs,
/// stopping after `n_pairs` pairs. Used to estimate the corpus-wide
/// similarity distribution.
inline std::array<std::size_t, kNumStrata> similarity_distribution(
    const std::vector<ArticleData>& corpus, std::size_t n_pairs, std::uint64_t seed,
    std::size_t max_walks = 500000) {
  std::array<std::size_t, kNumStrata> counts{};
  std::vector<std::size_t> eligible;
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (const auto& revs : corpus[i].occurrences)
      if (!revs.empty()) {
        eligible.push_back(i);
        break;
      }
  if (eligible.empty()) return counts;

  std::mt19937_64 rng(seed);
  std::size_t total = 0;
  for (std::size_t walk = 0; walk < max_walks && total < n_pairs; ++walk) {
    const ArticleData& ad =
        corpus[eligible[std::uniform_int_distribution<std::size_t>(0, eligible.size() - 1)(rng)]];
    std::vector<std::size_t> revs_with_refs;
    for (std::size_t ri = 0; ri < ad.occurrences.size(); ++ri)
      if (!ad.occurrences[ri].empty()) revs_with_refs.push_back(ri);
    if (revs_with_refs.empty()) continue;
    std::size_t r0 = revs_with_refs[std::uniform_int_distribution<std::size_t>(
        0, revs_with_refs.size() - 1)(rng)];
    const auto& refs0 = ad.occurrences[r0];
    const RefOccurrence& f =
        refs0[std::uniform_int_distribution<std::size_t>(0, refs0.size() - 1)(rng)];
    std::unordered_set<std::uint64_t> hashes_r0;
    for (const auto& occ : refs0) hashes_r0.insert(occ.h);
    for (std::size_t s = r0 + 1; s < ad.occurrences.size() && total < n_pairs; ++s)
      for (const auto& c : ad.occurrences[s]) {
        if (hashes_r0.count(c.h)) continue;
        counts[stratum_of(jaccard(f.t, c.t))]++;
        if (++total >= n_pairs) break;
      }
  }
  return counts;
}

// ---- threshold sweep -------------------------------------------------------

struct ScoredPair {
  double score = 0.0;
  bool gold_positive = false;
  bool subset_override = false;  // provenance subset rule forces a positive call
  std::size_t stratum = 0;
};

struct SweepResult {
  std::vector<double> thresholds;
  std::vector<MetricsReport> reports;
  double balanced_threshold = 0.0;  // minimizes |FP - FN|
  std::size_t balanced_index = 0;
};

inline SweepResult threshold_sweep(const std::vector<ScoredPair>& pairs,
                                   const std::vector<double>& thresholds) {
  if (pairs.empty()) throw std::invalid_argument("threshold_sweep: no labelled pairs");
  if (thresholds.empty()) throw std::invalid_argument("threshold_sweep: no thresholds");
  SweepResult out;
  out.thresholds = thresholds;
  std::size_t best_gap = std::numeric_limits<std::size_t>::max();
  for (std::size_t i = 0; i < thresholds.size(); ++i) {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (const auto& p : pairs) {
      bool pred = p.score > thresholds[i] || p.subset_override;
      if (pred && p.gold_positive) ++tp;
      else if (pred) ++fp;
      else if (p.gold_positive) ++fn;
      else ++tn;
    }
    out.reports.push_back(metrics_from_counts(tp, fp, tn, fn));
    std::size_t gap = fp > fn ? fp - fn : fn - fp;
    if (gap < best_gap) {
      best_gap = gap;
      out.balanced_index = i;
      out.balanced_threshold = thresholds[i];
    }
  }
  return out;
}

// ---- ROC -------------------------------------------------------------------

struct RocPoint {
  double fpr = 0.0;
  double tpr = 0.0;
  double threshold = 0.0;
};

struct RocCurve {
  std::vector<RocPoint> points;  // from (0,0) to (1,1)
  double auc = 0.0;
};

inline RocCurve roc_curve(const std::vector<double>& scores, const std::vector<bool>& labels) {
  if (scores.size() != labels.size())
    throw std::invalid_argument("roc_curve: scores and labels differ in length");
  std::size_t pos = 0, neg = 0;
  for (bool l : labels) (l ? pos : neg)++;
  if (pos == 0 || neg == 0) throw std::invalid_argument("roc_curve: needs both classes");

  std::vector<std::size_t> order(scores.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  RocCurve out;
  out.points.push_back({0.0, 0.0, std::numeric_limits<double>::infinity()});
  std::size_t tp = 0, fp = 0;
  for (std::size_t i = 0; i < order.size();) {
    double s = scores[order[i]];
    while (i < order.size() && scores[order[i]] == s) {
      (labels[order[i]] ? tp : fp)++;
      ++i;
    }
    out.points.push_back({static_cast<double>(fp) / static_cast<double>(neg),
                          static_cast<double>(tp) / static_cast<double>(pos), s});
  }
  double auc = 0.0;
  for (std::size_t i = 1; i < out.points.size(); ++i)
    auc += (out.points[i].fpr - out.points[i - 1].fpr) *
           (out.points[i].tpr + out.points[i - 1].tpr) / 2.0;
  out.auc = auc;
  return out;
}

// ---- distribution-resampled metrics ----------------------------------------

struct ResampledMetrics {
  MetricsReport mean;  // precision/recall/f1 are bootstrap means
  double precision_stderr = 0.0;
  double recall_stderr = 0.0;
  double f1_stderr = 0.0;
  std::size_t draws = 0;
};

/// Bootstrap-resamples labelled pairs so strata appear with the given weights,
/// then reports mean micro metrics with standard errors over the draws.
/// `predicted` holds each pair's method decision at the chosen threshold.
inline ResampledMetrics resampled_micro_metrics(const std::vector<ScoredPair>& pairs,
                                                const std::vector<bool>& predicted,
                                                const std::array<double, kNumStrata>& weights,
                                                std::uint64_t seed, std::size_t draws = 1000) {
  if (pairs.size() != predicted.size())
    throw std::invalid_argument("resampled_micro_metrics: pairs and predictions differ");
  if (draws < 1000) throw std::invalid_argument("resampled_micro_metrics: needs >= 1000 draws");
  std::array<std::vector<std::size_t>, kNumStrata> by_stratum;
  for (std::size_t i = 0; i < pairs.size(); ++i) by_stratum[pairs[i].stratum].push_back(i);
  double wsum = 0;
  for (std::size_t s = 0; s < kNumStrata; ++s) {
    if (weights[s] < 0) throw std::invalid_argument("resampled_micro_metrics: negative weight");
    if (weights[s] > 0 && by_stratum[s].empty())
      throw std::invalid_argument("resampled_micro_metrics: no labelled pairs in stratum " +
                                  std::to_string(s));
    wsum += weights[s];
  }
  if (wsum <= 0) throw std::invalid_argument("resampled_micro_metrics: all weights zero");

  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick_stratum(weights.begin(), weights.end());
  const std::size_t n = pairs.size();
  std::vector<double> ps, rs, fs;
  ps.reserve(draws);
  rs.reserve(draws);
  fs.reserve(draws);
  for (std::size_t d = 0; d < draws; ++d) {
    std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
    for (std::size_t i = 0; i < n; ++i) {
      std::size_t s = pick_stratum(rng);
      const auto& bucket = by_stratum[s];
      std::size_t idx = bucket[std::uniform_int_distribution<std::size_t>(0, bucket.size() - 1)(rng)];
      bool pred = predicted[idx];
      bool gold = pairs[idx].gold_positive;
      if (pred && gold) ++tp;
      else if (pred) ++fp;
      else if (gold) ++fn;
      else ++tn;
    }
    MetricsReport m = metrics_from_counts(tp, fp, tn, fn);
    ps.push_back(m.precision);
    rs.push_back(m.recall);
    fs.push_back(m.f1);
  }
  auto mean_stderr = [&](const std::vector<double>& xs) {
    double mean = 0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return std::make_pair(mean, std::sqrt(var / static_cast<double>(xs.size())));
  };
  ResampledMetrics out;
  out.draws = draws;
  auto [pm, pe] = mean_stderr(ps);
  auto [rm, re] = mean_stderr(rs);
  auto [fm, fe] = mean_stderr(fs);
  out.mean.precision = pm;
  out.mean.recall = rm;
  out.mean.f1 = fm;
  out.precision_stderr = pe;
  out.recall_stderr = re;
  out.f1_stderr = fe;
  return out;
}

// ---- scoring gold pairs against a corpus -----------------------------------

struct PairScores {
  double jaccard = 0.0;
  bool subset = false;  // surviving a-tokens all appear in b
  double cosine = 0.0;
};

/// Locates both references by (revision id, raw text) inside the article and
/// scores them with the token-id method and the cosine baseline.
inline PairScores score_pair_in_corpus(const ArticleData& ad, const GoldPair& g) {
  auto find_occ = [&](std::int64_t rev_id, const std::string& text) -> const RefOccurrence* {
    for (std::size_t ri = 0; ri < ad.article.revisions.size(); ++ri) {
      if (ad.article.revisions[ri].revision_id != rev_id) continue;
      for (const auto& occ : ad.occurrences[ri])
        if (detail::occ_text(ad, ri, occ) == text) return &occ;
    }
    return nullptr;
  };
  const RefOccurrence* a = find_occ(g.rev_a, g.text_a);
  const RefOccurrence* b = find_occ(g.rev_b, g.text_b);
  if (!a || !b)
    throw std::runtime_error("gold pair not found in article " + std::to_string(g.article_id));
  PairScores s;
  s.jaccard = jaccard(a->t, b->t);
  std::unordered_set<TokenId> bt(b->t.begin(), b->t.end());
  s.subset = true;
  for (TokenId id : a->t)
    if (!bt.count(id)) {
      s.subset = false;
      break;
    }
  s.cosine = cosine_baseline(g.text_a, g.text_b);
  return s;
}

}  // namespace refhist
