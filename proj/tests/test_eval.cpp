#include <catch2/catch_amalgamated.hpp>

#include <sstream>

#include "refhist/eval.hpp"
#include "synth.hpp"

using namespace refhist;

TEST_CASE("gold csv loader") {
  std::stringstream in(
      "article_id,rev_a,rev_b,text_a,text_b,label,confidence\n"
      "# comment\n"
      "1,10,11,\"smith, j. 2001\",smith j 2001,Equivalent,0.95\n"
      "1,10,12,a cite,b cite,Distinct,1.0\n"
      "2,20,21,x,y,Unclear,0.4\n");
  auto gold = load_gold_csv(in);
  REQUIRE(gold.size() == 3);
  CHECK(gold[0].text_a == "smith, j. 2001");
  CHECK(gold[0].label == GoldLabel::Equivalent);
  CHECK(gold[0].usable());
  CHECK(!gold[2].usable());

  std::stringstream bad("1,10,11,a,b,Same,0.9\n");
  CHECK_THROWS(load_gold_csv(bad));
  std::stringstream badconf("1,10,11,a,b,Distinct,1.5\n");
  CHECK_THROWS(load_gold_csv(badconf));
  std::stringstream shortline("1,10,11,a,b\n");
  CHECK_THROWS(load_gold_csv(shortline));
}

TEST_CASE("low-confidence pairs are excluded from metrics") {
  GoldPair p;
  p.label = GoldLabel::Equivalent;
  p.confidence = 0.69;
  CHECK(!p.usable());
  p.confidence = 0.7;
  CHECK(p.usable());
}

TEST_CASE("cosine baseline") {
  CHECK(cosine_baseline("same words here", "same words here") == Catch::Approx(1.0));
  CHECK(cosine_baseline("alpha beta", "gamma delta") == 0.0);
  CHECK(cosine_baseline("a b", "a c") == Catch::Approx(0.5));
  CHECK(cosine_baseline("", "") == 0.0);
  CHECK(cosine_baseline("x", "") == 0.0);
}

TEST_CASE("confusion arithmetic") {
  auto m = metrics_from_counts(2, 1, 0, 1);
  CHECK(m.precision == Catch::Approx(2.0 / 3.0));
  CHECK(m.recall == Catch::Approx(2.0 / 3.0));
  CHECK(m.f1 == Catch::Approx(2.0 / 3.0));
  CHECK(!m.zero_support);
}

TEST_CASE("threshold sweep boundaries") {
  std::vector<ScoredPair> pairs;
  for (double s : {0.3, 0.6, 0.9}) pairs.push_back({s, true, false, 0});
  auto all_pos = threshold_sweep(pairs, {0.0});
  CHECK(all_pos.reports[0].recall == 1.0);

  auto none = threshold_sweep(pairs, {1.0});
  CHECK(none.reports[0].precision == 1.0);
  CHECK(none.reports[0].zero_support);
  CHECK(none.reports[0].tp == 0);

  CHECK_THROWS_AS(threshold_sweep({}, {0.5}), std::invalid_argument);
  CHECK_THROWS_AS(threshold_sweep(pairs, {}), std::invalid_argument);
}

TEST_CASE("balanced threshold minimizes the fp/fn gap") {
  // positives at 0.7, negatives at 0.4: any threshold in [0.4,0.7) is perfect
  std::vector<ScoredPair> pairs{{0.7, true, false, 0},
                                {0.7, true, false, 0},
                                {0.4, false, false, 0},
                                {0.4, false, false, 0}};
  auto sweep = threshold_sweep(pairs, {0.1, 0.5, 0.9});
  CHECK(sweep.balanced_threshold == 0.5);
  CHECK(sweep.reports[sweep.balanced_index].f1 == 1.0);
}

TEST_CASE("subset override forces a positive call") {
  std::vector<ScoredPair> pairs{{0.1, true, true, 0}};
  auto sweep = threshold_sweep(pairs, {0.5});
  CHECK(sweep.reports[0].tp == 1);
}

TEST_CASE("roc curve basics") {
  auto perfect = roc_curve({0.9, 0.8, 0.2, 0.1}, {true, true, false, false});
  CHECK(perfect.auc == Catch::Approx(1.0));
  auto chance = roc_curve({0.5, 0.5, 0.5, 0.5}, {true, false, true, false});
  CHECK(chance.auc == Catch::Approx(0.5));
  CHECK_THROWS_AS(roc_curve({0.1, 0.2}, {true, true}), std::invalid_argument);
  CHECK_THROWS_AS(roc_curve({0.1}, {true, false}), std::invalid_argument);
}

TEST_CASE("roc matches brute-force enumeration on a toy set") {
  std::vector<double> scores{0.8, 0.6, 0.4, 0.2};
  std::vector<bool> labels{true, false, true, false};
  auto roc = roc_curve(scores, labels);
  // brute force: thresholds between distinct scores
  for (const auto& pt : roc.points) {
    std::size_t tp = 0, fp = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
      if (scores[i] >= pt.threshold) (labels[i] ? tp : fp)++;
    CHECK(pt.tpr == Catch::Approx(tp / 2.0));
    CHECK(pt.fpr == Catch::Approx(fp / 2.0));
  }
  CHECK(roc.auc == Catch::Approx(0.75));
  // monotone in the sweep direction
  for (std::size_t i = 1; i < roc.points.size(); ++i) {
    CHECK(roc.points[i].tpr >= roc.points[i - 1].tpr);
    CHECK(roc.points[i].fpr >= roc.points[i - 1].fpr);
  }
}

TEST_CASE("stratum bucketing") {
  CHECK(stratum_of(0.0) == 0);
  CHECK(stratum_of(0.124) == 0);
  CHECK(stratum_of(0.125) == 1);
  CHECK(stratum_of(0.875) == 7);
  CHECK(stratum_of(1.0) == 7);
  CHECK_THROWS_AS(stratum_of(1.5), std::invalid_argument);
}

namespace {

std::vector<ArticleData> small_corpus(std::uint64_t seed, int n_articles) {
  std::mt19937_64 rng(seed);
  std::vector<ArticleData> data;
  synth::Config cfg;
  cfg.max_revs = 5;
  for (int i = 0; i < n_articles; ++i)
    data.push_back(prepare_article(synth::random_article(rng, i + 1, cfg)));
  return data;
}

}  // namespace

TEST_CASE("stratified sampling is deterministic and correctly bucketed") {
  auto corpus = small_corpus(11, 40);
  auto a = stratified_sample(corpus, 5, 42, 20000);
  auto b = stratified_sample(corpus, 5, 42, 20000);
  REQUIRE(a.pairs.size() == b.pairs.size());
  for (std::size_t i = 0; i < a.pairs.size(); ++i) {
    CHECK(a.pairs[i].text_a == b.pairs[i].text_a);
    CHECK(a.pairs[i].rev_b == b.pairs[i].rev_b);
  }
  auto c = stratified_sample(corpus, 5, 43, 20000);
  bool differs = a.pairs.size() != c.pairs.size();
  for (std::size_t i = 0; !differs && i < a.pairs.size(); ++i)
    differs = a.pairs[i].text_a != c.pairs[i].text_a || a.pairs[i].rev_a != c.pairs[i].rev_a;
  CHECK(differs);

  for (const auto& p : a.pairs) {
    double j = jaccard(p.tokens_a, p.tokens_b);
    CHECK(j == p.jaccard);
    CHECK(stratum_of(j) == p.stratum);
    CHECK(p.stratum < kNumStrata);
  }
  std::array<std::size_t, kNumStrata> fill{};
  for (const auto& p : a.pairs) fill[p.stratum]++;
  CHECK(fill == a.fill);
}

TEST_CASE("too small a corpus reports partial fill") {
  auto corpus = small_corpus(5, 2);
  auto r = stratified_sample(corpus, 100, 1, 500);
  CHECK(!r.complete);
  std::size_t total = 0;
  for (auto f : r.fill) total += f;
  CHECK(total == r.pairs.size());
}

TEST_CASE("similarity distribution counts pairs per stratum") {
  auto corpus = small_corpus(11, 20);
  auto counts = similarity_distribution(corpus, 200, 42, 20000);
  std::size_t total = 0;
  for (auto c : counts) total += c;
  CHECK(total == 200);
  CHECK(counts == similarity_distribution(corpus, 200, 42, 20000));
}

TEST_CASE("resampled micro metrics") {
  std::vector<ScoredPair> pairs;
  std::vector<bool> predicted;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 200; ++i) {
    ScoredPair p;
    p.stratum = i % kNumStrata;
    p.gold_positive = rng() % 2 == 0;
    pairs.push_back(p);
    predicted.push_back(p.gold_positive ? rng() % 10 != 0 : rng() % 10 == 0);
  }
  std::array<double, kNumStrata> uniform;
  uniform.fill(1.0);

  // plain micro metrics for comparison
  std::size_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (predicted[i] && pairs[i].gold_positive) ++tp;
    else if (predicted[i]) ++fp;
    else if (pairs[i].gold_positive) ++fn;
    else ++tn;
  }
  auto plain = metrics_from_counts(tp, fp, tn, fn);
  auto rs = resampled_micro_metrics(pairs, predicted, uniform, 42, 1000);
  CHECK(rs.mean.f1 == Catch::Approx(plain.f1).margin(0.05));
  CHECK(rs.f1_stderr < 0.05);
  CHECK(rs.draws == 1000);

  SECTION("weight one on a perfect stratum gives f1 one") {
    std::vector<ScoredPair> strong;
    std::vector<bool> pred;
    for (int i = 0; i < 50; ++i) {
      ScoredPair p;
      p.stratum = 7;
      p.gold_positive = i % 2 == 0;
      strong.push_back(p);
      pred.push_back(p.gold_positive);
    }
    std::array<double, kNumStrata> w{};
    w[7] = 1.0;
    auto r = resampled_micro_metrics(strong, pred, w, 1, 1000);
    CHECK(r.mean.f1 == Catch::Approx(1.0));
  }
  SECTION("weighted empty stratum is an error") {
    std::array<double, kNumStrata> w{};
    w[3] = 1.0;
    std::vector<ScoredPair> only7{{0.5, true, false, 7}};
    CHECK_THROWS_AS(resampled_micro_metrics(only7, {true}, w, 1, 1000),
                    std::invalid_argument);
  }
  SECTION("too few draws is an error") {
    CHECK_THROWS_AS(resampled_micro_metrics(pairs, predicted, uniform, 1, 10),
                    std::invalid_argument);
  }
}

TEST_CASE("scoring a gold pair against corpus provenance") {
  auto corpus = small_corpus(21, 10);
  // build a trivially equivalent pair from a ref that survives two revisions
  for (const auto& ad : corpus) {
    for (std::size_t r = 0; r + 1 < ad.occurrences.size(); ++r) {
      for (const auto& occ : ad.occurrences[r])
        for (const auto& occ2 : ad.occurrences[r + 1])
          if (occ2.h == occ.h) {
            GoldPair g;
            g.article_id = ad.article.article_id;
            g.rev_a = occ.revision_id;
            g.rev_b = occ2.revision_id;
            g.text_a = ad.article.revisions[r].wikitext.substr(
                occ.raw_span.first, occ.raw_span.second - occ.raw_span.first);
            g.text_b = ad.article.revisions[r + 1].wikitext.substr(
                occ2.raw_span.first, occ2.raw_span.second - occ2.raw_span.first);
            auto s = score_pair_in_corpus(ad, g);
            CHECK(s.jaccard == 1.0);
            CHECK(s.subset);
            CHECK(s.cosine == Catch::Approx(1.0));
            return;
          }
    }
  }
  FAIL("no stable ref found in the generated corpus");
}
