#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "refhist/attribution.hpp"
#include "synth.hpp"

using namespace refhist;

namespace {

std::vector<RevisionRecord> revisions(const std::vector<std::string>& texts) {
  std::vector<RevisionRecord> out;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    RevisionRecord r;
    r.article_id = 1;
    r.revision_id = static_cast<std::int64_t>(i) + 1;
    r.timestamp = 1136073600 + static_cast<Instant>(i) * 3600;
    r.editor.user_name = "E";
    r.wikitext = texts[i];
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace

TEST_CASE("duplicate insertion gets a fresh id, the old instance keeps its id") {
  auto att = attribute_article(revisions({
      "the novel was written by benjamin disraeli",
      "the novel was written by benjamin benjamin disraeli",
  }));
  REQUIRE(att.views[0].ids == std::vector<TokenId>{1, 2, 3, 4, 5, 6, 7});
  REQUIRE(att.views[1].ids.size() == 8);
  std::set<TokenId> v2(att.views[1].ids.begin(), att.views[1].ids.end());
  CHECK(v2 == std::set<TokenId>{1, 2, 3, 4, 5, 6, 7, 8});
  // the instance adjacent to its original right context keeps id 6
  CHECK(att.views[1].ids[6] == 6);
  CHECK(att.views[1].ids[5] == 8);
  CHECK(att.views[1].ids[7] == 7);
  CHECK(att.table.surface(8) == "benjamin");
}

TEST_CASE("identical consecutive revisions share token views") {
  auto att = attribute_article(revisions({"alpha beta. gamma delta.", "alpha beta. gamma delta."}));
  CHECK(att.views[0].ids == att.views[1].ids);
}

TEST_CASE("a reference in a new paragraph gets fresh ids despite shared surfaces") {
  std::string para1 = "The origin chapter cites darwin 1859 on the origin of species here.";
  auto att = attribute_article(revisions({
      para1,
      para1 + "\n\nA review cites crawford 1859 review of on the origin of species too.",
  }));
  std::set<TokenId> v1(att.views[0].ids.begin(), att.views[0].ids.end());
  const auto& ids2 = att.views[1].ids;
  std::size_t n1 = att.views[0].ids.size();
  REQUIRE(ids2.size() > n1);
  // the original paragraph keeps its ids
  for (std::size_t i = 0; i < n1; ++i) CHECK(ids2[i] == att.views[0].ids[i]);
  // every token of the new paragraph is fresh, shared strings included
  for (std::size_t i = n1; i < ids2.size(); ++i) CHECK(!v1.count(ids2[i]));
}

TEST_CASE("a sentence deleted and pasted back verbatim reclaims its ids") {
  std::string kept = "Stable opening sentence stays here.";
  std::string target = "The cited survey covers mutualism extensively.";
  auto att = attribute_article(revisions({
      kept + "\n\n" + target,
      kept,
      kept + "\n\n" + target,
  }));
  CHECK(att.views[2].ids == att.views[0].ids);
  CHECK(att.views[1].ids.size() < att.views[0].ids.size());
}

TEST_CASE("reinsertion works across a long gap") {
  std::string kept = "Anchor paragraph that never changes.";
  std::string target = "Unique deleted claim about symbionts.";
  std::vector<std::string> texts{kept + "\n\n" + target, kept, kept, kept,
                                 kept + "\n\n" + target};
  auto att = attribute_article(revisions(texts));
  CHECK(att.views[4].ids == att.views[0].ids);
}

TEST_CASE("blanking yields an empty view") {
  auto att = attribute_article(revisions({"some words here", ""}));
  CHECK(att.views[1].ids.empty());
}

TEST_CASE("in-place word replacement keeps the untouched ids") {
  auto att = attribute_article(revisions({
      "alpha beta gamma delta epsilon",
      "alpha beta zeta delta epsilon",
  }));
  const auto& v1 = att.views[0].ids;
  const auto& v2 = att.views[1].ids;
  REQUIRE(v2.size() == 5);
  CHECK(v2[0] == v1[0]);
  CHECK(v2[1] == v1[1]);
  CHECK(v2[2] == 6);  // fresh id for the replacement
  CHECK(v2[3] == v1[3]);
  CHECK(v2[4] == v1[4]);
}

TEST_CASE("invariants hold on random articles") {
  std::mt19937_64 rng(20260824);
  for (int trial = 0; trial < 60; ++trial) {
    synth::Config cfg;
    cfg.max_revs = 6;
    auto art = synth::random_article(rng, trial + 1, cfg);
    auto att = attribute_article(art.revisions);
    REQUIRE(att.views.size() == art.revisions.size());
    TokenId max_prev = 0;
    for (std::size_t r = 0; r < att.views.size(); ++r) {
      auto toks = tokenize(art.revisions[r].wikitext);
      REQUIRE(att.views[r].ids.size() == toks.size());
      TokenId max_here = max_prev;
      std::set<TokenId> seen;
      for (std::size_t i = 0; i < toks.size(); ++i) {
        TokenId id = att.views[r].ids[i];
        // an id never maps to two different surfaces
        CHECK(att.table.surface(id) == toks[i]);
        // ids are unique within a view
        CHECK(seen.insert(id).second);
        max_here = std::max(max_here, id);
      }
      // monotone id allocation
      CHECK(max_here >= max_prev);
      max_prev = max_here;
    }
  }
}

TEST_CASE("attribution is deterministic") {
  std::mt19937_64 rng(7);
  auto art = synth::random_article(rng, 1);
  auto a = attribute_article(art.revisions);
  auto b = attribute_article(art.revisions);
  for (std::size_t r = 0; r < a.views.size(); ++r) CHECK(a.views[r].ids == b.views[r].ids);
}
