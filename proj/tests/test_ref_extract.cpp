#include <catch2/catch_amalgamated.hpp>

#include "refhist/ref_extract.hpp"
#include "synth.hpp"

using namespace refhist;

namespace {

RevisionRecord single_rev(const std::string& text) {
  RevisionRecord r;
  r.article_id = 1;
  r.revision_id = 1;
  r.timestamp = 1136073600;
  r.editor.user_name = "E";
  r.wikitext = text;
  return r;
}

std::vector<RefOccurrence> extract(const std::string& text, ExtractStats* stats = nullptr) {
  auto att = attribute_article({single_rev(text)});
  return extract_refs(single_rev(text), att.views[0], stats);
}

// Independent pair counter: literal scan for <ref openings and </ref> closers.
std::size_t count_pairs(const std::string& text) {
  std::size_t count = 0, pos = 0;
  auto lower = ascii_lower(text);
  while ((pos = lower.find("<ref", pos)) != std::string::npos) {
    char c = pos + 4 < lower.size() ? lower[pos + 4] : '\0';
    if (c != '>' && c != '/' && c != ' ' && c != '\t' && c != '\n' && c != '\r') {
      ++pos;
      continue;
    }
    auto gt = lower.find('>', pos);
    if (gt == std::string::npos) break;
    auto slash = lower.find_last_not_of(" \t\r\n", gt - 1);
    if (slash != std::string::npos && lower[slash] == '/' && slash > pos) {
      pos = gt + 1;
      continue;
    }
    auto close = lower.find("</ref", gt);
    if (close == std::string::npos) {
      pos = gt + 1;
      continue;
    }
    auto cgt = lower.find_first_not_of(" \t\r\n", close + 5);
    if (cgt == std::string::npos || lower[cgt] != '>') {
      pos = gt + 1;
      continue;
    }
    bool empty = lower.find_first_not_of(" \t\r\n", gt + 1) >= close;
    if (!empty) ++count;
    pos = cgt + 1;
  }
  return count;
}

}  // namespace

TEST_CASE("paired ref yields one occurrence over the inner tokens") {
  auto occs = extract("Intro text <ref>Clark 1971, p.18</ref> outro.");
  REQUIRE(occs.size() == 1);
  CHECK(occs[0].t.size() == 6);  // clark 1971 , p . 18
  CHECK(occs[0].doc_position == 0);
  CHECK(occs[0].h == hash_ref(occs[0].t));
}

TEST_CASE("void ref tag yields nothing") {
  CHECK(extract("a <ref name=ronald /> b").empty());
  CHECK(extract("a <ref name=\"x\"/> b").empty());
}

TEST_CASE("two paired refs and one void ref give two occurrences in order") {
  auto occs = extract("<ref>first cite</ref> mid <ref name=n /> <ref>second cite</ref>");
  REQUIRE(occs.size() == 2);
  CHECK(occs[0].doc_position == 0);
  CHECK(occs[1].doc_position == 1);
  CHECK(occs[0].raw_span.first < occs[1].raw_span.first);
}

TEST_CASE("tag matching is case-insensitive and attribute tokens are excluded") {
  auto occs = extract("x <REF NAME=\"alpha beta\">only inner words</REF> y");
  REQUIRE(occs.size() == 1);
  CHECK(occs[0].t.size() == 3);
}

TEST_CASE("references block is not an opening ref tag") {
  auto occs = extract("<references>\n<ref>inside block</ref>\n</references>");
  REQUIRE(occs.size() == 1);
  CHECK(occs[0].t.size() == 2);
}

TEST_CASE("unclosed ref is abandoned with a warning") {
  ExtractStats stats;
  auto occs = extract("good <ref>kept cite</ref> bad <ref>never closed", &stats);
  CHECK(occs.size() == 1);
  CHECK(stats.unclosed_refs == 1);
}

TEST_CASE("empty ref is dropped and counted") {
  ExtractStats stats;
  CHECK(extract("<ref>  </ref>", &stats).empty());
  CHECK(stats.empty_refs == 1);
}

TEST_CASE("occurrence count matches an independent scanner on random articles") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 50; ++trial) {
    synth::Config cfg;
    cfg.max_revs = 5;
    auto art = synth::random_article(rng, trial + 1, cfg);
    auto att = attribute_article(art.revisions);
    for (std::size_t r = 0; r < art.revisions.size(); ++r) {
      auto occs = extract_refs(art.revisions[r], att.views[r]);
      CHECK(occs.size() == count_pairs(art.revisions[r].wikitext));
    }
  }
}

TEST_CASE("hash is order-sensitive and deterministic") {
  CHECK(hash_ref({1, 2}) != hash_ref({2, 1}));
  CHECK(hash_ref({1, 2, 3}) == hash_ref({1, 2, 3}));
  CHECK_THROWS_AS(hash_ref({}), std::invalid_argument);
}

TEST_CASE("hash matches a byte-level reference implementation") {
  auto fnv_bytes = [](const std::vector<unsigned char>& bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
      h ^= b;
      h *= 1099511628211ull;
    }
    return h;
  };
  CHECK(hash_ref({1}) == fnv_bytes({1, 0, 0, 0, 0, 0, 0, 0}));
  CHECK(hash_ref({1, 258}) ==
        fnv_bytes({1, 0, 0, 0, 0, 0, 0, 0, 2, 1, 0, 0, 0, 0, 0, 0}));
}

TEST_CASE("no hash collisions across a generated corpus") {
  std::mt19937_64 rng(123);
  std::map<std::uint64_t, std::vector<TokenId>> seen;
  for (int trial = 0; trial < 40; ++trial) {
    auto art = synth::random_article(rng, trial + 1);
    auto att = attribute_article(art.revisions);
    for (std::size_t r = 0; r < art.revisions.size(); ++r)
      for (const auto& occ : extract_refs(art.revisions[r], att.views[r])) {
        auto [it, inserted] = seen.try_emplace(occ.h, occ.t);
        if (!inserted) CHECK(it->second == occ.t);
      }
  }
}
