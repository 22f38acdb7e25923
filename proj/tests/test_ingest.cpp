#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

#include "refhist/ingest.hpp"

using namespace refhist;

namespace {

std::string rev_line(std::int64_t art, std::int64_t rev, const std::string& ts,
                     const std::string& editor_json, const std::string& text) {
  std::ostringstream ss;
  ss << R"({"article_id":)" << art << R"(,"title":"T","revision_id":)" << rev
     << R"(,"timestamp":")" << ts << R"(","editor":)" << editor_json << R"(,"text":")" << text
     << R"("})";
  return ss.str();
}

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& content) {
    static int n = 0;
    path = "ingest_tmp_" + std::to_string(n++) + ".txt";
    std::ofstream(path) << content;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("classify_editor maps ip, bot name, plain name") {
  BotList bots;
  bots.add("ClueBot NG");
  RawContributor ip;
  ip.ip = "127.0.0.1";
  CHECK(classify_editor(ip, bots).kind == EditorKind::NonRegistered);
  RawContributor bot;
  bot.user_name = "ClueBot NG";
  CHECK(classify_editor(bot, bots).kind == EditorKind::Bot);
  RawContributor alice;
  alice.user_name = "Alice";
  CHECK(classify_editor(alice, bots).kind == EditorKind::Registered);
}

TEST_CASE("classify_editor rejects malformed contributors") {
  BotList bots;
  RawContributor both;
  both.user_name = "A";
  both.ip = "1.2.3.4";
  CHECK_THROWS_AS(classify_editor(both, bots), std::invalid_argument);
  RawContributor neither;
  CHECK_THROWS_AS(classify_editor(neither, bots), std::invalid_argument);
}

TEST_CASE("load_botlist unions files case-insensitively") {
  TempFile f1("a\nb\n# comment\n");
  TempFile f2("B\nc\nBOT1\n");
  TempFile f3("bot1\n");
  BotList bots = load_botlist({f1.path, f2.path, f3.path});
  CHECK(bots.contains("A"));
  CHECK(bots.contains("b"));
  CHECK(bots.contains("C"));
  CHECK(bots.contains("Bot1"));
  CHECK(!bots.contains("comment"));
  CHECK_THROWS(load_botlist({"no_such_file.txt"}));
}

TEST_CASE("parse_jsonl groups and orders revisions") {
  std::stringstream in(
      rev_line(1, 11, "2006-01-01T00:00:00Z", R"({"name":"Alice"})", "one") + "\n" +
      rev_line(1, 12, "2006-01-02T00:00:00Z", R"({"ip":"1.2.3.4"})", "two") + "\n");
  BotList bots;
  IngestStats stats;
  auto arts = parse_jsonl(in, bots, stats);
  REQUIRE(arts.size() == 1);
  REQUIRE(arts[0].revisions.size() == 2);
  CHECK(arts[0].revisions[0].revision_id == 11);
  CHECK(arts[0].revisions[1].editor.kind == EditorKind::NonRegistered);
  CHECK(stats.pages_kept == 1);
}

TEST_CASE("round trip is the identity on canonical corpora") {
  std::stringstream in(
      rev_line(1, 11, "2006-01-01T00:00:00Z", R"({"name":"Alice"})", "one") + "\n" +
      rev_line(2, 21, "2007-05-01T10:30:00Z", R"({"ip":"1.2.3.4"})", "two") + "\n");
  BotList bots;
  IngestStats stats;
  auto arts = parse_jsonl(in, bots, stats);
  std::ostringstream exported;
  export_jsonl(arts, exported);
  std::istringstream back(exported.str());
  IngestStats stats2;
  auto arts2 = parse_jsonl(back, bots, stats2);
  std::ostringstream exported2;
  export_jsonl(arts2, exported2);
  CHECK(exported.str() == exported2.str());
}

TEST_CASE("out-of-order timestamps are re-sorted with a warning") {
  std::stringstream in(
      rev_line(1, 12, "2006-01-02T00:00:00Z", R"({"name":"A"})", "later") + "\n" +
      rev_line(1, 11, "2006-01-01T00:00:00Z", R"({"name":"A"})", "earlier") + "\n");
  BotList bots;
  IngestStats stats;
  auto arts = parse_jsonl(in, bots, stats);
  REQUIRE(arts.size() == 1);
  CHECK(arts[0].revisions[0].revision_id == 11);
  CHECK(stats.resorted_articles == 1);
}

TEST_CASE("redirect pages are skipped by their latest revision") {
  std::stringstream in(
      rev_line(1, 11, "2006-01-01T00:00:00Z", R"({"name":"A"})", "article text") + "\n" +
      rev_line(1, 12, "2006-01-02T00:00:00Z", R"({"name":"A"})",
               "  #REDIRECT [[Symbiont]]") + "\n");
  BotList bots;
  IngestStats stats;
  auto arts = parse_jsonl(in, bots, stats);
  CHECK(arts.empty());
  CHECK(stats.redirects_skipped == 1);
}

TEST_CASE("historical redirect that became an article is kept") {
  std::stringstream in(
      rev_line(1, 11, "2006-01-01T00:00:00Z", R"({"name":"A"})", "#REDIRECT [[X]]") + "\n" +
      rev_line(1, 12, "2006-01-02T00:00:00Z", R"({"name":"A"})", "real text now") + "\n");
  BotList bots;
  IngestStats stats;
  CHECK(parse_jsonl(in, bots, stats).size() == 1);
}

TEST_CASE("invalid line errors name the line number") {
  std::stringstream in("# comment\n{not json}\n");
  BotList bots;
  IngestStats stats;
  try {
    parse_jsonl(in, bots, stats);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("empty input yields an empty corpus") {
  std::stringstream in("");
  BotList bots;
  IngestStats stats;
  CHECK(parse_jsonl(in, bots, stats).empty());
}

TEST_CASE("skip_reverted drops identity reverts") {
  std::stringstream in(
      rev_line(1, 11, "2006-01-01T00:00:00Z", R"({"name":"A"})", "good text") + "\n" +
      rev_line(1, 12, "2006-01-02T00:00:00Z", R"({"name":"B"})", "vandalized") + "\n" +
      rev_line(1, 13, "2006-01-03T00:00:00Z", R"({"name":"A"})", "good text") + "\n");
  BotList bots;
  IngestStats stats;
  IngestOptions opt;
  opt.skip_reverted = true;
  auto arts = parse_jsonl(in, bots, stats, opt);
  REQUIRE(arts.size() == 1);
  CHECK(arts[0].revisions.size() == 2);
  CHECK(stats.reverted_skipped == 1);
}
