#pragma once

#include <algorithm>
#include <fstream>
#include <functional>
#include <istream>
#include <map>
#include <sstream>

#include "refhist/types.hpp"
#include <json.hpp>

namespace refhist {

struct IngestStats {
  std::size_t pages_seen = 0;
  std::size_t pages_kept = 0;
  std::size_t redirects_skipped = 0;
  std::size_t non_article_ns = 0;
  std::size_t bad_revisions = 0;   // missing timestamp/contributor
  std::size_t resorted_articles = 0;
  std::size_t reverted_skipped = 0;
};

struct IngestOptions {
  bool skip_reverted = false;  // drop identity reverts (hash seen >= 2 revisions back)
};

// ---- contributor classification -------------------------------------------

struct RawContributor {
  std::optional<std::int64_t> user_id;
  std::optional<std::string> user_name;
  std::optional<std::string> ip;
};

/// IP => NonRegistered; name on the bot list => Bot; otherwise Registered.
inline EditorIdentity classify_editor(const RawContributor& raw, const BotList& bots) {
  const bool has_name = raw.user_name.has_value();
  const bool has_ip = raw.ip.has_value();
  if (has_name == has_ip)
    throw std::invalid_argument("contributor must have exactly one of username/ip");
  EditorIdentity e;
  if (has_ip) {
    e.kind = EditorKind::NonRegistered;
    e.ip = raw.ip;
  } else {
    e.kind = bots.contains(*raw.user_name) ? EditorKind::Bot : EditorKind::Registered;
    e.user_name = raw.user_name;
    e.user_id = raw.user_id;
  }
  return e;
}

/// Union of bot-name files, one name per line, '#' comments allowed.
inline BotList load_botlist(const std::vector<std::string>& paths) {
  BotList bots;
  for (const auto& path : paths) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read bot list: " + path);
    std::string line;
    while (std::getline(in, line)) {
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      bots.add(line);
    }
  }
  return bots;
}

// ---- shared post-processing ------------------------------------------------

inline bool is_redirect_text(std::string_view text) {
  auto b = text.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return false;
  constexpr std::string_view marker = "#redirect";
  if (text.size() - b < marker.size()) return false;
  for (std::size_t i = 0; i < marker.size(); ++i) {
    char c = text[b + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != marker[i]) return false;
  }
  return true;
}

namespace detail {

inline void finalize_article(Article& art, IngestStats& stats, const IngestOptions& opt) {
  auto& revs = art.revisions;
  if (!std::is_sorted(revs.begin(), revs.end(), [](const auto& a, const auto& b) {
        return std::tie(a.timestamp, a.revision_id) < std::tie(b.timestamp, b.revision_id);
      })) {
    std::stable_sort(revs.begin(), revs.end(), [](const auto& a, const auto& b) {
      return std::tie(a.timestamp, a.revision_id) < std::tie(b.timestamp, b.revision_id);
    });
    ++stats.resorted_articles;
  }
  if (opt.skip_reverted && revs.size() > 2) {
    std::vector<std::size_t> drop;
    std::map<std::size_t, std::vector<std::size_t>> by_hash;  // text hash -> indices
    std::hash<std::string> h;
    for (std::size_t i = 0; i < revs.size(); ++i) {
      auto hv = h(revs[i].wikitext);
      auto& seen = by_hash[hv];
      for (std::size_t j : seen)
        if (i >= j + 2 && revs[i].wikitext == revs[j].wikitext) {
          drop.push_back(i);
          break;
        }
      seen.push_back(i);
    }
    for (auto it = drop.rbegin(); it != drop.rend(); ++it) {
      revs.erase(revs.begin() + static_cast<std::ptrdiff_t>(*it));
      ++stats.reverted_skipped;
    }
  }
}

}  // namespace detail

// ---- JSONL fixture format --------------------------------------------------

/// One revision object per line:
/// {"article_id":int,"title":str,"revision_id":int,"timestamp":"...Z",
///  "editor":{"name":str}|{"ip":str},"text":str}
inline std::vector<Article> parse_jsonl(std::istream& in, const BotList& bots,
                                        IngestStats& stats, const IngestOptions& opt = {}) {
  std::map<std::int64_t, Article> by_id;
  std::vector<std::int64_t> order;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw std::runtime_error("jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
    try {
      RevisionRecord rec;
      rec.article_id = j.at("article_id").get<std::int64_t>();
      rec.article_title = j.value("title", "");
      rec.revision_id = j.at("revision_id").get<std::int64_t>();
      rec.timestamp = parse_iso8601(j.at("timestamp").get<std::string>());
      const auto& ed = j.at("editor");
      RawContributor raw;
      if (ed.contains("name")) raw.user_name = ed["name"].get<std::string>();
      if (ed.contains("id")) raw.user_id = ed["id"].get<std::int64_t>();
      if (ed.contains("ip")) raw.ip = ed["ip"].get<std::string>();
      rec.editor = classify_editor(raw, bots);
      rec.wikitext = j.at("text").get<std::string>();
      auto [it, inserted] = by_id.try_emplace(rec.article_id);
      if (inserted) {
        it->second.article_id = rec.article_id;
        it->second.title = rec.article_title;
        order.push_back(rec.article_id);
      }
      it->second.revisions.push_back(std::move(rec));
    } catch (const std::exception& e) {
      throw std::runtime_error("jsonl line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  std::vector<Article> out;
  out.reserve(order.size());
  for (auto id : order) {
    Article& art = by_id[id];
    ++stats.pages_seen;
    detail::finalize_article(art, stats, opt);
    if (!art.revisions.empty() && is_redirect_text(art.revisions.back().wikitext)) {
      ++stats.redirects_skipped;
      continue;
    }
    ++stats.pages_kept;
    out.push_back(std::move(art));
  }
  return out;
}

/// Canonical field order; parse_jsonl(export_jsonl(x)) reproduces x.
inline void export_jsonl(const std::vector<Article>& articles, std::ostream& out) {
  for (const auto& art : articles)
    for (const auto& rec : art.revisions) {
      nlohmann::json ed;
      if (rec.editor.kind == EditorKind::NonRegistered) {
        ed["ip"] = *rec.editor.ip;
      } else {
        ed["name"] = *rec.editor.user_name;
        if (rec.editor.user_id) ed["id"] = *rec.editor.user_id;
      }
      nlohmann::json j{{"article_id", rec.article_id},
                       {"title", art.title},
                       {"revision_id", rec.revision_id},
                       {"timestamp", format_iso8601(rec.timestamp)},
                       {"editor", ed},
                       {"text", rec.wikitext}};
      out << j.dump() << '\n';
    }
}

}  // namespace refhist
