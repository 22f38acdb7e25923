#pragma once

#include <istream>
#include <ostream>

#include "refhist/history.hpp"
#include <json.hpp>

namespace refhist {

namespace detail {

inline std::string hash_hex(std::uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

inline nlohmann::json editor_json(const EditorIdentity& e) {
  nlohmann::json j{{"kind", to_string(e.kind)}};
  if (e.kind == EditorKind::NonRegistered) {
    j["ip"] = *e.ip;
  } else {
    j["name"] = *e.user_name;
    if (e.user_id) j["id"] = *e.user_id;
  }
  return j;
}

inline EditorIdentity editor_from_json(const nlohmann::json& j) {
  EditorIdentity e;
  std::string kind = j.at("kind").get<std::string>();
  if (kind == "non_registered") {
    e.kind = EditorKind::NonRegistered;
    e.ip = j.at("ip").get<std::string>();
  } else {
    e.kind = kind == "bot" ? EditorKind::Bot : EditorKind::Registered;
    e.user_name = j.at("name").get<std::string>();
    if (j.contains("id")) e.user_id = j["id"].get<std::int64_t>();
  }
  return e;
}

}  // namespace detail

/// One history per line. `raw` carries the reference's inner wikitext so the
/// DID stage can run on exported files; `with_tokens` adds the token id list.
inline void export_histories(const std::vector<RefHistory>& histories, std::ostream& out,
                             bool with_tokens = false) {
  for (const auto& h : histories) {
    nlohmann::json snaps = nlohmann::json::array();
    for (const auto& s : h.snapshots) {
      nlohmann::json j{{"action", to_string(s.a)},
                       {"revision", s.r},
                       {"hash", detail::hash_hex(s.h)},
                       {"editor", detail::editor_json(s.e)},
                       {"timestamp", format_iso8601(s.z)},
                       {"n_tokens", s.t.size()}};
      if (s.a != ActionKind::Deletion) j["raw"] = s.raw_text;
      if (with_tokens) j["tokens"] = s.t;
      snaps.push_back(std::move(j));
    }
    out << nlohmann::json{{"article_id", h.article_id}, {"snapshots", snaps}}.dump() << '\n';
  }
}

inline std::vector<RefHistory> import_histories(std::istream& in) {
  std::vector<RefHistory> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
      RefHistory h;
      h.article_id = j.at("article_id").get<std::int64_t>();
      for (const auto& sj : j.at("snapshots")) {
        RefSnapshot s;
        std::string a = sj.at("action").get<std::string>();
        if (a == "creation") s.a = ActionKind::Creation;
        else if (a == "modification") s.a = ActionKind::Modification;
        else if (a == "deletion") s.a = ActionKind::Deletion;
        else if (a == "reinsertion") s.a = ActionKind::Reinsertion;
        else throw std::runtime_error("unknown action: " + a);
        s.r = sj.at("revision").get<std::int64_t>();
        s.h = std::stoull(sj.at("hash").get<std::string>(), nullptr, 16);
        s.e = detail::editor_from_json(sj.at("editor"));
        s.z = parse_iso8601(sj.at("timestamp").get<std::string>());
        if (sj.contains("raw")) s.raw_text = sj["raw"].get<std::string>();
        if (sj.contains("tokens")) s.t = sj["tokens"].get<std::vector<TokenId>>();
        else if (s.a != ActionKind::Deletion) s.t.resize(sj.at("n_tokens").get<std::size_t>());
        h.snapshots.push_back(std::move(s));
      }
      out.push_back(std::move(h));
    } catch (const std::exception& e) {
      throw std::runtime_error("history line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace refhist
