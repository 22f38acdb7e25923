#pragma once

#include <istream>

#include "refhist/ingest.hpp"
#include "refhist/types.hpp"

namespace refhist {

struct XmlParseError : std::runtime_error {
  XmlParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
  std::size_t byte_offset;
};

namespace detail {

inline std::string xml_unescape(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size();) {
    if (s[i] != '&') {
      out += s[i++];
      continue;
    }
    auto semi = s.find(';', i);
    if (semi == std::string_view::npos || semi - i > 10) {
      out += s[i++];
      continue;
    }
    std::string_view ent = s.substr(i + 1, semi - i - 1);
    if (ent == "lt") out += '<';
    else if (ent == "gt") out += '>';
    else if (ent == "amp") out += '&';
    else if (ent == "quot") out += '"';
    else if (ent == "apos") out += '\'';
    else if (!ent.empty() && ent[0] == '#') {
      unsigned long cp = 0;
      try {
        cp = (ent.size() > 1 && (ent[1] == 'x' || ent[1] == 'X'))
                 ? std::stoul(std::string(ent.substr(2)), nullptr, 16)
                 : std::stoul(std::string(ent.substr(1)));
      } catch (...) {
        out += s.substr(i, semi - i + 1);
        i = semi + 1;
        continue;
      }
      // UTF-8 encode
      if (cp < 0x80) out += static_cast<char>(cp);
      else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
      }
    } else {
      out += s.substr(i, semi - i + 1);
    }
    i = semi + 1;
  }
  return out;
}

// Buffered forward scanner over an istream; keeps only the unconsumed tail.
class XmlScanner {
 public:
  explicit XmlScanner(std::istream& in) : in_(in) {}

  std::size_t offset() const { return base_ + pos_; }

  // Advances past the next occurrence of `needle` before `stop` (if given).
  // Returns false if `stop` (or EOF) comes first; position is then unchanged
  // for `stop`, or at EOF.
  bool skip_past(std::string_view needle, std::string_view stop = {}) {
    std::size_t at, stop_at;
    if (!locate(needle, stop, at, stop_at)) return false;
    pos_ = at + needle.size();
    return true;
  }

  // Captures text between the current position's next `open` tag and its
  // `close` tag, both before `stop`. Returns nullopt when `stop`/EOF comes
  // first (position unchanged in that case).
  std::optional<std::string> capture(std::string_view open, std::string_view close,
                                     std::string_view stop = {}) {
    std::size_t at, stop_at;
    if (!locate(open, stop, at, stop_at)) return std::nullopt;
    std::size_t content = at + open.size();
    std::size_t close_at, dummy;
    std::size_t save = pos_;
    pos_ = content;
    if (!locate(close, {}, close_at, dummy)) {
      pos_ = save;
      throw XmlParseError("missing close tag " + std::string(close), base_ + content);
    }
    std::string out(buf_.substr(content - rel(), close_at - content));
    pos_ = close_at + close.size();
    return out;
  }

  bool eof() { return pos_ >= buf_rel_end() && !refill(); }

 private:
  std::size_t rel() const { return discarded_; }
  std::size_t buf_rel_end() const { return discarded_ + buf_.size(); }

  // Finds `needle` at/after pos_, unless `stop` occurs strictly earlier.
  bool locate(std::string_view needle, std::string_view stop, std::size_t& at,
              std::size_t& stop_at) {
    for (;;) {
      std::size_t local = pos_ - rel();
      auto n = buf_.find(needle, local);
      auto s = stop.empty() ? std::string::npos : buf_.find(stop, local);
      if (n != std::string::npos && (s == std::string::npos || n < s)) {
        at = rel() + n;
        stop_at = std::string::npos;
        return true;
      }
      if (s != std::string::npos && (n == std::string::npos || s <= n)) {
        // stop found first; but the needle might still straddle the buffer end
        // only if it would begin after stop, so stop wins.
        stop_at = rel() + s;
        return false;
      }
      if (!refill()) {
        at = stop_at = std::string::npos;
        return false;
      }
    }
  }

  bool refill() {
    // Drop consumed prefix but keep a tail long enough for straddling tags.
    std::size_t local = pos_ - rel();
    if (local > kKeep) {
      std::size_t cut = local - kKeep;
      buf_.erase(0, cut);
      discarded_ += cut;
    }
    char chunk[1 << 16];
    in_.read(chunk, sizeof(chunk));
    std::streamsize got = in_.gcount();
    if (got <= 0) return false;
    buf_.append(chunk, static_cast<std::size_t>(got));
    return true;
  }

  static constexpr std::size_t kKeep = 256;
  std::istream& in_;
  std::string buf_;
  std::size_t pos_ = 0;        // absolute offset of the cursor
  std::size_t discarded_ = 0;  // absolute offset of buf_[0]
  std::size_t base_ = 0;
};

}  // namespace detail

/// Parses a MediaWiki `pages-meta-history` XML export. Keeps ns=0 pages whose
/// latest revision is not a redirect; within a page, revisions are re-sorted
/// by (timestamp, revision_id). Revisions lacking a timestamp or contributor
/// are dropped and counted in stats.bad_revisions.
inline std::vector<Article> parse_dump(std::istream& in, const BotList& bots,
                                       IngestStats& stats, const IngestOptions& opt = {}) {
  detail::XmlScanner sc(in);
  std::vector<Article> out;
  if (!sc.skip_past("<mediawiki"))
    throw XmlParseError("not a MediaWiki export (no <mediawiki> root)", 0);

  while (sc.skip_past("<page>")) {
    ++stats.pages_seen;
    Article art;
    auto title = sc.capture("<title>", "</title>", "</page>");
    if (title) art.title = detail::xml_unescape(*title);
    auto ns = sc.capture("<ns>", "</ns>", "</page>");
    bool main_ns = !ns || *ns == "0";
    auto id = sc.capture("<id>", "</id>", "</page>");
    if (!id) throw XmlParseError("page without <id>", sc.offset());
    art.article_id = std::stoll(*id);

    while (sc.skip_past("<revision>", "</page>")) {
      RevisionRecord rec;
      rec.article_id = art.article_id;
      rec.article_title = art.title;
      bool ok = true;
      auto rid = sc.capture("<id>", "</id>", "</revision>");
      if (rid) rec.revision_id = std::stoll(*rid);
      else ok = false;
      auto ts = sc.capture("<timestamp>", "</timestamp>", "</revision>");
      if (ts) {
        try {
          rec.timestamp = parse_iso8601(*ts);
        } catch (const std::invalid_argument&) {
          ok = false;
        }
      } else {
        ok = false;
      }
      // <contributor> may be a void tag (deleted="deleted" />)
      std::optional<std::string> contributor;
      if (auto copen = sc.capture("<contributor", ">", "</revision>")) {
        bool void_tag = !copen->empty() && copen->back() == '/';
        if (!void_tag) {
          auto body = sc.capture("", "</contributor>", "</revision>");
          if (body && copen->find("deleted=") == std::string::npos) contributor = body;
        }
      }
      if (contributor) {
        RawContributor raw;
        auto grab = [&](std::string_view open, std::string_view close) -> std::optional<std::string> {
          auto b = contributor->find(open);
          if (b == std::string::npos) return std::nullopt;
          b += open.size();
          auto e = contributor->find(close, b);
          if (e == std::string::npos) return std::nullopt;
          return detail::xml_unescape(std::string_view(*contributor).substr(b, e - b));
        };
        if (auto name = grab("<username>", "</username>")) raw.user_name = *name;
        if (auto uid = grab("<id>", "</id>"); uid && raw.user_name) raw.user_id = std::stoll(*uid);
        if (auto ip = grab("<ip>", "</ip>"); ip && !raw.user_name) raw.ip = *ip;
        if (raw.user_name.has_value() == raw.ip.has_value()) ok = false;
        else rec.editor = classify_editor(raw, bots);
      } else {
        ok = false;
      }
      // <text> may be void (<text ... />) or carry attributes before '>'.
      if (auto text_open = sc.capture("<text", ">", "</revision>")) {
        if (text_open->empty() || text_open->back() != '/') {
          auto body = sc.capture("", "</text>", "</revision>");
          if (body) rec.wikitext = detail::xml_unescape(*body);
        }
      }
      if (!sc.skip_past("</revision>"))
        throw XmlParseError("unterminated <revision>", sc.offset());
      if (!ok) {
        ++stats.bad_revisions;
        continue;
      }
      art.revisions.push_back(std::move(rec));
    }
    if (!sc.skip_past("</page>"))
      throw XmlParseError("unterminated <page>", sc.offset());

    if (!main_ns) {
      ++stats.non_article_ns;
      continue;
    }
    detail::finalize_article(art, stats, opt);
    if (!art.revisions.empty() && is_redirect_text(art.revisions.back().wikitext)) {
      ++stats.redirects_skipped;
      continue;
    }
    if (art.revisions.empty()) continue;
    ++stats.pages_kept;
    out.push_back(std::move(art));
  }
  return out;
}

}  // namespace refhist
