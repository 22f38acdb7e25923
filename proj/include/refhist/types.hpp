#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace refhist {

/// Seconds since the Unix epoch, UTC.
using Instant = std::int64_t;

enum class EditorKind { Registered, Bot, NonRegistered };

inline const char* to_string(EditorKind k) {
  switch (k) {
    case EditorKind::Registered: return "registered";
    case EditorKind::Bot: return "bot";
    case EditorKind::NonRegistered: return "non_registered";
  }
  return "?";
}

struct EditorIdentity {
  EditorKind kind = EditorKind::Registered;
  std::optional<std::int64_t> user_id;
  std::optional<std::string> user_name;
  std::optional<std::string> ip;

  // Stable key for per-editor aggregation: account name for registered
  // accounts and bots, IP for anonymous sessions.
  const std::string& key() const {
    if (kind == EditorKind::NonRegistered) return *ip;
    return *user_name;
  }

  bool operator==(const EditorIdentity&) const = default;
};

struct RevisionRecord {
  std::int64_t article_id = 0;
  std::string article_title;
  std::int64_t revision_id = 0;
  Instant timestamp = 0;
  EditorIdentity editor;
  std::string wikitext;
};

struct Article {
  std::int64_t article_id = 0;
  std::string title;
  std::vector<RevisionRecord> revisions;  // ascending by (timestamp, revision_id)
};

/// Case-insensitive set of bot account names.
class BotList {
 public:
  void add(std::string_view name);
  bool contains(std::string_view name) const;
  std::size_t size() const { return names_.size(); }

 private:
  std::set<std::string> names_;
};

inline std::string ascii_lower(std::string_view s) {
  std::string out(s);
  for (char& c : out)
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
  return out;
}

inline void BotList::add(std::string_view name) {
  std::string n = ascii_lower(name);
  // trim surrounding whitespace
  auto b = n.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return;
  auto e = n.find_last_not_of(" \t\r\n");
  names_.insert(n.substr(b, e - b + 1));
}

inline bool BotList::contains(std::string_view name) const {
  return names_.count(ascii_lower(name)) > 0;
}

// ---- time ----------------------------------------------------------------

namespace detail {
// Howard Hinnant's days-from-civil; branch-free and valid far past 2038.
inline std::int64_t days_from_civil(std::int64_t y, unsigned m, unsigned d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

inline void civil_from_days(std::int64_t z, std::int64_t& y, unsigned& m, unsigned& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  y = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = doy - (153 * mp + 2) / 5 + 1;
  m = mp + (mp < 10 ? 3 : -9);
  y += m <= 2;
}
}  // namespace detail

/// Parses "YYYY-MM-DDTHH:MM:SSZ". Throws std::invalid_argument on bad input.
inline Instant parse_iso8601(std::string_view s) {
  auto bad = [&] { throw std::invalid_argument("bad ISO-8601 timestamp: " + std::string(s)); };
  if (s.size() != 20 || s[4] != '-' || s[7] != '-' || s[10] != 'T' || s[13] != ':' ||
      s[16] != ':' || s[19] != 'Z')
    bad();
  auto num = [&](std::size_t pos, std::size_t len) -> std::int64_t {
    std::int64_t v = 0;
    for (std::size_t i = pos; i < pos + len; ++i) {
      if (s[i] < '0' || s[i] > '9') bad();
      v = v * 10 + (s[i] - '0');
    }
    return v;
  };
  std::int64_t y = num(0, 4), mo = num(5, 2), d = num(8, 2);
  std::int64_t h = num(11, 2), mi = num(14, 2), sec = num(17, 2);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || sec > 60) bad();
  return detail::days_from_civil(y, static_cast<unsigned>(mo), static_cast<unsigned>(d)) * 86400 +
         h * 3600 + mi * 60 + sec;
}

inline std::string format_iso8601(Instant t) {
  std::int64_t days = t / 86400;
  std::int64_t rem = t % 86400;
  if (rem < 0) {
    rem += 86400;
    --days;
  }
  std::int64_t y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%04lld-%02u-%02uT%02lld:%02lld:%02lldZ",
                static_cast<long long>(y), m, d, static_cast<long long>(rem / 3600),
                static_cast<long long>((rem / 60) % 60), static_cast<long long>(rem % 60));
  return buf;
}

/// Year of a UTC instant (for yearly bucketing).
inline int year_of(Instant t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) --days;
  std::int64_t y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  return static_cast<int>(y);
}

/// Months since year 0 (for monthly bucketing).
inline int month_index_of(Instant t) {
  std::int64_t days = t / 86400;
  if (t % 86400 < 0) --days;
  std::int64_t y;
  unsigned m, d;
  detail::civil_from_days(days, y, m, d);
  return static_cast<int>(y) * 12 + static_cast<int>(m) - 1;
}

inline std::string format_month(int month_index) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", month_index / 12, month_index % 12 + 1);
  return buf;
}

}  // namespace refhist
