#pragma once

#include "refhist/attribution.hpp"
#include "refhist/tokenize.hpp"
#include "refhist/types.hpp"

namespace refhist {

/// FNV-1a 64-bit over the ordered id sequence, each id serialized as 8
/// little-endian bytes. Bit-exact across platforms.
inline std::uint64_t hash_ref(const std::vector<TokenId>& ids) {
  if (ids.empty()) throw std::invalid_argument("hash_ref: empty token list");
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (TokenId id : ids) {
    std::uint64_t v = static_cast<std::uint64_t>(id);
    for (int byte = 0; byte < 8; ++byte) {
      h ^= (v >> (8 * byte)) & 0xff;
      h *= 0x100000001b3ull;
    }
  }
  return h;
}

/// One inline citation in one revision: the token ids of the inner content
/// (tag and attributes excluded), its hash, and who/when.
struct RefOccurrence {
  std::vector<TokenId> t;  // ordered, non-empty
  std::uint64_t h = 0;
  EditorIdentity e;
  Instant z = 0;
  std::int64_t revision_id = 0;
  std::size_t doc_position = 0;              // 0-based index within the revision
  std::pair<std::size_t, std::size_t> raw_span;  // inner content bytes [begin,end)
};

struct ExtractStats {
  std::size_t unclosed_refs = 0;
  std::size_t empty_refs = 0;
};

namespace detail {

inline bool iequal_at(std::string_view text, std::size_t pos, std::string_view lower) {
  if (pos + lower.size() > text.size()) return false;
  for (std::size_t i = 0; i < lower.size(); ++i) {
    char c = text[pos + i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    if (c != lower[i]) return false;
  }
  return true;
}

}  // namespace detail

/// Paired `<ref ...>...</ref>` tags in document order; void tags
/// (`<ref ... />`) yield nothing; unclosed opening tags are abandoned.
inline std::vector<RefOccurrence> extract_refs(const RevisionRecord& revision,
                                               const TokenView& view,
                                               ExtractStats* stats = nullptr) {
  std::vector<RefOccurrence> out;
  const std::string& text = revision.wikitext;
  auto spans = tokenize_spans(text);

  std::size_t pos = 0;
  std::size_t tok_cursor = 0;
  while (pos + 4 <= text.size()) {
    if (!detail::iequal_at(text, pos, "<ref")) {
      ++pos;
      continue;
    }
    char after = pos + 4 < text.size() ? text[pos + 4] : '\0';
    bool tagish = after == '>' || after == '/' || after == ' ' || after == '\t' ||
                  after == '\n' || after == '\r';
    if (!tagish) {  // e.g. <references>
      ++pos;
      continue;
    }
    std::size_t open_end = text.find('>', pos + 4);
    if (open_end == std::string::npos) {
      if (stats) ++stats->unclosed_refs;
      break;
    }
    // void tag: <ref name=... />
    std::size_t back = open_end;
    while (back > pos && detail::is_space_byte(static_cast<unsigned char>(text[back - 1]))) --back;
    if (back > pos && text[back - 1] == '/') {
      pos = open_end + 1;
      continue;
    }
    std::size_t inner_begin = open_end + 1;
    // first closing tag wins; nested <ref> stays plain content
    std::size_t close = inner_begin;
    std::size_t inner_end = std::string::npos, resume = std::string::npos;
    while (close + 5 <= text.size()) {
      if (detail::iequal_at(text, close, "</ref")) {
        std::size_t gt = close + 5;
        while (gt < text.size() &&
               detail::is_space_byte(static_cast<unsigned char>(text[gt])))
          ++gt;
        if (gt < text.size() && text[gt] == '>') {
          inner_end = close;
          resume = gt + 1;
          break;
        }
      }
      ++close;
    }
    if (inner_end == std::string::npos) {
      if (stats) ++stats->unclosed_refs;
      pos = open_end + 1;
      continue;
    }

    // token ids fully inside the inner byte range
    while (tok_cursor < spans.size() && spans[tok_cursor].begin < inner_begin) ++tok_cursor;
    std::size_t ti = tok_cursor;
    RefOccurrence occ;
    while (ti < spans.size() && spans[ti].end <= inner_end) {
      occ.t.push_back(view.ids[ti]);
      ++ti;
    }
    if (occ.t.empty()) {
      if (stats) ++stats->empty_refs;
    } else {
      occ.h = hash_ref(occ.t);
      occ.e = revision.editor;
      occ.z = revision.timestamp;
      occ.revision_id = revision.revision_id;
      occ.doc_position = out.size();
      occ.raw_span = {inner_begin, inner_end};
      out.push_back(std::move(occ));
    }
    pos = resume;
  }
  return out;
}

}  // namespace refhist
