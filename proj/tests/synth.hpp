#pragma once

// Seeded random corpus generator used by the unit and acceptance suites.

#include <random>
#include <sstream>

#include "refhist/types.hpp"

namespace synth {

struct Config {
  std::size_t min_revs = 2;
  std::size_t max_revs = 4;
  std::size_t max_refs = 5;
  std::size_t ops_per_rev = 2;
  refhist::Instant base_time = 1136073600;  // 2006-01-01
};

struct RefSlot {
  std::string context;  // stable prose before the tag, fixed at creation
  std::string text;     // inner wikitext
  bool live = false;
};

inline std::string word(std::mt19937_64& rng) {
  static const char* stems[] = {"alpha", "beta", "gamma", "delta", "omega",
                                "press", "journal", "review", "origin", "species"};
  std::ostringstream ss;
  ss << stems[rng() % 10] << rng() % 1000;
  return ss.str();
}

inline std::string ref_content(std::mt19937_64& rng) {
  std::size_t n = 3 + rng() % 4;
  std::ostringstream ss;
  for (std::size_t i = 0; i < n; ++i) ss << (i ? " " : "") << word(rng);
  return ss.str();
}

inline std::string render(const std::vector<RefSlot>& slots, std::size_t rev) {
  std::ostringstream ss;
  ss << "Opening prose about the subject revision stream.\n";
  for (const auto& s : slots) {
    if (!s.live) continue;
    ss << "\n" << s.context << " <ref>" << s.text << "</ref>\n";
  }
  ss << "\nClosing remark number " << rev << ".\n";
  return ss.str();
}

inline refhist::Article random_article(std::mt19937_64& rng, std::int64_t id,
                                       const Config& cfg = {}) {
  refhist::Article art;
  art.article_id = id;
  art.title = "Article " + std::to_string(id);
  std::size_t n_revs =
      cfg.min_revs + (cfg.max_revs > cfg.min_revs ? rng() % (cfg.max_revs - cfg.min_revs + 1) : 0);

  std::vector<RefSlot> slots;
  std::vector<std::string> deleted;  // verbatim texts available for reinsertion

  auto add_ref = [&] {
    if (slots.size() >= cfg.max_refs) return;
    RefSlot s;
    s.context = "Cited by " + word(rng) + " in " + word(rng) + " study";
    s.text = ref_content(rng);
    s.live = true;
    slots.push_back(std::move(s));
  };
  add_ref();
  if (rng() % 2) add_ref();

  for (std::size_t rev = 0; rev < n_revs; ++rev) {
    if (rev > 0) {
      std::size_t ops = 1 + rng() % cfg.ops_per_rev;
      for (std::size_t op = 0; op < ops; ++op) {
        switch (rng() % 4) {
          case 0: add_ref(); break;
          case 1: {  // delete a live ref
            std::vector<std::size_t> live;
            for (std::size_t i = 0; i < slots.size(); ++i)
              if (slots[i].live) live.push_back(i);
            if (live.size() > 1) {
              auto& s = slots[live[rng() % live.size()]];
              deleted.push_back(s.text);
              s.live = false;
            }
            break;
          }
          case 2: {  // modify a live ref in place
            std::vector<std::size_t> live;
            for (std::size_t i = 0; i < slots.size(); ++i)
              if (slots[i].live) live.push_back(i);
            if (!live.empty()) {
              auto& s = slots[live[rng() % live.size()]];
              if (rng() % 2) {
                s.text += " " + word(rng);
              } else {
                auto sp = s.text.find(' ');
                if (sp != std::string::npos) s.text = word(rng) + s.text.substr(sp);
              }
            }
            break;
          }
          case 3: {  // reinsert a previously deleted text verbatim
            if (!deleted.empty() && slots.size() < cfg.max_refs) {
              std::size_t i = rng() % deleted.size();
              RefSlot s;
              s.context = "Restored citation from " + word(rng);
              s.text = deleted[i];
              s.live = true;
              slots.push_back(std::move(s));
              deleted.erase(deleted.begin() + static_cast<std::ptrdiff_t>(i));
            }
            break;
          }
        }
      }
    }
    refhist::RevisionRecord rec;
    rec.article_id = id;
    rec.article_title = art.title;
    rec.revision_id = id * 1000 + static_cast<std::int64_t>(rev) + 1;
    rec.timestamp = cfg.base_time + static_cast<refhist::Instant>(rev) * 86400;
    if (rng() % 4 == 0) {
      rec.editor.kind = refhist::EditorKind::NonRegistered;
      rec.editor.ip = "10.0." + std::to_string(rng() % 8) + "." + std::to_string(rng() % 256);
    } else {
      rec.editor.kind = rng() % 5 == 0 ? refhist::EditorKind::Bot : refhist::EditorKind::Registered;
      rec.editor.user_name = (rec.editor.kind == refhist::EditorKind::Bot ? "RefBot" : "Editor") +
                             std::to_string(rng() % 6);
    }
    rec.wikitext = render(slots, rev);
    art.revisions.push_back(std::move(rec));
  }
  return art;
}

}  // namespace synth
