#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "refhist/analytics.hpp"
#include "refhist/did.hpp"
#include "refhist/eval.hpp"
#include "refhist/history_io.hpp"
#include "refhist/ingest.hpp"
#include "refhist/xml_dump.hpp"

namespace {

constexpr const char* kVersion = "0.1.0";

struct Options {
  std::string in;
  std::string format = "jsonl";
  std::string out;
  std::string config;
  std::uint64_t seed = 42;
  unsigned jobs = 0;
  std::string cutoff;
  bool force = false;
  bool progress = false;

  std::string thresholds = "0:1:0.05";
  std::vector<std::string> bots;
  bool skip_reverted = false;
  bool with_tokens = false;
  std::string k_range = "2:8";
  std::string gold;
  std::string hist;
  std::size_t bucket_size = 125;
  std::string period = "year";
};

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto strip = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    line = strip(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key=value");
    std::string key = strip(line.substr(0, eq));
    std::string val = strip(line.substr(eq + 1));
    if (val.size() >= 2 && val.front() == '"' && val.back() == '"')
      val = val.substr(1, val.size() - 2);
    kv[key] = val;
  }
  return kv;
}

bool to_bool(const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::runtime_error("not a boolean: " + v);
}

// Config file values take precedence over command-line flags.
void apply_config(Options& o) {
  if (o.config.empty()) return;
  for (const auto& [k, v] : read_config_file(o.config)) {
    if (k == "in") o.in = v;
    else if (k == "format") o.format = v;
    else if (k == "out") o.out = v;
    else if (k == "seed") o.seed = std::stoull(v);
    else if (k == "jobs") o.jobs = static_cast<unsigned>(std::stoul(v));
    else if (k == "cutoff") o.cutoff = v;
    else if (k == "force") o.force = to_bool(v);
    else if (k == "progress") o.progress = to_bool(v);
    else if (k == "thresholds") o.thresholds = v;
    else if (k == "bots") {
      o.bots.clear();
      std::stringstream ss(v);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) o.bots.push_back(item);
    } else if (k == "skip_reverted") o.skip_reverted = to_bool(v);
    else if (k == "with_tokens") o.with_tokens = to_bool(v);
    else if (k == "k_range") o.k_range = v;
    else if (k == "gold") o.gold = v;
    else if (k == "hist") o.hist = v;
    else if (k == "bucket_size") o.bucket_size = std::stoull(v);
    else if (k == "period") o.period = v;
    else throw std::runtime_error("unknown config key: " + k);
  }
}

std::string config_hash(const Options& o) {
  std::ostringstream ss;
  ss << "bots=";
  for (const auto& b : o.bots) ss << b << ';';
  ss << "\nbucket_size=" << o.bucket_size << "\ncutoff=" << o.cutoff
     << "\nformat=" << o.format << "\ngold=" << o.gold << "\nhist=" << o.hist
     << "\nin=" << o.in << "\nk_range=" << o.k_range << "\nperiod=" << o.period
     << "\nseed=" << o.seed << "\nskip_reverted=" << o.skip_reverted
     << "\nthresholds=" << o.thresholds << "\nwith_tokens=" << o.with_tokens << '\n';
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : ss.str()) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return refhist::detail::hash_hex(h);
}

std::string now_iso() {
  std::time_t t = std::time(nullptr);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void write_header(std::ostream& out, const Options& o) {
  out << "# refhist " << kVersion << '\n'
      << "# config " << config_hash(o) << '\n'
      << "# seed " << o.seed << '\n'
      << "# generated " << now_iso() << '\n';
}

/// Stages are restartable: an existing non-empty output is kept unless --force.
bool output_fresh(const Options& o) {
  if (o.out.empty()) throw std::runtime_error("--out is required");
  if (!o.force && std::filesystem::exists(o.out) &&
      std::filesystem::file_size(o.out) > 0) {
    std::cerr << "refhist: " << o.out << " exists, skipping (use --force to redo)\n";
    return false;
  }
  return true;
}

std::ofstream open_out(const std::string& path, const Options& o) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write: " + path);
  write_header(out, o);
  return out;
}

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read: " + path);
  return in;
}

std::vector<refhist::Article> load_corpus(const Options& o) {
  auto in = open_in(o.in);
  refhist::BotList bots = refhist::load_botlist(o.bots);
  refhist::IngestStats stats;
  refhist::IngestOptions iopt{o.skip_reverted};
  std::vector<refhist::Article> articles =
      o.format == "xml" ? refhist::parse_dump(in, bots, stats, iopt)
                        : refhist::parse_jsonl(in, bots, stats, iopt);
  std::cerr << "refhist: " << stats.pages_kept << " articles kept, "
            << stats.redirects_skipped << " redirects skipped, " << stats.non_article_ns
            << " non-article pages, " << stats.bad_revisions << " bad revisions";
  if (o.skip_reverted) std::cerr << ", " << stats.reverted_skipped << " reverts dropped";
  std::cerr << '\n';
  if (!o.cutoff.empty()) {
    refhist::Instant cut = refhist::parse_iso8601(o.cutoff);
    std::size_t late = 0;
    for (const auto& art : articles)
      for (const auto& rev : art.revisions)
        if (rev.timestamp > cut) ++late;
    if (late)
      std::cerr << "refhist: warning: " << late << " revisions after cutoff " << o.cutoff
                << '\n';
  }
  return articles;
}

std::vector<refhist::ArticleData> prepare_corpus(const Options& o) {
  std::vector<refhist::Article> articles = load_corpus(o);
  std::vector<refhist::ArticleData> data(articles.size());
  unsigned jobs = o.jobs ? o.jobs : std::max(1u, std::thread::hardware_concurrency());
  jobs = std::min<unsigned>(jobs, std::max<std::size_t>(1, articles.size()));
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> revs_done{0};
  std::mutex log_mu;
  auto worker = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= articles.size()) return;
      std::size_t n_revs = articles[i].revisions.size();
      data[i] = refhist::prepare_article(std::move(articles[i]));
      std::size_t done = revs_done.fetch_add(n_revs) + n_revs;
      if (o.progress && done / 10000 != (done - n_revs) / 10000) {
        std::lock_guard<std::mutex> lk(log_mu);
        std::cerr << "refhist: processed " << done / 10000 * 10000 << " revisions\n";
      }
    }
  };
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < jobs; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  return data;
}

std::vector<refhist::RefHistory> load_histories(const std::string& path) {
  auto in = open_in(path);
  return refhist::import_histories(in);
}

std::vector<double> parse_range_d(const std::string& spec) {
  double lo, hi, step;
  char c1, c2;
  std::istringstream ss(spec);
  if (!(ss >> lo >> c1 >> hi >> c2 >> step) || c1 != ':' || c2 != ':' || step <= 0)
    throw std::runtime_error("bad range (want lo:hi:step): " + spec);
  std::vector<double> out;
  for (double v = lo; v <= hi + 1e-12; v += step) out.push_back(std::min(v, hi));
  return out;
}

std::pair<std::size_t, std::size_t> parse_range_k(const std::string& spec) {
  std::size_t lo, hi;
  char c;
  std::istringstream ss(spec);
  if (!(ss >> lo >> c >> hi) || c != ':' || lo < 1 || hi < lo)
    throw std::runtime_error("bad k range (want lo:hi): " + spec);
  return {lo, hi};
}

// ---- stages ----------------------------------------------------------------

int cmd_ingest(const Options& o) {
  if (!output_fresh(o)) return 0;
  auto articles = load_corpus(o);
  auto out = open_out(o.out, o);
  refhist::export_jsonl(articles, out);
  return 0;
}

int cmd_histories(const Options& o) {
  if (!output_fresh(o)) return 0;
  auto data = prepare_corpus(o);
  auto out = open_out(o.out, o);
  for (const auto& ad : data) {
    auto hists = refhist::build_histories(ad);
    refhist::export_histories(hists, out, o.with_tokens);
  }
  return 0;
}

int cmd_dids(const Options& o) {
  if (!output_fresh(o)) return 0;
  auto hists = load_histories(o.in);
  auto out = open_out(o.out, o);
  out << "article_id,history_id,kind,value,first_snapshot,lifecycle,lag_days\n";
  for (std::size_t hi = 0; hi < hists.size(); ++hi) {
    auto anns = refhist::annotate_history(hists[hi]);
    auto lc = refhist::classify_lifecycle(hists[hi]);
    std::string tail = std::string(",") + refhist::to_string(lc.cls) + "," +
                       (lc.lag_days ? std::to_string(*lc.lag_days) : "");
    if (anns.empty()) {
      out << hists[hi].article_id << ',' << hi << ",,," << tail << '\n';
      continue;
    }
    for (const auto& a : anns)
      out << hists[hi].article_id << ',' << hi << ',' << refhist::to_string(a.kind) << ','
          << refhist::detail::csv_escape(a.value) << ',' << a.snapshot_index << tail << '\n';
  }

  refhist::Granularity g =
      o.period == "month" ? refhist::Granularity::Month : refhist::Granularity::Year;
  auto tl = refhist::did_timelines(hists, g);
  auto fmt_period = [&](int p) {
    return g == refhist::Granularity::Month ? refhist::format_month(p) : std::to_string(p);
  };
  auto tout = open_out(o.out + ".timeline.csv", o);
  tout << "period,did_added,existing,did_r,did_visible,full_pct,did_only_pct,"
          "omitted_still_lacking,omitted_eventually,omitted_pct\n";
  for (const auto& [p, cov] : tl.coverage) {
    std::size_t added = tl.did_added.count(p) ? tl.did_added.at(p) : 0;
    const auto& om = tl.omitted.at(p);
    tout << fmt_period(p) << ',' << added << ',' << cov.existing << ',' << cov.did_r << ','
         << cov.did_visible << ',' << cov.full_pct << ',' << cov.did_only_pct << ','
         << om.still_lacking << ',' << om.eventually << ',' << om.pct << '\n';
  }
  return 0;
}

int cmd_stats(const Options& o) {
  if (!output_fresh(o)) return 0;
  auto hists = load_histories(o.in);
  refhist::Granularity g =
      o.period == "month" ? refhist::Granularity::Month : refhist::Granularity::Year;
  auto fmt_period = [&](int p) {
    return g == refhist::Granularity::Month ? refhist::format_month(p) : std::to_string(p);
  };
  auto out = open_out(o.out, o);
  out << "filter,period,creations,modifications,deletions,reinsertions,"
         "creations_prop,modifications_prop,deletions_prop,reinsertions_prop\n";
  for (auto filter : {refhist::HistoryFilter::All, refhist::HistoryFilter::DidR}) {
    auto tl = refhist::action_timeline(hists, g, filter);
    const char* name = filter == refhist::HistoryFilter::All ? "all" : "did_r";
    for (const auto& [p, c] : tl.counts) {
      const auto& pr = tl.proportions.at(p);
      out << name << ',' << fmt_period(p);
      for (std::size_t i = 0; i < 4; ++i) out << ',' << c[i];
      for (std::size_t i = 0; i < 4; ++i) out << ',' << pr[i];
      out << '\n';
    }
  }

  // deletion survival at each period boundary present in the data
  std::set<int> periods;
  for (const auto& h : hists)
    for (const auto& s : h.snapshots)
      periods.insert(g == refhist::Granularity::Month ? refhist::month_index_of(s.z)
                                                      : refhist::year_of(s.z));
  std::vector<refhist::Instant> instants;
  std::vector<int> plist(periods.begin(), periods.end());
  for (int p : plist) {
    int year = g == refhist::Granularity::Month ? p / 12 : p;
    int month = g == refhist::Granularity::Month ? p % 12 + 1 : 1;
    instants.push_back(refhist::detail::days_from_civil(year + (month == 12 ? 1 : 0),
                                                month == 12 ? 1 : month + 1, 1) *
                       static_cast<refhist::Instant>(86400));
  }
  auto surv_all = refhist::deletion_survival(hists, instants, refhist::HistoryFilter::All);
  auto surv_did = refhist::deletion_survival(hists, instants, refhist::HistoryFilter::DidR);
  auto sout = open_out(o.out + ".survival.csv", o);
  sout << "period,deleted_fraction_all,deleted_fraction_did_r\n";
  for (std::size_t i = 0; i < plist.size(); ++i)
    sout << fmt_period(plist[i]) << ',' << surv_all[i] << ',' << surv_did[i] << '\n';
  return 0;
}

int cmd_editors(const Options& o) {
  if (!output_fresh(o)) return 0;
  auto hists = load_histories(o.in);
  auto profiles = refhist::build_profiles(hists);
  auto out = open_out(o.out, o);
  out << "editor,kind,creations,modifications,deletions,reinsertions,articles_touched\n";
  for (const auto& p : profiles) {
    out << refhist::detail::csv_escape(p.key) << ',' << refhist::to_string(p.kind);
    for (std::size_t i = 0; i < 4; ++i) out << ',' << p.counts[i];
    out << ',' << p.articles_touched << '\n';
  }
  auto rout = open_out(o.out + ".ranking.csv", o);
  rout << "rank,editor,score\n";
  auto ranked = refhist::ranking(profiles, 4);
  for (std::size_t i = 0; i < ranked.size(); ++i)
    rout << i + 1 << ',' << refhist::detail::csv_escape(ranked[i].key) << ','
         << ranked[i].score << '\n';
  return 0;
}

int cmd_cluster(const Options& o) {
  if (!output_fresh(o)) return 0;
  auto hists = load_histories(o.in);
  auto profiles = refhist::build_profiles(hists);
  std::vector<refhist::FeatureVector> features;
  std::vector<std::string> keys;
  for (const auto& p : profiles) {
    if (p.kind == refhist::EditorKind::NonRegistered) continue;
    features.push_back(refhist::to_features(p));
    keys.push_back(p.key);
  }
  auto [klo, khi] = parse_range_k(o.k_range);
  if (khi > features.size())
    throw std::runtime_error("k range exceeds editor count (" +
                             std::to_string(features.size()) + ")");
  std::vector<refhist::ClusterModel> models;
  for (std::size_t k = klo; k <= khi; ++k) {
    auto m = refhist::kmeans(features, k, o.seed + k);
    if (k >= 2) {
      auto [s, mean] = refhist::silhouette(features, m.assignment);
      m.silhouettes = std::move(s);
      m.mean_silhouette = mean;
    }
    models.push_back(std::move(m));
  }
  auto out = open_out(o.out, o);
  out << "editor";
  for (const auto& m : models) out << ",k" << m.k;
  out << '\n';
  for (std::size_t i = 0; i < keys.size(); ++i) {
    out << refhist::detail::csv_escape(keys[i]);
    for (const auto& m : models) out << ',' << m.assignment[i];
    out << '\n';
  }
  auto sout = open_out(o.out + ".summary.csv", o);
  sout << "k,mean_silhouette,inertia\n";
  for (const auto& m : models) sout << m.k << ',' << m.mean_silhouette << ',' << m.inertia << '\n';

  auto tree = refhist::clustree(models);
  nlohmann::json jedges = nlohmann::json::array();
  auto dout = open_out(o.out + ".clustree.dot", o);
  dout << "digraph clustree {\n";
  for (const auto& [node, size] : tree.node_sizes)
    dout << "  \"k" << node.first << "_c" << node.second << "\" [label=\"k=" << node.first
         << " c=" << node.second << " n=" << size << "\"];\n";
  for (const auto& e : tree.edges) {
    dout << "  \"k" << e.k_from << "_c" << e.cluster_from << "\" -> \"k" << e.k_from + 1
         << "_c" << e.cluster_to << "\" [label=\"" << e.count << "\"];\n";
    jedges.push_back({{"k_from", e.k_from},
                      {"cluster_from", e.cluster_from},
                      {"cluster_to", e.cluster_to},
                      {"count", e.count},
                      {"in_prop", e.in_prop}});
  }
  dout << "}\n";
  auto jout = open_out(o.out + ".clustree.json", o);
  jout << jedges.dump(2) << '\n';
  return 0;
}

int cmd_evaluate(const Options& o) {
  if (o.gold.empty() || o.hist.empty())
    throw std::runtime_error("evaluate needs --gold and --hist");
  if (!output_fresh(o)) return 0;
  auto gin = open_in(o.gold);
  auto gold = refhist::load_gold_csv(gin);
  auto hists = load_histories(o.hist);

  // (article_id, revision, raw text) -> token ids
  std::map<std::tuple<std::int64_t, std::int64_t, std::string>,
           const std::vector<refhist::TokenId>*>
      index;
  for (const auto& h : hists)
    for (const auto& s : h.snapshots)
      if (s.a != refhist::ActionKind::Deletion)
        index[{h.article_id, s.r, s.raw_text}] = &s.t;
  auto lookup = [&](std::int64_t art, std::int64_t rev,
                    const std::string& text) -> const std::vector<refhist::TokenId>& {
    auto it = index.find({art, rev, text});
    if (it == index.end())
      throw std::runtime_error("gold pair not found in histories (article " +
                               std::to_string(art) + ", revision " + std::to_string(rev) + ")");
    if (!it->second->empty() && it->second->front() == 0)
      throw std::runtime_error("histories lack token ids; re-run histories --with-tokens");
    return *it->second;
  };

  std::vector<refhist::ScoredPair> pairs;
  std::vector<double> jac_scores, cos_scores;
  std::vector<bool> labels;
  for (const auto& g : gold) {
    if (!g.usable()) continue;
    const auto& ta = lookup(g.article_id, g.rev_a, g.text_a);
    const auto& tb = lookup(g.article_id, g.rev_b, g.text_b);
    refhist::ScoredPair p;
    p.score = refhist::jaccard(ta, tb);
    p.gold_positive = g.label == refhist::GoldLabel::Equivalent;
    p.stratum = refhist::stratum_of(p.score);
    pairs.push_back(p);
    jac_scores.push_back(p.score);
    cos_scores.push_back(refhist::cosine_baseline(g.text_a, g.text_b));
    labels.push_back(p.gold_positive);
  }

  auto sweep = refhist::threshold_sweep(pairs, parse_range_d(o.thresholds));
  auto roc_jac = refhist::roc_curve(jac_scores, labels);
  auto roc_cos = refhist::roc_curve(cos_scores, labels);

  nlohmann::json report;
  report["pairs_used"] = pairs.size();
  report["pairs_excluded"] = gold.size() - pairs.size();
  report["balanced_threshold"] = sweep.balanced_threshold;
  report["auc_token_jaccard"] = roc_jac.auc;
  report["auc_cosine"] = roc_cos.auc;
  nlohmann::json per_threshold = nlohmann::json::array();
  for (std::size_t i = 0; i < sweep.thresholds.size(); ++i) {
    const auto& m = sweep.reports[i];
    per_threshold.push_back({{"threshold", sweep.thresholds[i]},
                             {"precision", m.precision},
                             {"recall", m.recall},
                             {"accuracy", m.accuracy},
                             {"f1", m.f1},
                             {"tp", m.tp},
                             {"fp", m.fp},
                             {"tn", m.tn},
                             {"fn", m.fn},
                             {"zero_support", m.zero_support}});
  }
  report["sweep"] = std::move(per_threshold);
  auto out = open_out(o.out, o);
  out << report.dump(2) << '\n';

  auto rout = open_out(o.out + ".roc.csv", o);
  rout << "method,threshold,fpr,tpr\n";
  for (const auto& p : roc_jac.points)
    rout << "token_jaccard," << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
  for (const auto& p : roc_cos.points)
    rout << "cosine," << p.threshold << ',' << p.fpr << ',' << p.tpr << '\n';
  return 0;
}

int cmd_sample(const Options& o) {
  if (!output_fresh(o)) return 0;
  auto data = prepare_corpus(o);
  auto report = refhist::stratified_sample(data, o.bucket_size, o.seed);
  auto out = open_out(o.out, o);
  out << "article_id,rev_a,rev_b,text_a,text_b,label,confidence\n";
  for (const auto& p : report.pairs)
    out << p.article_id << ',' << p.rev_a << ',' << p.rev_b << ','
        << refhist::detail::csv_escape(p.text_a) << ','
        << refhist::detail::csv_escape(p.text_b) << ",Unclear,0\n";
  std::cerr << "refhist: sample " << (report.complete ? "complete" : "partial") << "; fill:";
  for (std::size_t s = 0; s < refhist::kNumStrata; ++s)
    std::cerr << ' ' << report.fill[s] << '/' << o.bucket_size;
  std::cerr << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"refhist: reference edit histories from revisioned wiki corpora"};
  app.require_subcommand(1);
  Options o;

  auto add_shared = [&](CLI::App* cmd, bool needs_in) {
    auto* in = cmd->add_option("--in", o.in, "input file");
    if (needs_in) in->required();
    cmd->add_option("--format", o.format, "input format (xml|jsonl)")
        ->check(CLI::IsMember({"xml", "jsonl"}));
    cmd->add_option("--out", o.out, "output file")->required();
    cmd->add_option("--config", o.config, "key=value config file (overrides flags)");
    cmd->add_option("--seed", o.seed, "PRNG seed");
    cmd->add_option("--jobs", o.jobs, "worker threads (0 = all cores)");
    cmd->add_option("--cutoff", o.cutoff, "corpus cutoff timestamp (ISO-8601 Z)");
    cmd->add_flag("--force", o.force, "redo the stage even if the output exists");
    cmd->add_flag("--progress", o.progress, "report throughput every 10k revisions");
    return cmd;
  };

  auto* ingest = add_shared(app.add_subcommand("ingest", "normalize a corpus to JSONL"), true);
  ingest->add_option("--bots", o.bots, "bot name list file(s)");
  ingest->add_flag("--skip-reverted", o.skip_reverted, "drop identity-revert revisions");

  auto* histories =
      add_shared(app.add_subcommand("histories", "build per-reference histories"), true);
  histories->add_option("--bots", o.bots, "bot name list file(s)");
  histories->add_flag("--skip-reverted", o.skip_reverted, "drop identity-revert revisions");
  histories->add_flag("--with-tokens", o.with_tokens, "include token ids in the export");

  auto* dids = add_shared(app.add_subcommand("dids", "extract document identifiers"), true);
  dids->add_option("--period", o.period, "timeline granularity (year|month)")
      ->check(CLI::IsMember({"year", "month"}));

  auto* stats = add_shared(app.add_subcommand("stats", "action timelines and survival"), true);
  stats->add_option("--period", o.period, "granularity (year|month)")
      ->check(CLI::IsMember({"year", "month"}));

  add_shared(app.add_subcommand("editors", "per-editor profiles and rankings"), true);

  auto* cluster = add_shared(app.add_subcommand("cluster", "editor behaviour clusters"), true);
  cluster->add_option("--k-range", o.k_range, "cluster counts lo:hi");

  auto* evaluate =
      add_shared(app.add_subcommand("evaluate", "score the matcher against gold labels"), false);
  evaluate->add_option("--gold", o.gold, "gold pair CSV")->required();
  evaluate->add_option("--hist", o.hist, "history JSONL (exported --with-tokens)")->required();
  evaluate->add_option("--thresholds", o.thresholds, "threshold sweep lo:hi:step");

  auto* sample =
      add_shared(app.add_subcommand("sample", "stratified labelling sample"), true);
  sample->add_option("--bots", o.bots, "bot name list file(s)");
  sample->add_option("--bucket-size", o.bucket_size, "pairs per similarity stratum");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? 1 : 0;
  }

  try {
    apply_config(o);
    if (app.got_subcommand("ingest")) return cmd_ingest(o);
    if (app.got_subcommand("histories")) return cmd_histories(o);
    if (app.got_subcommand("dids")) return cmd_dids(o);
    if (app.got_subcommand("stats")) return cmd_stats(o);
    if (app.got_subcommand("editors")) return cmd_editors(o);
    if (app.got_subcommand("cluster")) return cmd_cluster(o);
    if (app.got_subcommand("evaluate")) return cmd_evaluate(o);
    if (app.got_subcommand("sample")) return cmd_sample(o);
  } catch (const std::exception& e) {
    std::cerr << "refhist: error: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
