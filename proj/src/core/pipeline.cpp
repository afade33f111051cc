#include "core/pipeline.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <unordered_map>

#include "core/artifacts.hpp"
#include "core/communities.hpp"
#include "core/corpus.hpp"
#include "core/error.hpp"
#include "core/evalstats.hpp"
#include "core/morphsim.hpp"
#include "core/mutation.hpp"
#include "core/parallel.hpp"
#include "core/simgraph.hpp"
#include "core/subfam.hpp"
#include "core/textprep.hpp"

namespace quotefam::pipeline {

namespace fs = std::filesystem;
using artifacts::json;

namespace {

constexpr const char* kVersion = "0.1.0";

// ---- option parsing ------------------------------------------------------

std::uint64_t parse_uint(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

double parse_double(std::string_view key, std::string_view v) {
  const std::string s(v);
  char* end = nullptr;
  const double out = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(out)) {
    throw ConfigError(std::string(key), "expected a number, got '" + s + "'");
  }
  return out;
}

bool parse_bool(std::string_view key, std::string_view v) {
  if (v == "1" || v == "true" || v == "on" || v == "yes") return true;
  if (v == "0" || v == "false" || v == "off" || v == "no") return false;
  throw ConfigError(std::string(key), "expected on/off, got '" + std::string(v) + "'");
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

using Quantile = std::uint64_t Quantiles::*;
const std::vector<std::pair<std::string, Quantile>>& quantile_keys() {
  static const std::vector<std::pair<std::string, Quantile>> keys = {
      {"term_frequency", &Quantiles::term_frequency}, {"quote_length", &Quantiles::quote_length},
      {"quote_mentions", &Quantiles::quote_mentions}, {"entropy", &Quantiles::entropy},
      {"rates", &Quantiles::rates}};
  return keys;
}

void set_quantiles(Quantiles& q, std::string_view v) {
  if (v.find('=') == std::string_view::npos) {
    const auto k = parse_uint("quantiles", v);
    for (const auto& [name, field] : quantile_keys()) q.*field = k;
    return;
  }
  std::size_t pos = 0;
  while (pos <= v.size()) {
    auto comma = v.find(',', pos);
    if (comma == std::string_view::npos) comma = v.size();
    const auto item = v.substr(pos, comma - pos);
    pos = comma + 1;
    if (item.empty()) continue;
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ConfigError("quantiles", "expected key=N in '" + std::string(item) + "'");
    const auto name = item.substr(0, eq);
    const auto it = std::find_if(quantile_keys().begin(), quantile_keys().end(),
                                 [&](const auto& kv) { return kv.first == name; });
    if (it == quantile_keys().end()) throw ConfigError("quantiles", "unknown curve '" + std::string(name) + "'");
    q.*(it->second) = parse_uint("quantiles", item.substr(eq + 1));
  }
}

std::string get_quantiles(const Quantiles& q) {
  std::string s;
  for (const auto& [name, field] : quantile_keys()) {
    if (!s.empty()) s += ',';
    s += name + "=" + std::to_string(q.*field);
  }
  return s;
}

struct OptionDef {
  std::function<void(PipelineConfig&, std::string_view)> set;
  std::function<std::string(const PipelineConfig&)> get;
};

OptionDef string_option(std::string PipelineConfig::*field) {
  return {[field](PipelineConfig& c, std::string_view v) { c.*field = std::string(v); },
          [field](const PipelineConfig& c) { return c.*field; }};
}

OptionDef uint_option(std::string key, std::uint64_t PipelineConfig::*field) {
  return {[key, field](PipelineConfig& c, std::string_view v) { c.*field = parse_uint(key, v); },
          [field](const PipelineConfig& c) { return std::to_string(c.*field); }};
}

OptionDef bool_option(std::string key, bool PipelineConfig::*field) {
  return {[key, field](PipelineConfig& c, std::string_view v) { c.*field = parse_bool(key, v); },
          [field](const PipelineConfig& c) { return std::string(c.*field ? "on" : "off"); }};
}

const std::map<std::string, OptionDef, std::less<>>& option_table() {
  static const std::map<std::string, OptionDef, std::less<>> table = [] {
    std::map<std::string, OptionDef, std::less<>> t;
    t["input"] = string_option(&PipelineConfig::input);
    t["format"] = string_option(&PipelineConfig::format);
    t["threshold"] = {[](PipelineConfig& c, std::string_view v) { c.threshold = parse_double("threshold", v); },
                      [](const PipelineConfig& c) { return format_double(c.threshold); }};
    t["min_shared_words"] = uint_option("min_shared_words", &PipelineConfig::min_shared_words);
    t["min_mentions"] = uint_option("min_mentions", &PipelineConfig::min_mentions);
    t["min_words"] = uint_option("min_words", &PipelineConfig::min_words);
    t["max_edit"] = uint_option("max_edit", &PipelineConfig::max_edit);
    t["quantiles"] = {[](PipelineConfig& c, std::string_view v) { set_quantiles(c.quantiles, v); },
                      [](const PipelineConfig& c) { return get_quantiles(c.quantiles); }};
    t["seed"] = uint_option("seed", &PipelineConfig::seed);
    t["threads"] = uint_option("threads", &PipelineConfig::threads);
    t["out_dir"] = string_option(&PipelineConfig::out_dir);
    t["english_check"] = bool_option("english_check", &PipelineConfig::english_check);
    t["exact_ci"] = bool_option("exact_ci", &PipelineConfig::exact_ci);
    t["pos"] = string_option(&PipelineConfig::pos);
    t["lemmas"] = string_option(&PipelineConfig::lemmas);
    t["stopwords"] = string_option(&PipelineConfig::stopwords);
    t["wordlist"] = string_option(&PipelineConfig::wordlist);
    t["trials"] = uint_option("trials", &PipelineConfig::trials);
    t["rate_model"] = string_option(&PipelineConfig::rate_model);
    t["targets"] = string_option(&PipelineConfig::targets);
    t["sim_families"] = uint_option("sim_families", &PipelineConfig::sim_families);
    t["judgments"] = string_option(&PipelineConfig::judgments);
    t["judgments2"] = string_option(&PipelineConfig::judgments2);
    t["rival"] = string_option(&PipelineConfig::rival);
    t["iterations"] = uint_option("iterations", &PipelineConfig::iterations);
    return t;
  }();
  return table;
}

// Accepts dashes for underscores so flag spellings map directly.
std::string normalize_key(std::string_view key) {
  std::string k(key);
  std::replace(k.begin(), k.end(), '-', '_');
  return k;
}

}  // namespace

const std::vector<std::string>& option_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& [k, def] : option_table()) v.push_back(k);
    return v;
  }();
  return names;
}

void set_option(PipelineConfig& config, std::string_view key, std::string_view value) {
  const auto k = normalize_key(key);
  const auto it = option_table().find(k);
  if (it == option_table().end()) throw ConfigError(k, "unknown option");
  it->second.set(config, value);
}

std::string get_option(const PipelineConfig& config, std::string_view key) {
  const auto k = normalize_key(key);
  const auto it = option_table().find(k);
  if (it == option_table().end()) throw ConfigError(k, "unknown option");
  return it->second.get(config);
}

void validate(const PipelineConfig& c) {
  if (c.format != "memetracker" && c.format != "tsv") throw ConfigError("format", "must be memetracker or tsv");
  if (!(c.threshold > 0.0 && c.threshold < 1.0)) throw ConfigError("threshold", "must lie strictly between 0 and 1");
  if (c.min_shared_words < 1) throw ConfigError("min_shared_words", "must be at least 1");
  if (c.min_mentions < 1) throw ConfigError("min_mentions", "must be at least 1");
  if (c.max_edit < 1 || c.max_edit > 16) throw ConfigError("max_edit", "must be between 1 and 16");
  for (const auto& [name, field] : quantile_keys()) {
    if (c.quantiles.*field < 1) throw ConfigError("quantiles", name + " must be at least 1");
  }
  if (c.out_dir.empty()) throw ConfigError("out_dir", "must not be empty");
  if (c.trials < 1 || c.trials > 1000) throw ConfigError("trials", "must be between 1 and 1000");
  if (c.rate_model != "published" && c.rate_model != "fitted" && c.rate_model != "zero") {
    throw ConfigError("rate_model", "must be published, fitted or zero");
  }
  if (c.targets != "synthetic" && c.targets != "data") throw ConfigError("targets", "must be synthetic or data");
  if (c.sim_families < 1) throw ConfigError("sim_families", "must be at least 1");
  if (c.iterations < 100) throw ConfigError("iterations", "must be at least 100");
}

std::string canonical_config(const PipelineConfig& c) {
  json j;
  for (const auto& [k, def] : option_table()) {
    if (k == "threads" || k == "out_dir") continue;
    j[k] = def.get(c);
  }
  return j.dump();
}

std::string config_digest(const PipelineConfig& c) { return artifacts::sha256_hex(canonical_config(c)); }

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> s = {"families", "subfamilies", "stats",    "rates",
                                             "fit",      "simulate",    "evaluate", "report"};
  return s;
}

namespace {

// ---- stage plumbing ------------------------------------------------------

class Stage {
 public:
  Stage(std::string name, const PipelineConfig& config)
      : name_(std::move(name)), config_(config), digest_(config_digest(config)), dir_(config.out_dir) {}

  const PipelineConfig& config() const { return config_; }
  const fs::path& dir() const { return dir_; }

  // Body of a prior stage's artifact; MissingPrerequisite when absent.
  std::string require(const std::string& file, const std::string& producer) {
    const fs::path p = dir_ / file;
    if (!fs::exists(p)) throw MissingPrerequisite(producer, file);
    inputs_.emplace_back(file, artifacts::sha256_file(p));
    return artifacts::read_body(p);
  }

  void note_input_file(const fs::path& p) { inputs_.emplace_back(p.string(), artifacts::sha256_file(p)); }

  void write(const std::string& file, const std::string& body) {
    outputs_.emplace_back(file, artifacts::write_artifact(dir_ / file, name_, digest_, body));
  }

  RunResult finish(std::string summary, int status = 0) {
    json inputs = json::object(), outputs = json::object();
    std::string input_concat;
    for (const auto& [f, d] : inputs_) {
      inputs[f] = d;
      input_concat += f + "=" + d + "\n";
    }
    for (const auto& [f, d] : outputs_) outputs[f] = d;
    json manifest = {{"subcommand", name_},
                     {"config", json::parse(canonical_config(config_))},
                     {"config_digest", digest_},
                     {"input_digest", artifacts::sha256_hex(input_concat)},
                     {"inputs", inputs},
                     {"artifacts", outputs},
                     {"versions", {{"quotefam", kVersion}, {"artifact_format", 1}}}};
    const std::string mf = "manifest_" + name_ + ".json";
    artifacts::write_artifact(dir_ / mf, name_, digest_, manifest.dump(2) + "\n");
    RunResult r;
    r.status = status;
    for (const auto& [f, d] : outputs_) r.artifacts.push_back((dir_ / f).string());
    r.artifacts.push_back((dir_ / mf).string());
    r.summary = std::move(summary);
    return r;
  }

 private:
  std::string name_;
  const PipelineConfig& config_;
  std::string digest_;
  fs::path dir_;
  std::vector<std::pair<std::string, std::string>> inputs_;
  std::vector<std::pair<std::string, std::string>> outputs_;
};

std::ifstream open_input(const std::string& path, const std::string& key) {
  if (path.empty()) throw ConfigError(key, "a file path is required");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + key + " file " + path);
  return in;
}

json curve_json(const metrics::BinnedCurve& c) {
  json bins = json::array();
  for (const auto& b : c.bins) {
    bins.push_back({{"x_mean", b.x_mean}, {"y", b.y}, {"ci_low", b.ci_low}, {"ci_high", b.ci_high}, {"n", b.n}});
  }
  return bins;
}

std::string curve_csv(const metrics::BinnedCurve& c) {
  std::ostringstream ss;
  metrics::write_curve_csv(ss, c);
  return ss.str();
}

metrics::BinnedCurve safe_bins(std::vector<metrics::Point> points, std::size_t k) {
  if (points.empty()) return {k, {}};
  const std::size_t bins = std::min(k, points.size());
  return metrics::bin_quantiles(std::move(points), bins);
}

json histogram_json(const std::map<std::uint64_t, std::uint64_t>& h) {
  json a = json::array();
  for (const auto& [size, count] : h) a.push_back({size, count});
  return a;
}

struct LoadedFamily {
  communities::Family family;
  std::vector<std::uint32_t> labels;
  std::vector<subfam::SubFamily> subs;
};

std::vector<LoadedFamily> load_subfamilies(Stage& stage) {
  const auto records = artifacts::parse_family_records(stage.require("subfamilies.jsonl", "subfamilies"));
  std::vector<LoadedFamily> out;
  out.reserve(records.size());
  for (const auto& rec : records) {
    if (!rec.subfamily) throw FormatError("subfamilies.jsonl record without subfamily_id");
    LoadedFamily lf;
    lf.family = rec.family;
    lf.labels = *rec.subfamily;
    std::uint32_t n_subs = 0;
    for (const auto l : lf.labels) n_subs = std::max(n_subs, l + 1);
    lf.subs.resize(n_subs);
    for (std::uint32_t s = 0; s < n_subs; ++s) lf.subs[s].id = s;
    for (std::size_t i = 0; i < lf.labels.size(); ++i) {
      auto& sf = lf.subs[lf.labels[i]];
      sf.members.push_back(i);
      sf.total_mentions += lf.family.quotes[i].mentions;
    }
    for (const auto& sf : lf.subs) {
      if (sf.members.empty()) throw FormatError("sub-family ids are not dense");
    }
    out.push_back(std::move(lf));
  }
  return out;
}

// ---- stages --------------------------------------------------------------

RunResult run_families(const PipelineConfig& c) {
  Stage stage("families", c);
  auto in = open_input(c.input, "input");
  stage.note_input_file(c.input);
  const auto parsed =
      corpus::parse_mention_stream(in, c.format == "tsv" ? corpus::StreamFormat::tsv : corpus::StreamFormat::memetracker);
  const auto quotes = corpus::aggregate(parsed.mentions, c.min_mentions);

  textprep::Lemmatizer lemmatizer;
  if (!c.lemmas.empty()) {
    auto f = open_input(c.lemmas, "lemmas");
    lemmatizer = textprep::Lemmatizer::from_stream(f);
  }
  textprep::WordSet stop = textprep::default_stopwords();
  if (!c.stopwords.empty()) {
    auto f = open_input(c.stopwords, "stopwords");
    stop = textprep::load_word_list(f);
  }
  std::optional<textprep::WordSet> wordlist;
  if (!c.wordlist.empty()) {
    auto f = open_input(c.wordlist, "wordlist");
    wordlist = textprep::load_word_list(f);
  }

  std::vector<textprep::TokenSeq> docs(quotes.size());
  parallel_chunks(quotes.size(), c.threads, [&](std::size_t, std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      docs[i] = textprep::normalize(textprep::tokenize(quotes.quotes()[i].text), lemmatizer, stop);
    }
  });
  const auto index = textprep::TfIdfIndex::build(docs);
  simgraph::BuildOptions bo;
  bo.threshold = c.threshold;
  bo.min_shared = c.min_shared_words;
  bo.threads = c.threads;
  const auto graph = simgraph::build_graph(quotes, index, bo);
  communities::DetectOptions det;
  det.trials = c.trials;
  const auto partition = communities::detect_families(graph, c.seed, det);
  const auto families = communities::families_from_partition(partition, quotes);
  communities::FilterOptions fo;
  fo.min_words = c.min_words;
  fo.english_check = c.english_check;
  fo.wordlist = wordlist ? &*wordlist : nullptr;
  const auto kept = communities::filter_families(families, fo);

  std::ostringstream edges;
  simgraph::write_edge_list(edges, graph);
  stage.write("graph.tsv", edges.str());
  std::string body;
  std::size_t n_quotes = 0;
  for (const auto& f : kept) {
    body += artifacts::family_record(f).dump() + "\n";
    n_quotes += f.quotes.size();
  }
  stage.write("families.jsonl", body);
  return stage.finish(std::to_string(quotes.size()) + " quotes, " + std::to_string(graph.edges().size()) +
                      " edges, " + std::to_string(kept.size()) + " families (" + std::to_string(n_quotes) +
                      " quotes) after filtering");
}

RunResult run_subfamilies(const PipelineConfig& c) {
  Stage stage("subfamilies", c);
  const auto records = artifacts::parse_family_records(stage.require("families.jsonl", "families"));
  std::vector<std::string> lines(records.size());
  std::vector<std::size_t> counts(records.size());
  parallel_strided(records.size(), c.threads, [&](std::size_t, std::size_t i) {
    const auto& fam = records[i].family;
    const auto g = subfam::build_edit_graph(fam, c.max_edit);
    const auto subs = subfam::subfamilies(g, fam);
    const auto labels = subfam::subfamily_labels(subs, fam.quotes.size());
    auto rec = artifacts::family_record(fam, &labels);
    rec["n_subfamilies"] = subs.size();
    lines[i] = rec.dump() + "\n";
    counts[i] = subs.size();
  });
  std::string body;
  std::size_t total = 0;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    body += lines[i];
    total += counts[i];
  }
  stage.write("subfamilies.jsonl", body);
  return stage.finish(std::to_string(records.size()) + " families, " + std::to_string(total) + " sub-families");
}

RunResult run_stats(const PipelineConfig& c) {
  Stage stage("stats", c);
  const auto fams = load_subfamilies(stage);
  std::unordered_map<std::string, std::string> pos;
  if (!c.pos.empty()) {
    auto f = open_input(c.pos, "pos");
    stage.note_input_file(c.pos);
    std::string line;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      const auto tab = line.find('\t');
      if (tab == std::string::npos) continue;
      pos[line.substr(0, tab)] = line.substr(tab + 1);
    }
  }

  std::vector<std::vector<metrics::TermRecord>> per_family(fams.size());
  std::vector<std::vector<metrics::Point>> by_length(fams.size()), by_mentions(fams.size());
  parallel_strided(fams.size(), c.threads, [&](std::size_t, std::size_t i) {
    const auto& fam = fams[i].family;
    const auto g = subfam::build_edit_graph(fam, c.max_edit);
    per_family[i] = metrics::term_records(fam, g);
    for (std::size_t q = 0; q < fam.quotes.size(); ++q) {
      const double s = metrics::quote_stability(fam, subfam::neighborhood_at(g, q));
      const double w = static_cast<double>(fam.quotes[q].mentions);
      by_length[i].push_back({static_cast<double>(textprep::split_words(fam.quotes[q].text).size()), s, w});
      by_mentions[i].push_back({w, s, w});
    }
  });
  std::vector<metrics::TermRecord> records;
  std::vector<metrics::Point> length_points, mention_points;
  for (std::size_t i = 0; i < fams.size(); ++i) {
    records.insert(records.end(), per_family[i].begin(), per_family[i].end());
    length_points.insert(length_points.end(), by_length[i].begin(), by_length[i].end());
    mention_points.insert(mention_points.end(), by_mentions[i].begin(), by_mentions[i].end());
  }

  // Corpus frequency of a term: raw occurrences over distinct quotes.
  std::map<std::string, std::uint64_t> freq;
  std::map<std::uint64_t, std::uint64_t> h_versions, h_mentions, h_subs, h_sub_versions, h_sub_mentions, h_quote;
  std::vector<metrics::Point> fam_entropy, sub_entropy;
  std::uint64_t total_mentions = 0, n_quotes = 0, n_subs = 0;
  for (const auto& lf : fams) {
    const auto& fam = lf.family;
    for (const auto& q : fam.quotes) {
      for (const auto& t : textprep::split_words(q.text)) ++freq[t];
      ++h_quote[q.mentions];
    }
    const auto m = fam.total_mentions();
    total_mentions += m;
    n_quotes += fam.quotes.size();
    n_subs += lf.subs.size();
    ++h_versions[fam.quotes.size()];
    ++h_mentions[m];
    ++h_subs[lf.subs.size()];
    fam_entropy.push_back({static_cast<double>(m), metrics::entropy(fam), 1.0});
    for (const auto& sf : lf.subs) {
      ++h_sub_versions[sf.members.size()];
      ++h_sub_mentions[sf.total_mentions];
      sub_entropy.push_back({static_cast<double>(sf.total_mentions), metrics::entropy(fam, sf), 1.0});
    }
  }

  std::map<std::string, std::pair<double, double>> term_sums;
  for (const auto& r : records) {
    auto& s = term_sums[r.term];
    s.first += r.weight * r.value;
    s.second += r.weight;
  }
  std::vector<metrics::Point> term_points;
  std::string term_table = "term,frequency,stability,weight\n";
  char buf[96];
  for (const auto& [term, s] : term_sums) {
    const double st = s.first / s.second;
    term_points.push_back({static_cast<double>(freq[term]), st, s.second});
    std::snprintf(buf, sizeof buf, ",%llu,%.6f,%.0f\n", static_cast<unsigned long long>(freq[term]), st, s.second);
    term_table += term + buf;
  }

  const auto& q = c.quantiles;
  const auto term_curve = safe_bins(term_points, q.term_frequency);
  const auto length_curve = safe_bins(length_points, q.quote_length);
  const auto mention_curve = safe_bins(mention_points, q.quote_mentions);
  const auto fam_curve = safe_bins(fam_entropy, q.entropy);
  const auto sub_curve = safe_bins(sub_entropy, q.entropy);

  stage.write("term_stability.csv", term_table);
  stage.write("term_stability_vs_frequency.csv", curve_csv(term_curve));
  stage.write("quote_stability_vs_length.csv", curve_csv(length_curve));
  stage.write("quote_stability_vs_mentions.csv", curve_csv(mention_curve));
  stage.write("entropy_family_vs_mentions.csv", curve_csv(fam_curve));
  stage.write("entropy_subfamily_vs_mentions.csv", curve_csv(sub_curve));
  json curves = {"term_stability_vs_frequency.csv", "quote_stability_vs_length.csv",
                 "quote_stability_vs_mentions.csv", "entropy_family_vs_mentions.csv",
                 "entropy_subfamily_vs_mentions.csv"};
  if (!pos.empty()) {
    std::vector<metrics::TermRecord> tagged;
    for (const auto& r : records) {
      if (pos.count(r.term)) tagged.push_back(r);
    }
    const auto by_tag = metrics::feature_stability(std::span<const metrics::TermRecord>(tagged),
                                                   [&](const metrics::TermRecord& r) { return pos.at(r.term); });
    std::map<std::string, std::size_t> n_tag;
    for (const auto& r : tagged) ++n_tag[pos.at(r.term)];
    std::string body = "tag,stability,records\n";
    for (const auto& [tag, v] : by_tag) {
      std::snprintf(buf, sizeof buf, ",%.6f,%zu\n", v, n_tag[tag]);
      body += tag + buf;
    }
    stage.write("pos_stability.csv", body);
    curves.push_back("pos_stability.csv");
  }

  const json dist = {{"n_families", fams.size()},
                     {"n_quotes", n_quotes},
                     {"n_subfamilies", n_subs},
                     {"total_mentions", total_mentions},
                     {"n_terms", term_sums.size()},
                     {"family_versions", histogram_json(h_versions)},
                     {"family_mentions", histogram_json(h_mentions)},
                     {"subfamilies_per_family", histogram_json(h_subs)},
                     {"subfamily_versions", histogram_json(h_sub_versions)},
                     {"subfamily_mentions", histogram_json(h_sub_mentions)},
                     {"quote_mentions", histogram_json(h_quote)},
                     {"curves", curves}};
  stage.write("distributions.json", dist.dump(2) + "\n");
  return stage.finish(std::to_string(fams.size()) + " families, " + std::to_string(term_sums.size()) + " terms");
}

const std::vector<std::tuple<std::string, mutation::Covariate, mutation::EventKind>>& rate_curves() {
  using mutation::Covariate;
  using mutation::EventKind;
  static const std::vector<std::tuple<std::string, Covariate, EventKind>> v = {
      {"micro_rate_vs_n.csv", Covariate::n, EventKind::micro},
      {"macro_rate_vs_n.csv", Covariate::n_family, EventKind::macro},
      {"micro_rate_vs_l.csv", Covariate::l, EventKind::micro},
      {"macro_rate_vs_l.csv", Covariate::l_family, EventKind::macro}};
  return v;
}

RunResult run_rates(const PipelineConfig& c) {
  Stage stage("rates", c);
  const auto fams = load_subfamilies(stage);
  std::vector<std::vector<mutation::MutationEvent>> per_family(fams.size());
  parallel_strided(fams.size(), c.threads, [&](std::size_t, std::size_t i) {
    const auto order = mutation::mention_order(fams[i].family);
    per_family[i] = mutation::replay_family(fams[i].family, fams[i].subs, order);
  });
  std::vector<mutation::MutationEvent> events;
  for (const auto& v : per_family) events.insert(events.end(), v.begin(), v.end());

  std::ostringstream ev;
  mutation::write_events_csv(ev, events);
  stage.write("events.csv", ev.str());

  std::string st = "family_id,subfamily_id,versions,mentions,micro_rate,macro_rate\n";
  char buf[160];
  for (const auto& lf : fams) {
    const auto rates = mutation::static_rates(lf.family, lf.subs);
    for (std::size_t s = 0; s < lf.subs.size(); ++s) {
      std::string micro = rates.micro[s] ? format_double(*rates.micro[s]) : "";
      std::string macro = rates.macro ? format_double(*rates.macro) : "";
      std::snprintf(buf, sizeof buf, "%u,%zu,%zu,%llu,", lf.family.id, s, lf.subs[s].members.size(),
                    static_cast<unsigned long long>(lf.subs[s].total_mentions));
      st += buf + micro + "," + macro + "\n";
    }
  }
  stage.write("static_rates.csv", st);

  mutation::BinOptions bo;
  bo.k = c.quantiles.rates;
  bo.exact_ci = c.exact_ci;
  for (const auto& [file, cov, kind] : rate_curves()) {
    const auto curve = events.empty() ? metrics::BinnedCurve{bo.k, {}} : mutation::binned_rates(events, cov, kind, bo);
    stage.write(file, curve_csv(curve));
  }
  std::size_t counts[3] = {0, 0, 0};
  for (const auto& e : events) ++counts[static_cast<int>(e.kind)];
  return stage.finish(std::to_string(events.size()) + " events: " + std::to_string(counts[0]) + " copy, " +
                      std::to_string(counts[1]) + " micro, " + std::to_string(counts[2]) + " macro");
}

RunResult run_fit(const PipelineConfig& c) {
  Stage stage("fit", c);
  struct Spec {
    std::string name, file;
    mutation::FitForm form;
  };
  using mutation::FitForm;
  const std::vector<Spec> specs = {{"micro_n", "micro_rate_vs_n.csv", FitForm::power_law},
                                   {"macro_n", "macro_rate_vs_n.csv", FitForm::power_law},
                                   {"micro_l", "micro_rate_vs_l.csv", FitForm::peak_decay},
                                   {"macro_l", "macro_rate_vs_l.csv", FitForm::exp_saturation}};
  std::string body;
  std::size_t ok = 0;
  for (const auto& s : specs) {
    auto curve = parse_curve_csv(stage.require(s.file, "rates"));
    json rec = {{"curve", s.name}, {"form", mutation::to_string(s.form)}};
    try {
      mutation::RateCurveFit fit;
      if (s.form == FitForm::power_law) {
        // A zero-rate bin has no logarithm; such bins are left out.
        std::erase_if(curve.bins, [](const metrics::Bin& b) { return !(b.y > 0.0) || !(b.x_mean > 0.0); });
        fit = mutation::fit_power_law(curve);
      } else {
        fit = mutation::fit_length_form(curve, s.form);
      }
      rec["params"] = fit.params;
      rec["rss"] = fit.rss;
      rec["points"] = curve.bins.size();
      ++ok;
    } catch (const mutation::FitError& e) {
      rec["error"] = e.what();
      rec["params"] = e.best().params;
      rec["rss"] = e.best().rss;
    } catch (const DomainError& e) {
      rec["error"] = e.what();
    }
    body += rec.dump() + "\n";
  }
  // <rho> per channel: the event-weighted mean rate of the calibration log.
  const std::string events = stage.require("events.csv", "rates");
  std::uint64_t total = 0, micro = 0, macro = 0;
  std::istringstream es(events);
  std::string line;
  std::getline(es, line);  // column header
  while (std::getline(es, line)) {
    if (line.empty()) continue;
    ++total;
    const auto a = line.find(',');
    const auto b = line.find(',', a + 1);
    const auto kind = line.substr(a + 1, b - a - 1);
    if (kind == "micro") ++micro;
    if (kind == "macro") ++macro;
  }
  for (const auto& [channel, count] : {std::pair{"micro", micro}, std::pair{"macro", macro}}) {
    json rec = {{"curve", "mean_rate"}, {"channel", channel}, {"events", total}};
    rec["value"] = total ? static_cast<double>(count) / static_cast<double>(total) : 0.0;
    body += rec.dump() + "\n";
  }
  stage.write("fits.jsonl", body);
  return stage.finish(std::to_string(ok) + " of 4 curves fitted");
}

morphsim::RateModel fitted_model(Stage& stage) {
  const std::string body = stage.require("fits.jsonl", "fit");
  std::map<std::string, json> fits;
  std::map<std::string, double> means;
  std::istringstream ss(body);
  std::string line;
  while (std::getline(ss, line)) {
    if (line.empty()) continue;
    const json j = json::parse(line);
    if (j.at("curve") == "mean_rate") {
      means[j.at("channel").get<std::string>()] = j.at("value").get<double>();
    } else {
      fits[j.at("curve").get<std::string>()] = j;
    }
  }
  auto curve = [&](const std::string& name) {
    const auto it = fits.find(name);
    if (it == fits.end() || it->second.contains("error")) {
      throw FormatError("fits.jsonl has no usable fit for " + name);
    }
    mutation::RateCurveFit f;
    f.form = *mutation::parse_fit_form(it->second.at("form").get<std::string>());
    f.params = it->second.at("params").get<std::vector<double>>();
    f.rss = it->second.at("rss").get<double>();
    return f;
  };
  morphsim::RateModel m;
  m.micro.by_mentions = curve("micro_n");
  m.micro.by_length = curve("micro_l");
  m.macro.by_mentions = curve("macro_n");
  m.macro.by_length = curve("macro_l");
  m.micro.mean_rate = means["micro"];
  m.macro.mean_rate = means["macro"];
  if (!(m.micro.mean_rate > 0.0) || !(m.macro.mean_rate > 0.0)) {
    throw FormatError("fitted mean mutation rate is zero; the combined rate is undefined");
  }
  return m;
}

json model_json(const morphsim::RateModel& m) {
  auto ch = [](const morphsim::ChannelModel& c) {
    return json{{"by_length", {{"form", mutation::to_string(c.by_length.form)}, {"params", c.by_length.params}}},
                {"by_mentions", {{"form", mutation::to_string(c.by_mentions.form)}, {"params", c.by_mentions.params}}},
                {"mean_rate", c.mean_rate}};
  };
  return {{"micro", ch(m.micro)}, {"macro", ch(m.macro)}, {"min_trim_len", m.min_trim_len}, {"max_edit", m.max_edit}};
}

RunResult run_simulate(const PipelineConfig& c) {
  Stage stage("simulate", c);
  morphsim::RateModel model;
  if (c.rate_model == "published") {
    model = morphsim::published_model();
  } else if (c.rate_model == "zero") {
    model = morphsim::zero_model();
  } else {
    model = fitted_model(stage);
  }
  model.max_edit = c.max_edit;

  std::vector<morphsim::Target> targets;
  json empirical;
  if (c.targets == "data") {
    const auto fams = load_subfamilies(stage);
    std::uint64_t versions = 0, subs = 0;
    for (const auto& lf : fams) {
      std::size_t longest = 1;
      for (const auto& q : lf.family.quotes) longest = std::max(longest, textprep::split_words(q.text).size());
      targets.push_back({longest, lf.family.total_mentions()});
      versions += lf.family.quotes.size();
      subs += lf.subs.size();
    }
    empirical = {{"n_versions", versions}, {"n_subfamilies", subs}};
    if (targets.empty()) throw FormatError("subfamilies.jsonl holds no families to use as targets");
  } else {
    targets = morphsim::power_law_targets(c.sim_families, derive_seed(c.seed, 0x7467));
  }
  const auto corpus = morphsim::simulate_corpus(targets, model, derive_seed(c.seed, 0x73696d), c.quantiles.entropy,
                                                c.threads);
  const auto& s = corpus.summary;

  std::string fam_table = "family,l0,mentions,versions,subfamilies,entropy\n";
  std::string ev = "family,kind,n,l,subfamily_id,time\n";
  char buf[160];
  for (std::size_t i = 0; i < corpus.families.size(); ++i) {
    const auto& f = corpus.families[i];
    std::snprintf(buf, sizeof buf, "%zu,%zu,%llu,%zu,%zu,%.6f\n", i, targets[i].l0,
                  static_cast<unsigned long long>(f.total_mentions), f.quotes.size(), f.subfamilies.size(),
                  morphsim::family_entropy(f));
    fam_table += buf;
    for (const auto& e : f.events) {
      std::snprintf(buf, sizeof buf, "%zu,%s,%llu,%.6f,%u,%llu\n", i, mutation::to_string(e.kind).data(),
                    static_cast<unsigned long long>(e.n), e.l, f.quotes[e.produced].subfamily,
                    static_cast<unsigned long long>(e.time));
      ev += buf;
    }
  }
  auto hist = [](const std::vector<morphsim::SizeCount>& h) {
    json a = json::array();
    for (const auto& sc : h) a.push_back({sc.size, sc.count});
    return a;
  };
  json summary = {{"n_families", s.n_families},
                  {"n_versions", s.n_versions},
                  {"n_subfamilies", s.n_subfamilies},
                  {"rejected_mutations", s.rejected},
                  {"size_histogram", hist(s.subfamily_size_histogram)},
                  {"versions_histogram", hist(s.subfamily_versions_histogram)},
                  {"entropy_curves", {{"family", curve_json(s.family_entropy)}, {"subfamily", curve_json(s.subfamily_entropy)}}},
                  {"model", model_json(model)},
                  {"targets", c.targets}};
  if (!empirical.is_null()) {
    auto rel = [](double sim, double emp) { return emp > 0 ? (sim - emp) / emp : 0.0; };
    empirical["relative_error_versions"] =
        rel(static_cast<double>(s.n_versions), empirical["n_versions"].get<double>());
    empirical["relative_error_subfamilies"] =
        rel(static_cast<double>(s.n_subfamilies), empirical["n_subfamilies"].get<double>());
    summary["empirical"] = empirical;
  }
  stage.write("sim_summary.json", summary.dump(2) + "\n");
  stage.write("sim_families.csv", fam_table);
  stage.write("sim_events.csv", ev);
  stage.write("sim_entropy_family.csv", curve_csv(s.family_entropy));
  stage.write("sim_entropy_subfamily.csv", curve_csv(s.subfamily_entropy));
  return stage.finish(std::to_string(s.n_families) + " families, " + std::to_string(s.n_versions) + " versions, " +
                      std::to_string(s.n_subfamilies) + " sub-families");
}

std::vector<evalstats::JudgmentRow> read_judgments(Stage& stage, const std::string& path, const std::string& key) {
  auto in = open_input(path, key);
  stage.note_input_file(path);
  return evalstats::parse_judgments(in);
}

json pr_json(const evalstats::PrecisionRecall& pr) {
  return {{"precision", pr.precision}, {"relative_recall", pr.relative_recall}, {"f_measure", pr.f_measure}};
}

RunResult run_evaluate(const PipelineConfig& c) {
  Stage stage("evaluate", c);
  const auto rows = read_judgments(stage, c.judgments, "judgments");
  const auto judged = evalstats::group_judgments(rows);
  const auto ours = evalstats::precision_relative_recall(judged);
  json out = {{"method", pr_json(ours)}, {"n_families", judged.size()}, {"n_items", rows.size()}};
  std::string summary = "P=" + format_double(ours.precision).substr(0, 6) +
                        " R=" + format_double(ours.relative_recall).substr(0, 6) +
                        " F=" + format_double(ours.f_measure).substr(0, 6);

  if (!c.judgments2.empty()) {
    // Second annotator: items pair up on (family, list, text).
    const auto rows2 = read_judgments(stage, c.judgments2, "judgments2");
    std::map<std::tuple<std::string, int, std::string>, evalstats::Mark> second;
    for (const auto& r : rows2) second.emplace(std::tuple{r.family_id, r.list, r.quote_text}, r.mark);
    std::vector<int> a, b;
    for (const auto& r : rows) {
      const auto it = second.find({r.family_id, r.list, r.quote_text});
      if (it == second.end()) continue;
      a.push_back(static_cast<int>(r.mark));
      b.push_back(static_cast<int>(it->second));
    }
    if (a.empty()) throw FormatError("the two judgment files share no items");
    out["kappa"] = evalstats::cohen_kappa(a, b);
    out["kappa_items"] = a.size();
  }
  if (!c.rival.empty()) {
    const auto rival_rows = read_judgments(stage, c.rival, "rival");
    const auto rival = evalstats::group_judgments(rival_rows);
    out["rival"] = pr_json(evalstats::precision_relative_recall(rival));
    const auto fa = evalstats::family_f_scores(judged);
    const auto fb = evalstats::family_f_scores(rival);
    std::vector<double> sa, sb;
    for (const auto& [id, f] : fa) {
      const auto it = fb.find(id);
      if (it == fb.end()) continue;
      sa.push_back(f);
      sb.push_back(it->second);
    }
    if (!sa.empty()) {
      out["randomization"] = {
          {"p_value", evalstats::approx_randomization_test(sa, sb, c.iterations, derive_seed(c.seed, 0x617274))},
          {"paired_families", sa.size()},
          {"iterations", c.iterations}};
    }
  }
  stage.write("evaluation.json", out.dump(2) + "\n");
  return stage.finish(summary);
}

RunResult run_report(const PipelineConfig& c) {
  Stage stage("report", c);
  const fs::path dir = c.out_dir;
  struct Section {
    std::string name;
    std::vector<std::string> files;
  };
  const std::vector<Section> sections = {
      {"families", {"families.jsonl", "graph.tsv"}},
      {"subfamilies", {"subfamilies.jsonl"}},
      {"stats",
       {"distributions.json", "term_stability.csv", "term_stability_vs_frequency.csv", "quote_stability_vs_length.csv",
        "quote_stability_vs_mentions.csv", "entropy_family_vs_mentions.csv", "entropy_subfamily_vs_mentions.csv"}},
      {"rates",
       {"events.csv", "static_rates.csv", "micro_rate_vs_n.csv", "macro_rate_vs_n.csv", "micro_rate_vs_l.csv",
        "macro_rate_vs_l.csv"}},
      {"fit", {"fits.jsonl"}},
      {"simulate", {"sim_summary.json", "sim_families.csv", "sim_events.csv", "sim_entropy_family.csv",
                    "sim_entropy_subfamily.csv"}},
      {"evaluate", {"evaluation.json"}}};
  json report = json::object();
  std::vector<std::string> absent;
  auto count_lines = [](const std::string& body) {
    return static_cast<std::size_t>(std::count(body.begin(), body.end(), '\n'));
  };
  for (const auto& sec : sections) {
    std::vector<std::string> missing;
    const std::string manifest = "manifest_" + sec.name + ".json";
    if (!fs::exists(dir / manifest)) missing.push_back(manifest);
    for (const auto& f : sec.files) {
      if (!fs::exists(dir / f)) missing.push_back(f);
    }
    json entry;
    if (!missing.empty()) {
      entry = {{"present", false}, {"missing", missing}};
      absent.push_back(sec.name);
      report[sec.name] = entry;
      continue;
    }
    const json mf = json::parse(artifacts::read_body(dir / manifest));
    entry = {{"present", true}, {"config_digest", mf.at("config_digest")}, {"files", sec.files}};
    if (sec.name == "families") {
      entry["n_families"] = count_lines(artifacts::read_body(dir / "families.jsonl"));
      entry["n_edges"] = count_lines(artifacts::read_body(dir / "graph.tsv"));
    } else if (sec.name == "subfamilies") {
      std::uint64_t subs = 0;
      const auto body = artifacts::read_body(dir / "subfamilies.jsonl");
      std::istringstream ss(body);
      std::string line;
      while (std::getline(ss, line)) {
        if (!line.empty()) subs += json::parse(line).value("n_subfamilies", std::uint64_t{0});
      }
      entry["n_families"] = count_lines(body);
      entry["n_subfamilies"] = subs;
    } else if (sec.name == "stats") {
      entry["distributions"] = json::parse(artifacts::read_body(dir / "distributions.json"));
    } else if (sec.name == "rates") {
      entry["n_events"] = count_lines(artifacts::read_body(dir / "events.csv")) - 1;
    } else if (sec.name == "fit") {
      json fits = json::array();
      std::istringstream ss(artifacts::read_body(dir / "fits.jsonl"));
      std::string line;
      while (std::getline(ss, line)) {
        if (!line.empty()) fits.push_back(json::parse(line));
      }
      entry["fits"] = fits;
    } else if (sec.name == "simulate") {
      entry["summary"] = json::parse(artifacts::read_body(dir / "sim_summary.json"));
    } else if (sec.name == "evaluate") {
      entry["evaluation"] = json::parse(artifacts::read_body(dir / "evaluation.json"));
    }
    report[sec.name] = entry;
  }
  report["absent"] = absent;
  stage.write("report.json", report.dump(2) + "\n");
  const int status = absent.empty() ? 0 : 3;
  std::string summary = absent.empty() ? "all sections present" : "absent:";
  for (const auto& a : absent) summary += " " + a;
  return stage.finish(summary, status);
}

}  // namespace

metrics::BinnedCurve parse_curve_csv(std::string_view body) {
  metrics::BinnedCurve curve;
  std::istringstream ss{std::string(body)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    if (line.empty() || line.rfind("x_mean", 0) == 0) continue;
    metrics::Bin b;
    unsigned long long n = 0;
    if (std::sscanf(line.c_str(), "%lf,%lf,%lf,%lf,%llu", &b.x_mean, &b.y, &b.ci_low, &b.ci_high, &n) != 5) {
      throw FormatError("bad curve row", lineno);
    }
    b.n = n;
    curve.bins.push_back(b);
  }
  curve.k = curve.bins.size();
  return curve;
}

RunResult run(std::string_view subcommand, const PipelineConfig& config) {
  validate(config);
  if (subcommand == "families") return run_families(config);
  if (subcommand == "subfamilies") return run_subfamilies(config);
  if (subcommand == "stats") return run_stats(config);
  if (subcommand == "rates") return run_rates(config);
  if (subcommand == "fit") return run_fit(config);
  if (subcommand == "simulate") return run_simulate(config);
  if (subcommand == "evaluate") return run_evaluate(config);
  if (subcommand == "report") return run_report(config);
  throw ConfigError("subcommand", "unknown subcommand '" + std::string(subcommand) + "'");
}

}  // namespace quotefam::pipeline
