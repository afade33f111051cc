// Command-line driver. Everything goes through the C interface.

#include <quotefam/quotefam.h>

#include <cstdio>
#include <map>
#include <memory>
#include <string>

#include <CLI11.hpp>

namespace {

constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;

using ConfigPtr = std::unique_ptr<qf_config, decltype(&qf_config_free)>;
using ResultPtr = std::unique_ptr<qf_run_result, decltype(&qf_run_result_free)>;

std::string flag_name(const char* key) {
  std::string s = key;
  for (auto& ch : s) {
    if (ch == '_') ch = '-';
  }
  return "--" + s;
}

int exit_code(qf_status st) {
  switch (st) {
    case QF_OK: return 0;
    case QF_ERR_CONFIG:
    case QF_ERR_ARGUMENT: return kExitConfig;
    case QF_ERR_MISSING_PREREQUISITE: return 3;
    case QF_ERR_DATA:
    case QF_ERR_DOMAIN: return 4;
    case QF_ERR_INTERNAL: return kExitInternal;
  }
  return kExitInternal;
}

const std::map<std::string, std::string>& flag_help() {
  static const std::map<std::string, std::string> help = {
      {"input", "mention stream to read (families)"},
      {"format", "input format: memetracker or tsv"},
      {"threshold", "similarity threshold on 1 - L (default 0.35)"},
      {"min_shared_words", "full words two quotes must share (default 2)"},
      {"min_mentions", "mentions a quote needs to be kept (default 5)"},
      {"min_words", "words a quote needs to survive filtering (default 5)"},
      {"max_edit", "edit radius of the sub-family graph (default 1)"},
      {"quantiles", "N for every curve, or key=N,... over term_frequency, quote_length, quote_mentions, entropy, rates"},
      {"seed", "root seed for all randomness"},
      {"threads", "worker cap, 0 for all cores"},
      {"out_dir", "artifact directory"},
      {"english_check", "on/off: drop quotes failing the English word test"},
      {"exact_ci", "on/off: exact binomial intervals for rate curves"},
      {"pos", "term<TAB>tag file for per-tag stability"},
      {"lemmas", "surface<TAB>lemma table"},
      {"stopwords", "stop-word list replacing the bundled one"},
      {"wordlist", "English word list replacing the bundled one"},
      {"trials", "independent community-detection runs (default 3)"},
      {"rate_model", "simulate with published, fitted or zero rates"},
      {"targets", "simulate synthetic families or the data's families"},
      {"sim_families", "number of synthetic families (default 1000)"},
      {"judgments", "relevance judgments for the evaluated method"},
      {"judgments2", "second annotator's judgments, for kappa"},
      {"rival", "relevance judgments for the rival method"},
      {"iterations", "randomization test resamples (default 10000)"},
  };
  return help;
}

const std::map<std::string, std::string>& sub_help() {
  static const std::map<std::string, std::string> help = {
      {"families", "cluster quotes into families (graph.tsv, families.jsonl)"},
      {"subfamilies", "split families into edit-distance sub-families"},
      {"stats", "stability and entropy curves"},
      {"rates", "replay mention streams into mutation events and rate curves"},
      {"fit", "fit parametric forms to the rate curves"},
      {"simulate", "grow synthetic families under a rate model"},
      {"evaluate", "precision, relative recall, kappa and significance"},
      {"report", "collect every artifact into report.json"},
  };
  return help;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quotefam: quotation families, mutation rates and family growth simulation"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(qf_version()));

  std::map<std::string, std::string> values;
  std::map<std::string, CLI::App*> subs;
  for (size_t s = 0; s < qf_subcommand_count(); ++s) {
    const std::string name = qf_subcommand_name(s);
    const auto h = sub_help().find(name);
    auto* sub = app.add_subcommand(name, h == sub_help().end() ? std::string() : h->second);
    subs[name] = sub;
    for (size_t i = 0; i < qf_option_count(); ++i) {
      const std::string key = qf_option_name(i);
      const auto it = flag_help().find(key);
      sub->add_option(flag_name(key.c_str()), values[name + "\x1f" + key],
                      it == flag_help().end() ? std::string() : it->second);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kExitConfig;
  }

  std::string chosen;
  for (const auto& [name, sub] : subs) {
    if (sub->parsed()) chosen = name;
  }

  ConfigPtr config(qf_config_new(), qf_config_free);
  if (!config) {
    std::fprintf(stderr, "quotefam: out of memory\n");
    return kExitInternal;
  }
  auto* sub = subs.at(chosen);
  for (size_t i = 0; i < qf_option_count(); ++i) {
    const std::string key = qf_option_name(i);
    if (sub->count(flag_name(key.c_str())) == 0) continue;
    const qf_status st = qf_config_set(config.get(), key.c_str(), values[chosen + "\x1f" + key].c_str());
    if (st != QF_OK) {
      std::fprintf(stderr, "quotefam: %s: %s\n", qf_status_string(st), qf_last_error());
      return exit_code(st);
    }
  }

  qf_run_result* raw = nullptr;
  const qf_status st = qf_run(config.get(), chosen.c_str(), &raw);
  if (st != QF_OK) {
    std::fprintf(stderr, "quotefam %s: %s: %s\n", chosen.c_str(), qf_status_string(st), qf_last_error());
    return exit_code(st);
  }
  ResultPtr result(raw, qf_run_result_free);
  std::printf("%s: %s\n", chosen.c_str(), qf_run_result_summary(result.get()));
  for (size_t i = 0; i < qf_run_result_artifact_count(result.get()); ++i) {
    std::printf("  wrote %s\n", qf_run_result_artifact(result.get(), i));
  }
  return qf_run_result_exit_code(result.get());
}
