#pragma once

// Stage driver behind the command line: configuration, the subcommands and
// their artifact files.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "core/metrics.hpp"

namespace quotefam::pipeline {

struct Quantiles {
  std::uint64_t term_frequency = 20;
  std::uint64_t quote_length = 10;
  std::uint64_t quote_mentions = 30;
  std::uint64_t entropy = 10;
  std::uint64_t rates = 15;
};

struct PipelineConfig {
  std::string input;
  std::string format = "memetracker";
  double threshold = 0.35;
  std::uint64_t min_shared_words = 2;
  std::uint64_t min_mentions = 5;
  std::uint64_t min_words = 5;
  std::uint64_t max_edit = 1;
  Quantiles quantiles;
  std::uint64_t seed = 1;
  std::uint64_t threads = 0;  // 0: machine parallelism
  std::string out_dir = "quotefam_out";

  bool english_check = true;
  bool exact_ci = false;
  std::string pos;        // term<TAB>tag
  std::string lemmas;     // surface<TAB>lemma
  std::string stopwords;  // one per line
  std::string wordlist;   // one per line
  std::uint64_t trials = 3;

  std::string rate_model = "published";  // published | fitted | zero
  std::string targets = "synthetic";  // synthetic | data
  std::uint64_t sim_families = 1000;

  std::string judgments;
  std::string judgments2;
  std::string rival;
  std::uint64_t iterations = 10000;
};

// Option names accepted by set_option / get_option.
const std::vector<std::string>& option_names();

// ConfigError naming the key for unknown keys or unparsable values.
void set_option(PipelineConfig& config, std::string_view key, std::string_view value);
std::string get_option(const PipelineConfig& config, std::string_view key);

// ConfigError naming the first offending field.
void validate(const PipelineConfig& config);

// Canonical JSON of the settings that affect artifacts (threads and out_dir
// excluded) and its SHA-256.
std::string canonical_config(const PipelineConfig& config);
std::string config_digest(const PipelineConfig& config);

const std::vector<std::string>& subcommands();

struct RunResult {
  int status = 0;  // 0, or 3 when `report` finds absent sections
  std::vector<std::string> artifacts;
  std::string summary;  // one line for the console
};

// Throws ConfigError, MissingPrerequisite, IoError, FormatError or
// DomainError.
RunResult run(std::string_view subcommand, const PipelineConfig& config);

// CSV produced by metrics::write_curve_csv (without the provenance header).
metrics::BinnedCurve parse_curve_csv(std::string_view body);

}  // namespace quotefam::pipeline
