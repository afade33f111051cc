#include "quotefam/quotefam.h"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <new>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "core/error.hpp"
#include "core/evalstats.hpp"
#include "core/metrics.hpp"
#include "core/morphsim.hpp"
#include "core/pipeline.hpp"
#include "core/subfam.hpp"

struct qf_config {
  quotefam::pipeline::PipelineConfig config;
};

struct qf_run_result {
  quotefam::pipeline::RunResult result;
};

struct qf_rate_model {
  quotefam::morphsim::RateModel model;
};

struct qf_simfamily {
  quotefam::morphsim::SimFamily family;
};

namespace {

thread_local std::string last_error;

qf_status fail(qf_status status, std::string message) {
  last_error = std::move(message);
  return status;
}

template <class Fn>
qf_status guarded(Fn&& fn) {
  try {
    last_error.clear();
    fn();
    return QF_OK;
  } catch (const quotefam::ConfigError& e) {
    return fail(QF_ERR_CONFIG, e.what());
  } catch (const quotefam::MissingPrerequisite& e) {
    return fail(QF_ERR_MISSING_PREREQUISITE, e.what());
  } catch (const quotefam::IoError& e) {
    return fail(QF_ERR_DATA, e.what());
  } catch (const quotefam::FormatError& e) {
    return fail(QF_ERR_DATA, e.what());
  } catch (const nlohmann::json::exception& e) {
    return fail(QF_ERR_DATA, std::string("malformed artifact: ") + e.what());
  } catch (const std::filesystem::filesystem_error& e) {
    return fail(QF_ERR_DATA, e.what());
  } catch (const quotefam::DomainError& e) {
    return fail(QF_ERR_DOMAIN, e.what());
  } catch (const std::bad_alloc&) {
    return fail(QF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(QF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(QF_ERR_INTERNAL, "unknown failure");
  }
}

qf_status copy_out(const std::string& value, char* buf, size_t buf_size, size_t* needed) {
  if (needed) *needed = value.size() + 1;
  if (buf && buf_size > 0) {
    const size_t n = std::min(buf_size - 1, value.size());
    std::memcpy(buf, value.data(), n);
    buf[n] = '\0';
  }
  return QF_OK;
}

qf_status null_arg(const char* what) { return fail(QF_ERR_ARGUMENT, std::string(what) + " is NULL"); }

}  // namespace

extern "C" {

const char* qf_version(void) { return "0.1.0"; }

const char* qf_status_string(qf_status status) {
  switch (status) {
    case QF_OK: return "ok";
    case QF_ERR_INTERNAL: return "internal error";
    case QF_ERR_CONFIG: return "configuration error";
    case QF_ERR_MISSING_PREREQUISITE: return "missing prerequisite";
    case QF_ERR_DATA: return "data error";
    case QF_ERR_DOMAIN: return "domain error";
    case QF_ERR_ARGUMENT: return "invalid argument";
  }
  return "unknown status";
}

const char* qf_last_error(void) { return last_error.c_str(); }

qf_config* qf_config_new(void) { return new (std::nothrow) qf_config{}; }

void qf_config_free(qf_config* config) { delete config; }

qf_config* qf_config_clone(const qf_config* config) {
  if (!config) return nullptr;
  return new (std::nothrow) qf_config{*config};
}

qf_status qf_config_set(qf_config* config, const char* key, const char* value) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  if (!value) return null_arg("value");
  return guarded([&] { quotefam::pipeline::set_option(config->config, key, value); });
}

qf_status qf_config_get(const qf_config* config, const char* key, char* buf, size_t buf_size, size_t* needed) {
  if (!config) return null_arg("config");
  if (!key) return null_arg("key");
  std::string value;
  const auto st = guarded([&] { value = quotefam::pipeline::get_option(config->config, key); });
  if (st != QF_OK) return st;
  return copy_out(value, buf, buf_size, needed);
}

qf_status qf_config_validate(const qf_config* config) {
  if (!config) return null_arg("config");
  return guarded([&] { quotefam::pipeline::validate(config->config); });
}

qf_status qf_config_digest(const qf_config* config, char* buf, size_t buf_size, size_t* needed) {
  if (!config) return null_arg("config");
  std::string value;
  const auto st = guarded([&] { value = quotefam::pipeline::config_digest(config->config); });
  if (st != QF_OK) return st;
  return copy_out(value, buf, buf_size, needed);
}

size_t qf_option_count(void) { return quotefam::pipeline::option_names().size(); }

const char* qf_option_name(size_t index) {
  const auto& names = quotefam::pipeline::option_names();
  return index < names.size() ? names[index].c_str() : nullptr;
}

size_t qf_subcommand_count(void) { return quotefam::pipeline::subcommands().size(); }

const char* qf_subcommand_name(size_t index) {
  const auto& names = quotefam::pipeline::subcommands();
  return index < names.size() ? names[index].c_str() : nullptr;
}

qf_status qf_run(const qf_config* config, const char* subcommand, qf_run_result** result) {
  if (!config) return null_arg("config");
  if (!subcommand) return null_arg("subcommand");
  if (!result) return null_arg("result");
  *result = nullptr;
  return guarded([&] {
    auto r = quotefam::pipeline::run(subcommand, config->config);
    *result = new qf_run_result{std::move(r)};
  });
}

int qf_run_result_exit_code(const qf_run_result* result) { return result ? result->result.status : QF_ERR_ARGUMENT; }

const char* qf_run_result_summary(const qf_run_result* result) {
  return result ? result->result.summary.c_str() : nullptr;
}

size_t qf_run_result_artifact_count(const qf_run_result* result) {
  return result ? result->result.artifacts.size() : 0;
}

const char* qf_run_result_artifact(const qf_run_result* result, size_t index) {
  if (!result || index >= result->result.artifacts.size()) return nullptr;
  return result->result.artifacts[index].c_str();
}

void qf_run_result_free(qf_run_result* result) { delete result; }

qf_status qf_token_edit_distance(const char* a, const char* b, size_t* out) {
  if (!a || !b) return null_arg("text");
  if (!out) return null_arg("out");
  return guarded([&] { *out = quotefam::subfam::token_edit_distance(a, b); });
}

qf_status qf_entropy(const uint64_t* mentions, size_t count, double* out) {
  if (!mentions && count > 0) return null_arg("mentions");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (count == 0) throw quotefam::DomainError("entropy of an empty group");
    *out = quotefam::metrics::entropy(std::span<const std::uint64_t>(mentions, count));
  });
}

qf_status qf_cohen_kappa(const int* a, const int* b, size_t count, double* out) {
  if ((!a || !b) && count > 0) return null_arg("labels");
  if (!out) return null_arg("out");
  return guarded([&] { *out = quotefam::evalstats::cohen_kappa({a, count}, {b, count}); });
}

qf_status qf_randomization_test(const double* a, const double* b, size_t count, size_t iterations, uint64_t seed,
                                double* p_value) {
  if ((!a || !b) && count > 0) return null_arg("scores");
  if (!p_value) return null_arg("p_value");
  return guarded([&] {
    *p_value = quotefam::evalstats::approx_randomization_test({a, count}, {b, count}, iterations, seed);
  });
}

qf_rate_model* qf_rate_model_published(void) { return new (std::nothrow) qf_rate_model{quotefam::morphsim::published_model()}; }

qf_rate_model* qf_rate_model_constant(double micro_rate, double macro_rate) {
  if (!(micro_rate >= 0.0 && micro_rate <= 1.0) || !(macro_rate >= 0.0 && macro_rate <= 1.0)) {
    fail(QF_ERR_DOMAIN, "rates must lie in [0, 1]");
    return nullptr;
  }
  return new (std::nothrow) qf_rate_model{quotefam::morphsim::constant_model(micro_rate, macro_rate)};
}

void qf_rate_model_free(qf_rate_model* model) { delete model; }

qf_status qf_combined_rate(const qf_rate_model* model, qf_channel channel, double l, double n, double* out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  return guarded([&] {
    if (!(l >= 1.0) || !(n >= 1.0)) throw quotefam::DomainError("l and n must be at least 1");
    const auto ch = channel == QF_MICRO ? quotefam::morphsim::Channel::micro : quotefam::morphsim::Channel::macro;
    *out = quotefam::morphsim::combined_rate(model->model, ch, l, n);
  });
}

qf_status qf_simulate_family(const qf_rate_model* model, size_t l0, uint64_t mentions, uint64_t seed,
                             qf_simfamily** out) {
  if (!model) return null_arg("model");
  if (!out) return null_arg("out");
  *out = nullptr;
  return guarded([&] {
    auto f = quotefam::morphsim::simulate_family(l0, mentions, model->model, seed);
    *out = new qf_simfamily{std::move(f)};
  });
}

size_t qf_simfamily_versions(const qf_simfamily* family) { return family ? family->family.quotes.size() : 0; }

size_t qf_simfamily_subfamilies(const qf_simfamily* family) {
  return family ? family->family.subfamilies.size() : 0;
}

uint64_t qf_simfamily_mentions(const qf_simfamily* family) { return family ? family->family.total_mentions : 0; }

double qf_simfamily_entropy(const qf_simfamily* family) {
  return family ? quotefam::morphsim::family_entropy(family->family) : 0.0;
}

void qf_simfamily_free(qf_simfamily* family) { delete family; }

}  // extern "C"
