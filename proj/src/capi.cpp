// Copyright 2026 The cood Authors
// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cood/cood.h"

#include <cstring>
#include <exception>
#include <filesystem>
#include <optional>
#include <string>

#include "cood/density.hpp"
#include "cood/error.hpp"
#include "cood/experiment.hpp"
#include "cood/network.hpp"
#include "cood/text.hpp"

struct cood_config {
  cood::ExperimentConfig value;
};

struct cood_model {
  cood::EncoderParams params;
  cood::GaussianBank bank;
};

namespace {

thread_local std::string g_last_error;

cood_status FromCode(cood::ErrorCode code) {
  return static_cast<cood_status>(static_cast<int>(code) + 1);
}

template <typename F>
cood_status Guard(F&& body) {
  try {
    body();
    g_last_error.clear();
    return COOD_OK;
  } catch (const cood::Error& e) {
    g_last_error = e.what();
    return FromCode(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "Internal: out of memory";
    return COOD_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = std::string("Internal: ") + e.what();
    return COOD_ERR_INTERNAL;
  }
}

cood_status InvalidArgument(const char* what) {
  g_last_error = std::string("InvalidArgument: ") + what;
  return COOD_ERR_INVALID_ARGUMENT;
}

std::optional<std::uint64_t> SeedOf(const uint64_t* seed) {
  if (!seed) return std::nullopt;
  return *seed;
}

cood::ProgressCallback Progress(cood_progress_fn fn, void* user) {
  if (!fn) return {};
  return [fn, user](std::uint64_t seed, const cood::EpochRecord& r) {
    fn(user, seed, r.epoch, r.stage == cood::Stage::kContrastive ? 0 : 1, r.contrastive_loss,
       r.class_loss, r.lr);
  };
}

}  // namespace

extern "C" {

const char* cood_version(void) { return "0.1.0"; }

const char* cood_last_error(void) { return g_last_error.c_str(); }

const char* cood_status_name(cood_status status) {
  switch (status) {
    case COOD_OK:
      return "Ok";
    case COOD_ERR_INVALID_ARGUMENT:
      return "InvalidArgument";
    case COOD_ERR_INTERNAL:
      return "Internal";
    default:
      break;
  }
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(cood::ErrorCode::kConfigError)) return "Unknown";
  static thread_local std::string name;
  name = cood::ErrorCodeName(static_cast<cood::ErrorCode>(code));
  return name.c_str();
}

int cood_status_exit_code(cood_status status) {
  switch (status) {
    case COOD_OK:
      return 0;
    case COOD_ERR_INVALID_ARGUMENT:
      return 2;
    case COOD_ERR_INTERNAL:
      return 1;
    default:
      break;
  }
  const int code = static_cast<int>(status) - 1;
  if (code < 0 || code > static_cast<int>(cood::ErrorCode::kConfigError)) return 1;
  switch (cood::CategoryOf(static_cast<cood::ErrorCode>(code))) {
    case cood::ErrorCategory::kConfig:
      return 2;
    case cood::ErrorCategory::kData:
      return 3;
    case cood::ErrorCategory::kNumeric:
      return 4;
  }
  return 1;
}

cood_status cood_config_new(cood_config** out) {
  if (!out) return InvalidArgument("out is NULL");
  return Guard([&] { *out = new cood_config{}; });
}

cood_status cood_config_load(const char* path, cood_config** out) {
  if (!path || !out) return InvalidArgument("path and out are required");
  return Guard([&] { *out = new cood_config{cood::ExperimentConfig::Load(path)}; });
}

cood_status cood_config_parse(const char* text, cood_config** out) {
  if (!text || !out) return InvalidArgument("text and out are required");
  return Guard([&] { *out = new cood_config{cood::ExperimentConfig::Parse(text)}; });
}

cood_status cood_config_set(cood_config* config, const char* key, const char* value) {
  if (!config || !key || !value) return InvalidArgument("config, key and value are required");
  return Guard([&] { config->value.Set(key, value); });
}

cood_status cood_config_get(const cood_config* config, const char* key, char* buffer,
                            size_t capacity, size_t* needed) {
  if (!config || !key) return InvalidArgument("config and key are required");
  return Guard([&] {
    const std::string& v = config->value.Get(key);
    if (needed) *needed = v.size();
    if (buffer && capacity > 0) {
      const std::size_t n = std::min(v.size(), capacity - 1);
      std::memcpy(buffer, v.data(), n);
      buffer[n] = '\0';
    }
  });
}

cood_status cood_config_hash(const cood_config* config, uint64_t* out) {
  if (!config || !out) return InvalidArgument("config and out are required");
  return Guard([&] { *out = config->value.Hash(); });
}

void cood_config_free(cood_config* config) { delete config; }

cood_status cood_train(const cood_config* config, const uint64_t* seed, const char* out_dir,
                       cood_progress_fn progress, void* user) {
  if (!config || !out_dir) return InvalidArgument("config and out_dir are required");
  return Guard(
      [&] { cood::RunTrain(config->value, SeedOf(seed), out_dir, Progress(progress, user)); });
}

cood_status cood_eval(const cood_config* config, const char* model_dir, const char* inlier_path,
                      const char* outlier_path, const char* out_dir) {
  if (!config || !model_dir || !out_dir)
    return InvalidArgument("config, model_dir and out_dir are required");
  return Guard([&] {
    cood::RunEval(config->value, model_dir, inlier_path ? inlier_path : "",
                  outlier_path ? outlier_path : "", out_dir);
  });
}

cood_status cood_clp(const cood_config* config, const uint64_t* seed, const char* out_dir,
                     cood_progress_fn progress, void* user) {
  if (!config || !out_dir) return InvalidArgument("config and out_dir are required");
  return Guard(
      [&] { cood::RunClp(config->value, SeedOf(seed), out_dir, Progress(progress, user)); });
}

cood_status cood_ablate(const cood_config* config, const uint64_t* seed, const char* out_dir,
                        cood_progress_fn progress, void* user) {
  if (!config || !out_dir) return InvalidArgument("config and out_dir are required");
  return Guard(
      [&] { cood::RunAblate(config->value, SeedOf(seed), out_dir, Progress(progress, user)); });
}

cood_status cood_gen_data(const cood_config* config, const uint64_t* seed, const char* out_dir) {
  if (!config || !out_dir) return InvalidArgument("config and out_dir are required");
  return Guard([&] { cood::RunGenData(config->value, SeedOf(seed), out_dir); });
}

cood_status cood_model_load(const char* model_dir, cood_model** out) {
  if (!model_dir || !out) return InvalidArgument("model_dir and out are required");
  return Guard([&] {
    const std::filesystem::path dir(model_dir);
    auto m = std::make_unique<cood_model>();
    m->params = cood::DeserializeParams(cood::ReadFileOrThrow((dir / "params.json").string()));
    m->bank = cood::DeserializeBank(cood::ReadFileOrThrow((dir / "bank.json").string()));
    cood::Require(m->bank.dim == m->params.config.representation_dim,
                  cood::ErrorCode::kIncompatibleModel, "bank dimension does not match encoder");
    *out = m.release();
  });
}

size_t cood_model_input_dim(const cood_model* model) {
  return model ? model->params.config.input_dim : 0;
}

size_t cood_model_num_classes(const cood_model* model) {
  return model ? model->params.config.num_classes : 0;
}

cood_status cood_model_score(const cood_model* model, const double* inputs, size_t rows,
                             size_t dim, double* scores, size_t* best_class) {
  if (!model || (!inputs && rows > 0) || (!scores && rows > 0))
    return InvalidArgument("model, inputs and scores are required");
  return Guard([&] {
    cood::Require(dim == model->params.config.input_dim, cood::ErrorCode::kIncompatibleModel,
                  "input dim " + std::to_string(dim) + " does not match model input " +
                      std::to_string(model->params.config.input_dim));
    cood::Matrix x(rows, dim, std::vector<double>(inputs, inputs + rows * dim));
    const auto entries = cood::ScoreBatch(model->bank, cood::Encode(model->params, x, nullptr));
    for (std::size_t i = 0; i < rows; ++i) {
      scores[i] = entries[i].score;
      if (best_class) best_class[i] = entries[i].best_class;
    }
  });
}

void cood_model_free(cood_model* model) { delete model; }

}  // extern "C"
