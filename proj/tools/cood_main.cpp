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

// cood: train / eval / clp / ablate / gen-data.
//
//   cood train --config toy.cfg --seed 3 --out runs/toy
//   cood eval --config toy.cfg --model runs/toy --out runs/toy-eval

#include <cstdint>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cood/cood.h"

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::vector<std::string> overrides;
  bool quiet = false;
};

void AddCommon(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config_path, "config file (key = value lines)");
  cmd->add_option("--seed", c.seed, "run seed; overrides run.seeds");
  cmd->add_option("--out", c.out, "output directory (default: run.out)");
  cmd->add_option("--set", c.overrides, "extra key=value override, repeatable");
  cmd->add_flag("-q,--quiet", c.quiet, "no per-epoch progress on stderr");
}

void PrintProgress(void*, uint64_t seed, size_t epoch, int stage, double con, double cls,
                   double lr) {
  std::fprintf(stderr, "seed %llu epoch %zu %s con=%.6g cls=%.6g lr=%.4g\n",
               static_cast<unsigned long long>(seed), epoch, stage == 0 ? "contrastive" : "joint",
               con, cls, lr);
}

int Report(cood_status s) {
  if (s != COOD_OK)
    std::fprintf(stderr, "cood: %s\n", cood_last_error());
  return cood_status_exit_code(s);
}

// Loads the config and applies --set overrides; returns a nonzero exit code
// on failure.
int LoadConfig(const Common& c, cood_config** cfg) {
  cood_status s = c.config_path.empty() ? cood_config_new(cfg)
                                        : cood_config_load(c.config_path.c_str(), cfg);
  if (s != COOD_OK) return Report(s);
  for (const auto& kv : c.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) {
      std::fprintf(stderr, "cood: --set expects key=value, got '%s'\n", kv.c_str());
      return 2;
    }
    s = cood_config_set(*cfg, kv.substr(0, eq).c_str(), kv.substr(eq + 1).c_str());
    if (s != COOD_OK) return Report(s);
  }
  return 0;
}

std::string OutDir(const Common& c, const cood_config* cfg) {
  if (!c.out.empty()) return c.out;
  char buf[4096];
  if (cood_config_get(cfg, "run.out", buf, sizeof buf, nullptr) != COOD_OK) return "out";
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"contrastive training for out-of-distribution detection"};
  app.set_version_flag("--version", std::string(cood_version()));
  app.require_subcommand(1);

  Common train_opts, eval_opts, clp_opts, ablate_opts, gen_opts;
  std::string model_dir, inlier_path, outlier_path;

  auto* train = app.add_subcommand("train", "two-stage training, bank fit, evaluation");
  AddCommon(train, train_opts);
  auto* eval = app.add_subcommand("eval", "score inlier and outlier sets with a trained model");
  AddCommon(eval, eval_opts);
  eval->add_option("--model", model_dir, "directory written by train")->required();
  eval->add_option("--inlier", inlier_path, "inlier set (.csv or CIFAR binary)");
  eval->add_option("--outlier", outlier_path, "outlier set (.csv or CIFAR binary)");
  auto* clp = app.add_subcommand("clp", "ensemble CLP, confusion distance and dendrogram");
  AddCommon(clp, clp_opts);
  auto* ablate = app.add_subcommand("ablate", "objective and hyperparameter ablation sweep");
  AddCommon(ablate, ablate_opts);
  auto* gen = app.add_subcommand("gen-data", "write the configured synthetic sets to disk");
  AddCommon(gen, gen_opts);

  CLI11_PARSE(app, argc, argv);

  Common* c = train->parsed()    ? &train_opts
              : eval->parsed()   ? &eval_opts
              : clp->parsed()    ? &clp_opts
              : ablate->parsed() ? &ablate_opts
                                 : &gen_opts;
  cood_config* cfg = nullptr;
  if (int rc = LoadConfig(*c, &cfg); rc != 0) {
    cood_config_free(cfg);
    return rc;
  }
  const std::string out = OutDir(*c, cfg);
  const uint64_t seed_value = c->seed.value_or(0);
  const uint64_t* seed = c->seed ? &seed_value : nullptr;
  cood_progress_fn progress = c->quiet ? nullptr : PrintProgress;

  cood_status s;
  if (train->parsed()) {
    s = cood_train(cfg, seed, out.c_str(), progress, nullptr);
  } else if (eval->parsed()) {
    s = cood_eval(cfg, model_dir.c_str(), inlier_path.empty() ? nullptr : inlier_path.c_str(),
                  outlier_path.empty() ? nullptr : outlier_path.c_str(), out.c_str());
  } else if (clp->parsed()) {
    s = cood_clp(cfg, seed, out.c_str(), progress, nullptr);
  } else if (ablate->parsed()) {
    s = cood_ablate(cfg, seed, out.c_str(), progress, nullptr);
  } else {
    s = cood_gen_data(cfg, seed, out.c_str());
  }
  cood_config_free(cfg);
  return Report(s);
}
