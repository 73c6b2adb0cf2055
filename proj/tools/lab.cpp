// Copyright 2026 The MCB Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// lab curvature|bounds|simulate|elo|verify --config <file> --out <dir>
//     [--seed <u64>] [--threads <k>]

#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "mcb/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Matrix concentration lab for inhomogeneous Markov chains"};
  app.require_subcommand(1);
  std::string config;
  std::string out;
  std::uint64_t seed = 0;
  int threads = 1;
  for (const char* name : {"curvature", "bounds", "simulate", "elo", "verify"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "Output directory (default: $MCB_OUT_DIR, else ./out)");
    sub->add_option("--seed", seed, "Master seed; overrides config.seed");
    sub->add_option("--threads", threads, "Worker threads")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : mcb::cli::kConfigError;
  }
  CLI::App* sub = app.get_subcommands().front();

  mcb::cli::RunOptions opts;
  try {
    opts.config = mcb::cli::load_config(config, &opts.config_text);
  } catch (const mcb::cli::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return mcb::cli::kConfigError;
  }
  if (!out.empty()) {
    opts.out_dir = out;
  } else if (const char* env = std::getenv("MCB_OUT_DIR")) {
    opts.out_dir = env;
  } else {
    opts.out_dir = "out";
  }
  if (sub->count("--seed")) opts.seed = seed;
  opts.threads = threads;
  return mcb::cli::execute(sub->get_name(), opts);
}
