// Copyright 2026 The arraykit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <iostream>

#include "commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"arraykit: direct-path annotation, simulation and dataset tools for microphone arrays"};
  app.require_subcommand(1);
  cli::Context ctx;
  std::int64_t seed = -1;
  app.add_option("--config", ctx.config_path, "Pipeline configuration JSON");
  app.add_option("--seed", seed, "Random seed (overrides the config)")->check(CLI::NonNegativeNumber);
  app.add_option("--jobs", ctx.jobs, "Parallel jobs")->check(CLI::PositiveNumber);
  app.add_flag("--dry-run", ctx.dry_run, "List planned outputs without writing");
  app.add_flag("--verbose", ctx.verbose, "Structured progress logs on stderr");
  auto commands = cli::register_commands(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return cli::kExitConfig;
  }
  if (seed >= 0) ctx.seed_flag = seed;

  for (auto& c : commands) {
    if (!c.app->parsed()) continue;
    try {
      ctx.load();
      c.params->bind(ctx);
      ctx.log("info", "start", {{"cmd", c.app->get_name()}, {"jobs", ctx.jobs}, {"dry_run", ctx.dry_run}});
      return c.run(ctx, *c.params);
    } catch (const cli::Failure& f) {
      ctx.log("error", "failed", {{"cmd", c.app->get_name()}, {"status", f.status}, {"message", f.message}});
      std::cerr << "error: " << f.message << "\n";
      return f.exit_code;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return cli::kExitModule;
    }
  }
  return cli::kExitConfig;
}
