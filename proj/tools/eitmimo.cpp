// SPDX-License-Identifier: Apache-2.0
//
// eit-mimo: electromagnetic channel modelling and capacity analysis toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
// eitmimo: batch runner for scenario files.
//   eitmimo run <scenario> [--seed N] [--scale F] [--out DIR] [--format csv|json]
//   eitmimo validate <scenario>
//   eitmimo list-studies
// Exit codes: 0 ok, 1 invalid scenario or arguments, 2 runtime failure.
// EIT_LOG_LEVEL=trace|debug|info|warn|error|off sets log verbosity (default warn).

#include "eit/scenario/study.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <iostream>
#include <optional>

namespace
{
    constexpr int exit_invalid = 1;
    constexpr int exit_runtime = 2;

    void configure_logging()
    {
        auto logger = spdlog::stderr_color_mt("eitmimo");
        spdlog::set_default_logger(logger);
        spdlog::set_pattern("[%l] %v");
        spdlog::set_level(spdlog::level::warn);
        if (const char *env = std::getenv("EIT_LOG_LEVEL"))
        {
            const auto level = spdlog::level::from_str(env);
            if (level == spdlog::level::off && std::string(env) != "off")
                spdlog::warn("EIT_LOG_LEVEL='{}' not recognised, keeping 'warn'", env);
            else
                spdlog::set_level(level);
        }
    }

    void report(const eit::scenario::validation_error &e)
    {
        for (const auto &issue : e.issues())
            std::cerr << "error: " << issue << "\n";
    }
}

int main(int argc, char **argv)
{
    configure_logging();
    using namespace eit::scenario;

    CLI::App app{"Electromagnetic MIMO channel studies from scenario files"};
    app.require_subcommand(1);

    std::string file;
    std::optional<std::uint64_t> seed;
    std::optional<double> scale;
    std::optional<std::string> out_dir, format;

    auto *run = app.add_subcommand("run", "Run a scenario and write its result tables");
    run->add_option("scenario", file, "Scenario file (YAML)")->required();
    run->add_option("--seed", seed, "Master seed (overrides the file)");
    run->add_option("--scale", scale, "Scale factor for Monte Carlo counts (overrides the file)")
        ->check(CLI::PositiveNumber);
    run->add_option("--out", out_dir, "Output directory (overrides the file)");
    run->add_option("--format", format, "Table format")->check(CLI::IsMember({"csv", "json"}));

    auto *validate = app.add_subcommand("validate", "Check a scenario file and report every problem");
    validate->add_option("scenario", file, "Scenario file (YAML)")->required();

    auto *list = app.add_subcommand("list-studies", "List the supported study kinds");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_invalid;
    }

    if (list->parsed())
    {
        for (const auto &[kind, name] : study_names())
            std::cout << name << "\n";
        return 0;
    }

    Scenario s;
    try
    {
        s = load_scenario(file);
    }
    catch (const validation_error &e)
    {
        report(e);
        return exit_invalid;
    }
    catch (const eit::io_error &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_invalid;
    }

    if (validate->parsed())
    {
        std::cout << file << ": ok (" << to_string(s.study) << ")\n";
        return 0;
    }

    if (seed)
        s.seed = *seed;
    if (scale)
        s.scale = *scale;
    if (out_dir)
        s.output.dir = *out_dir;
    if (format)
        s.output.format = *format == "json" ? eit::io::Format::json : eit::io::Format::csv;

    try
    {
        spdlog::info("running {} (seed {}, scale {})", to_string(s.study), s.seed, s.scale);
        const auto result = run_study(s);
        for (const auto &path : write_study(s, result, s.output.dir, s.output.format))
            std::cout << path.string() << "\n";
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return exit_runtime;
    }
    return 0;
}
