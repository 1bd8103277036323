// SPDX-License-Identifier: MIT
//
// Command-line front end: run experiments from a JSON config, validate
// configs without running them, and list the available experiments.
//
// Exit codes: 0 success, 2 configuration/validation problem (including
// malformed JSON), 3 runtime/numeric failure, 4 I/O failure.

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "sounder/errors.hpp"
#include "sounder/experiments.hpp"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitIo = 4;

/// Read a whole file; nullopt (with a message) when it cannot be read.
std::optional<std::string> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    std::cerr << "error: cannot read config file '" << path << "'\n";
    return std::nullopt;
  }
  std::string text{std::istreambuf_iterator<char>(in),
                   std::istreambuf_iterator<char>()};
  if (in.bad()) {
    std::cerr << "error: failed while reading '" << path << "'\n";
    return std::nullopt;
  }
  return text;
}

/// Parse JSON text; nullopt (with a message) when malformed.
std::optional<json> parse_json(const std::string& text) {
  json doc = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded()) {
    std::cerr << "error: config is not valid JSON\n";
    return std::nullopt;
  }
  return doc;
}

void print_diagnostics(const sounder::Diagnostics& diags) {
  for (const auto& e : diags.errors) {
    std::cerr << "error: " << e << "\n";
  }
  for (const auto& w : diags.warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

int do_validate(const std::string& config_path) {
  const auto text = read_file(config_path);
  if (!text) return kExitIo;
  const auto doc = parse_json(*text);
  if (!doc) return kExitValidation;
  const sounder::Diagnostics diags = sounder::validate_config(*doc);
  print_diagnostics(diags);
  if (!diags.ok()) {
    std::cerr << diags.errors.size() << " error(s), " << diags.warnings.size()
              << " warning(s)\n";
    return kExitValidation;
  }
  std::cout << "configuration ok";
  if (!diags.warnings.empty()) {
    std::cout << " (" << diags.warnings.size() << " warning(s))";
  }
  std::cout << "\n";
  return kExitOk;
}

int do_run(const std::string& config_path, std::optional<std::uint64_t> seed,
           const std::string& out_dir, std::optional<int> threads) {
  const auto text = read_file(config_path);
  if (!text) return kExitIo;
  auto doc = parse_json(*text);
  if (!doc) return kExitValidation;

  // Seed priority: --seed flag, then SOUNDER_SEED, then the config file.
  if (doc->is_object()) {
    if (seed) {
      (*doc)["seed"] = *seed;
    } else if (const char* env = std::getenv("SOUNDER_SEED")) {
      try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(env, &pos);
        if (pos != std::strlen(env)) throw std::invalid_argument(env);
        (*doc)["seed"] = v;
      } catch (const std::exception&) {
        std::cerr << "error: SOUNDER_SEED must be a nonnegative integer, "
                     "got '"
                  << env << "'\n";
        return kExitValidation;
      }
    }
    if (threads) (*doc)["threads"] = *threads;
  }

  const sounder::Diagnostics diags = sounder::validate_config(*doc);
  print_diagnostics(diags);
  if (!diags.ok()) return kExitValidation;

  sounder::ExperimentResult result;
  try {
    const sounder::ExperimentConfig cfg = sounder::load_config(*doc);
    result = sounder::run_experiment(cfg);
  } catch (const sounder::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const sounder::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }

  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (!fs::is_directory(out_dir)) {
    std::cerr << "error: cannot create output directory '" << out_dir
              << "'\n";
    return kExitIo;
  }
  for (const auto& f : result.files) {
    const fs::path path = fs::path(out_dir) / f.name;
    std::ofstream os(path, std::ios::binary);
    if (!os) {
      std::cerr << "error: cannot open '" << path.string()
                << "' for writing\n";
      return kExitIo;
    }
    os.write(f.content.data(),
             static_cast<std::streamsize>(f.content.size()));
    os.close();
    if (!os) {
      std::cerr << "error: failed writing '" << path.string() << "'\n";
      return kExitIo;
    }
    std::cout << path.string() << "\n";
  }
  return kExitOk;
}

int do_list() {
  for (const auto& [name, blurb] : sounder::list_experiments()) {
    std::printf("%-16s %s\n", name.c_str(), blurb.c_str());
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Switched-array channel sounder phase-noise analysis toolkit"};
  app.set_version_flag("--version", std::string(sounder::kToolkitVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;

  CLI::App* run = app.add_subcommand(
      "run", "Run an experiment from a JSON config and write its outputs");
  run->add_option("--config", config_path, "Path to the JSON config file")
      ->required();
  run->add_option("--seed", seed,
                  "Override the seed (beats SOUNDER_SEED and the config)");
  run->add_option("--out", out_dir,
                  "Output directory (created if missing; default '.')");
  run->add_option("--threads", threads, "Override the worker thread count")
      ->check(CLI::Range(1, 256));

  CLI::App* validate = app.add_subcommand(
      "validate",
      "Check a JSON config and report every problem without running");
  validate->add_option("--config", config_path, "Path to the JSON config file")
      ->required();

  app.add_subcommand("list-experiments",
                     "List available experiments with one-line descriptions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitValidation;
  }

  if (run->parsed()) return do_run(config_path, seed, out_dir, threads);
  if (validate->parsed()) return do_validate(config_path);
  return do_list();
}
