// wbflow --config run.json [--out dir] [--seed n]
//
// Runs one JSON-configured pipeline, writes CSV artifacts and manifest.json to
// the output directory and exits 0 iff every check in the manifest passed.
// Exit code 1 means a check failed, 2 an invalid configuration or solver error.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "wbflow/run.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Boundary-reservoir transport, JKO flows and diagnostics"};
  std::string config_path, out_dir;
  std::uint64_t seed = 0;
  app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  auto* out_opt = app.add_option("--out", out_dir, "output directory (overrides the config)");
  auto* seed_opt = app.add_option("--seed", seed, "seed for randomised checks (overrides the config)");
  CLI11_PARSE(app, argc, argv);

  try {
    std::ifstream in(config_path);
    const nlohmann::json config = nlohmann::json::parse(in);
    const wbflow::RunResult result =
        wbflow::run(config, *out_opt ? std::optional<std::string>(out_dir) : std::nullopt,
                    *seed_opt ? std::optional<std::uint64_t>(seed) : std::nullopt);
    const nlohmann::json& m = result.manifest;
    std::cout << m["command"].get<std::string>() << " (config " << m["config_hash"].get<std::string>() << ")\n";
    for (const auto& [name, value] : m["results"].items())
      if (!value.is_structured()) std::cout << "  " << name << " = " << value.dump() << "\n";
    for (const auto& [name, ok] : m["checks"].items())
      std::cout << "  check " << name << ": " << (ok.get<bool>() ? "pass" : "FAIL") << "\n";
    return result.passed() ? 0 : 1;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: malformed configuration: " << e.what() << "\n";
  } catch (const wbflow::solver_error& e) {
    std::cerr << "error: " << e.what() << " (residual " << e.residual() << ")\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
  }
  return 2;
}
