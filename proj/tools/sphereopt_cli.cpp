#include <iostream>

#include <CLI11.hpp>

#include "sphereopt/cli.hpp"

int main(int argc, char** argv) {
  using namespace sphereopt;
  CLI::App app{"Maximize a homogeneous polynomial on the unit sphere with the symmetric SDP hierarchy"};
  RunConfig cfg;
  std::string poly, input, level, format = "json";
  int n = 0;
  auto* poly_opt = app.add_option("--poly", poly, "polynomial, e.g. \"x1^2 + 2*x2^2\" or JSON");
  auto* input_opt = app.add_option("--input", input, "file holding the polynomial (text or JSON)");
  poly_opt->excludes(input_opt);
  auto* n_opt = app.add_option("--n", n, "number of variables (default: highest index used)");
  auto* level_opt = app.add_option("--level", level, "level l or range lo..hi");
  app.add_option("--tol", cfg.tol, "solver tolerance")->capture_default_str();
  app.add_flag("--oracle", cfg.oracle, "also run the multistart sphere maximizer");
  app.add_option("--restarts", cfg.restarts, "oracle restarts")->capture_default_str();
  app.add_option("--seed", cfg.seed, "root seed")->capture_default_str();
  app.add_option("--format", format, "json or text")->check(CLI::IsMember({"json", "text"}))->capture_default_str();
  app.add_flag("--certificate", cfg.certificate, "include the SOS certificate");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitParse;
  }

  if (*poly_opt) cfg.poly = poly;
  if (*input_opt) cfg.input_path = input;
  if (*n_opt) cfg.n = n;
  if (*level_opt) {
    try {
      cfg.levels = parse_level_range(level);
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << "\n";
      return kExitParse;
    }
  }
  cfg.format = format == "text" ? OutputFormat::text : OutputFormat::json;
  try {
    return run(cfg, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitParse;
  }
}
