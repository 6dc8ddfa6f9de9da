// Generates the synthetic coloured-sign dataset used by the desk-scale
// benchmark runs: five shape classes, directory-per-class PPM files.

#include <CLI11.hpp>
#include <cstdio>

#include "signbench/synthetic.hpp"

int main(int argc, char** argv) {
  CLI::App app{"synthetic sign dataset generator"};
  std::string out_dir;
  std::size_t per_class = 100;
  std::uint64_t seed = 1;
  app.add_option("--out", out_dir, "output dataset root")->required();
  app.add_option("--per-class", per_class, "images per class");
  app.add_option("--seed", seed, "generator seed");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    signbench::write_synthetic_dataset(out_dir, per_class, seed);
    std::printf("[signbench-synth] wrote 5x%zu images to %s\n", per_class, out_dir.c_str());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
