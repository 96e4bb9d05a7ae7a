#include <iostream>

#include <CLI11.hpp>

#include "ctrtab/cli/app.hpp"

namespace ctrtab::cli {

int main_entry(int argc, char** argv) {
  CLI::App app{"ctrtab: condition-controlled diffusion for tabular data"};
  app.require_subcommand(1);
  Invocation inv;
  std::string stage;
  std::uint64_t seed = 0;

  for (const char* name : {"gen", "train", "sample", "eval", "verify", "ablate"}) {
    auto* sub = app.add_subcommand(name);
    sub->add_option("--config", inv.config, "JSON config file")->required();
    sub->add_option("--out", inv.out, "output directory")->capture_default_str();
    sub->add_option("--seed", seed, "global seed, overrides the config");
    if (std::string_view(name) == "train")
      sub->add_option("--stage", stage, "denoiser | control | joint")
          ->check(CLI::IsMember({"denoiser", "control", "joint"}));
    sub->callback([&inv, name] { inv.command = name; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? exit_ok : exit_config;
  }
  if (!stage.empty()) inv.stage = stage;
  for (const auto* sub : app.get_subcommands())
    if (sub->count("--seed")) inv.seed = seed;
  return run(inv, std::cout, std::cerr);
}

}  // namespace ctrtab::cli
