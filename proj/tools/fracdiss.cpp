#include "fracdiss/cli.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace fracdiss;

namespace {

struct Flags {
  std::string config;
  std::string out;
  int jobs = 1;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> overrides;
  std::string suite;
};

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config, "key-value config file")->check(CLI::ExistingFile);
  sub->add_option("--out", f.out, "output directory (overrides [run] out)");
  sub->add_option("--jobs", f.jobs, "worker threads for sweep entries")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "seed for randomized corpora (overrides [run] seed)");
  sub->add_option("--set", f.overrides, "section.key=value override, repeatable");
}

int execute(const std::string& kind, const Flags& f) {
  RawConfig raw;
  if (!f.config.empty()) raw = read_config_file(f.config);
  for (const auto& o : f.overrides) apply_override(raw, o);
  if (!f.suite.empty()) raw.sections["verify"]["suite"] = f.suite;
  RunConfig cfg = parse_config(raw, kind);
  if (!f.out.empty()) cfg.out = f.out;
  if (f.seed) {
    cfg.seed = *f.seed;
    cfg.snapshot["run.seed"] = std::to_string(*f.seed);
  }
  const auto rec = run(cfg, RunOptions{f.jobs});
  std::cout << rec.report << "\n";
  std::cout << "wrote " << rec.files.size() << " file(s) and manifest.json to " << cfg.out << "\n";
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fractional dissipative equations: kernels, Besov norms, mild solutions and checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(version));
  Flags flags;
  std::string chosen;
  for (const auto& kind : experiment_kinds()) {
    auto* sub = app.add_subcommand(kind, "run a " + kind + " experiment");
    add_common(sub, flags);
    if (kind == "verify") sub->add_option("--suite", flags.suite, "suite name")->check(CLI::IsMember(suite_names()));
    sub->callback([&chosen, kind] { chosen = kind; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  try {
    return execute(chosen, flags);
  } catch (const Error& e) {
    std::cerr << "fracdiss: " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "fracdiss: " << e.what() << "\n";
    return 2;
  }
}
