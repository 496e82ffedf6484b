#include "cli.hpp"

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "strata/config.hpp"
#include "strata/runner.hpp"

namespace strata {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitInvalid = 2;
constexpr int kExitDegenerate = 3;

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateWeights: return kExitDegenerate;
    case ErrorCode::InfiniteScore: return kExitFailure;
    default: return kExitInvalid;
  }
}

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::vector<std::size_t> n;
  std::optional<double> delta;
  std::optional<double> xi;
  std::optional<std::size_t> trials;
  std::vector<int> levels;
  unsigned threads = 1;
  std::string out;
  std::string format = "csv";
};

void add_run_flags(CLI::App& cmd, Flags& f) {
  cmd.add_option("--config", f.config, "measure config (TOML)")->required();
  cmd.add_option("--seed", f.seed, "random seed (required here or in the config)");
  cmd.add_option("--n", f.n, "sequence lengths, comma separated")->delimiter(',');
  cmd.add_option("--delta", f.delta, "weak typicality tolerance (nats)");
  cmd.add_option("--xi", f.xi, "schedule exponent in (0, 1/2)");
  cmd.add_option("--trials", f.trials, "Monte Carlo trials (samples for entropy)");
  cmd.add_option("--levels", f.levels, "first,last dyadic level")->delimiter(',')->expected(2);
  cmd.add_option("--threads", f.threads, "worker threads")->check(CLI::Range(1u, 1024u));
  cmd.add_option("--out", f.out, "output file (default stdout)");
  cmd.add_option("--format", f.format, "csv or svg")->check(CLI::IsMember({"csv", "svg"}));
}

int write_output(const std::string& path, const std::string& text, std::ostream& out, std::ostream& err) {
  if (path.empty()) {
    out << text;
    return kExitOk;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file || !(file << text)) {
    err << "error: cannot write " << path << "\n";
    return kExitFailure;
  }
  return kExitOk;
}

int run_validate(const std::string& path, std::ostream& out) {
  const auto config = load_config(path);
  const auto diagnostics = validate_config(config);
  for (const auto& d : diagnostics) out << to_string(d.code) << ": " << d.message << "\n";
  if (!diagnostics.empty()) return kExitInvalid;
  out << "ok: " << config.components.size() << " component(s), ambient dimension " << config.ambient_dimension
      << "\n";
  return kExitOk;
}

int run_command(const std::string& name, const Flags& f, std::ostream& out, std::ostream& err) {
  const auto config = load_config(f.config);
  const auto diagnostics = validate_config(config);
  if (!diagnostics.empty()) {
    for (const auto& d : diagnostics) err << to_string(d.code) << ": " << d.message << "\n";
    return kExitInvalid;
  }
  ParameterOverrides o;
  o.seed = f.seed;
  if (!f.n.empty()) o.n = f.n;
  o.delta = f.delta;
  o.xi = f.xi;
  o.trials = f.trials;
  if (!f.levels.empty()) o.levels = f.levels;
  const auto params = resolve_parameters(config, o, f.threads);
  const auto result = run_experiment(name, config, params);

  std::ostringstream text;
  if (f.format == "svg") {
    if (result.plot.empty()) {
      err << "error: the " << name << " experiment has no plot; use --format csv\n";
      return kExitInvalid;
    }
    write_svg(text, result.plot_title, result.x_label, result.y_label, result.plot);
  } else if (!result.raw_csv.empty()) {
    text << result.raw_csv;
  } else {
    write_csv(text, result.rows);
  }
  return write_output(f.out, text.str(), out, err);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stratified-measure AEP laboratory"};
  app.require_subcommand(1);
  Flags flags;
  std::string validate_path;

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"entropy", "exact generalized entropy and its Monte Carlo estimate"},
      {"aep", "typical-set probability and volume versus n"},
      {"stratum", "volumes of sampled doubly typical strata"},
      {"dims", "information dimension and stratum-dimension concentration"},
      {"renyi", "quantized entropy plus defect term per dyadic level"},
      {"diagnose", "schedule, TV defect, tightness and adjacent-type diagnostics"},
      {"cells", "export exact dyadic cell tables"},
  };
  std::vector<CLI::App*> subs;
  for (const auto& [name, help] : commands) {
    auto* cmd = app.add_subcommand(name, help);
    add_run_flags(*cmd, flags);
    subs.push_back(cmd);
  }
  auto* validate = app.add_subcommand("validate", "list every violation in a config without running");
  validate->add_option("--config", validate_path, "measure config (TOML)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (validate->parsed()) return run_validate(validate_path, out);
    for (auto* cmd : subs) {
      if (cmd->parsed()) return run_command(cmd->get_name(), flags, out, err);
    }
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return exit_code(e.code());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}

}  // namespace strata
