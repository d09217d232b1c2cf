// Command-line front end: five experiments over the thermal-machine library,
// configured by flat key = value files with --set overrides.
//
// Exit codes: 0 success, 1 configuration error, 2 numerical failure.

#include "qtm/experiments.hpp"

#include "CLI11.hpp"

#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

struct Options {
  std::string config_path;
  std::string out_path;
  std::optional<int> threads;
  std::vector<std::string> overrides;
};

void add_common_options(CLI::App* sub, Options& opt) {
  sub->add_option("--config", opt.config_path, "key = value configuration file");
  sub->add_option("--out", opt.out_path, "output file path");
  sub->add_option("--threads", opt.threads,
                  "worker threads (0 = auto; env QTM_THREADS is the fallback)");
  sub->add_option("--set", opt.overrides, "override a config key, e.g. --set gamma=0.1")
      ->take_all();
}

qtm::KeyValueConfig load_config(const Options& opt) {
  qtm::KeyValueConfig kv;
  if (!opt.config_path.empty()) kv = qtm::KeyValueConfig::parse_file(opt.config_path);
  for (const auto& s : opt.overrides) {
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw qtm::ConfigError("--set expects key=value, got: " + s);
    kv.set(qtm::detail::trim(s.substr(0, eq)), qtm::detail::trim(s.substr(eq + 1)));
  }
  return kv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"autonomous-thermal-machine entanglement engine"};
  app.require_subcommand(1);

  Options opt;
  struct Experiment {
    const char* name;
    const char* help;
    const char* default_out;
    qtm::ExperimentResult (*run)(qtm::KeyValueConfig, const std::string&, int);
  };
  const std::vector<Experiment> experiments = {
      {"evolve", "time evolution from the ground state (CSV)", "evolve.csv", qtm::run_evolve},
      {"sweep", "steady-state grid over chemical potential and interaction (CSV)", "sweep.csv",
       qtm::run_sweep},
      {"wstate", "W-state generation check for the (2n-1)-qubit machine (JSON)", "wstate.json",
       qtm::run_wstate},
      {"darkcheck", "dark-state and zero-current verification (JSON)", "darkcheck.json",
       qtm::run_darkcheck},
      {"limits", "approach to the ideal limit along mu = s*mu0, U = s^2*U0 (CSV)", "limits.csv",
       qtm::run_limits},
  };
  for (const auto& e : experiments) add_common_options(app.add_subcommand(e.name, e.help), opt);

  CLI11_PARSE(app, argc, argv);

  try {
    const qtm::KeyValueConfig kv = load_config(opt);
    const int threads = qtm::resolve_threads(opt.threads, kv);
    qtm::ExperimentResult result;
    for (const auto& e : experiments) {
      if (app.got_subcommand(e.name)) {
        const std::string out = opt.out_path.empty() ? e.default_out : opt.out_path;
        result = e.run(kv, out, threads);
        break;
      }
    }
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
    std::cerr << "wrote " << result.output_path << "\n";
    return result.exit_code;
  } catch (const qtm::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const qtm::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
