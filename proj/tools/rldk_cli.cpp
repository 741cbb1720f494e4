// rldk: data generation, training, rollout, LQR and baseline comparison.
#include <cstdio>
#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "rldk/commands.hpp"
#include "rldk/errors.hpp"
#include "rldk/run_config.hpp"

namespace {

std::string flag_name(std::string key) {
  for (char& c : key) {
    if (c == '_') c = '-';
  }
  return "--" + key;
}

}  // namespace

int main(int argc, char** argv) {
  using namespace rldk;
  const RunConfig defaults;

  CLI::App app{"Recursive deep-Koopman identification and LQR control of a pendulum"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key = value file; command-line flags override it");

  // Every configuration key is also a flag; values given on the command line
  // are applied after the config file.
  std::map<std::string, std::string> values;
  std::map<std::string, bool> switches;
  std::map<std::string, CLI::Option*> options;
  for (const ConfigKey& key : config_keys()) {
    const std::string def = get_config_value(defaults, key.name);
    CLI::Option* opt = nullptr;
    if (key.is_flag) {
      opt = app.add_flag(flag_name(key.name) + "{true}", switches[key.name], key.description);
    } else {
      opt = app.add_option(flag_name(key.name), values[key.name], key.description);
    }
    opt->default_str(def);
    options[key.name] = opt;
  }

  struct Command {
    const char* name;
    const char* help;
    void (*run)(const RunConfig&);
  };
  const Command commands[] = {
      {"datagen", "Simulate the noisy controlled pendulum and write the dataset CSV",
       [](const RunConfig& c) { cmd_datagen(c, std::cout); }},
      {"train", "Train the lifting (variant rldk or autoencoder); write model JSON and report",
       [](const RunConfig& c) { cmd_train(c, std::cout); }},
      {"rollout", "Self-propagate the model from x0 and write rollout.csv",
       [](const RunConfig& c) { cmd_rollout(c, std::cout); }},
      {"lqr", "Compute the LQR gain, regulate the true pendulum and write lqr.csv",
       [](const RunConfig& c) { cmd_lqr(c, std::cout); }},
      {"compare", "Evaluate the rldk and autoencoder models on the test split",
       [](const RunConfig& c) { cmd_compare(c, std::cout); }},
  };
  for (const Command& c : commands) app.add_subcommand(c.name, c.help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    RunConfig cfg;
    if (!config_path.empty()) load_config_file(cfg, config_path);
    for (const ConfigKey& key : config_keys()) {
      if (options[key.name]->count() == 0) continue;
      set_config_value(cfg, key.name,
                       key.is_flag ? (switches[key.name] ? "true" : "false") : values[key.name]);
    }
    for (const Command& c : commands) {
      if (app.got_subcommand(c.name)) c.run(cfg);
    }
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << "\n";
    return 4;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
