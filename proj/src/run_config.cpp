#include "rldk/run_config.hpp"

#include <functional>
#include <type_traits>

#include "rldk/csv.hpp"
#include "rldk/errors.hpp"

namespace rldk {

std::filesystem::path RunConfig::dataset_file() const {
  return dataset_path.empty() ? out / "dataset.csv" : std::filesystem::path(dataset_path);
}

std::filesystem::path RunConfig::model_file() const {
  return model_path.empty() ? out / ("model_" + std::string(to_string(training.variant)) + ".json")
                            : std::filesystem::path(model_path);
}

std::filesystem::path RunConfig::baseline_model_file() const {
  return baseline_model_path.empty() ? out / "model_autoencoder.json"
                                     : std::filesystem::path(baseline_model_path);
}

std::vector<double> parse_vector(std::string_view text) {
  std::vector<double> out;
  text = trim(text);
  if (text.empty()) return out;
  for (auto f : split_fields(text, ',')) out.push_back(parse_double(f));
  return out;
}

namespace {

double to_double(std::string_view key, std::string_view v) {
  try {
    return parse_double(v);
  } catch (const ParseError&) {
    throw ConfigError("'" + std::string(key) + "' expects a number, got '" + std::string(v) + "'");
  }
}

long long to_integer(std::string_view key, std::string_view v) {
  try {
    return parse_integer(v);
  } catch (const ParseError&) {
    throw ConfigError("'" + std::string(key) + "' expects an integer, got '" + std::string(v) + "'");
  }
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError("'" + std::string(key) + "' expects true/false, got '" + std::string(v) + "'");
}

std::string from_bool(bool b) { return b ? "true" : "false"; }

std::string join(const std::vector<Eigen::Index>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

struct Entry {
  ConfigKey key;
  std::function<void(RunConfig&, std::string_view)> set;
  std::function<std::string(const RunConfig&)> get;
};

// Field accessors are generic lambdas `[](auto& c) -> auto& { ... }` so one
// accessor serves both the setter and the const getter.
template <typename Field>
Entry number(const char* name, const char* desc, Field field) {
  return {{name, desc},
          [=](RunConfig& c, std::string_view v) { field(c) = to_double(name, v); },
          [=](const RunConfig& c) { return format_double(field(c)); }};
}

template <typename Field>
Entry integer(const char* name, const char* desc, Field field) {
  return {{name, desc},
          [=](RunConfig& c, std::string_view v) {
            const auto x = to_integer(name, v);
            if (x < 0) throw ConfigError(std::string("'") + name + "' must be non-negative");
            field(c) = static_cast<std::remove_reference_t<decltype(field(c))>>(x);
          },
          [=](const RunConfig& c) { return std::to_string(field(c)); }};
}

template <typename Field>
Entry boolean(const char* name, const char* desc, Field field) {
  return {{name, desc, true},
          [=](RunConfig& c, std::string_view v) { field(c) = to_bool(name, v); },
          [=](const RunConfig& c) { return from_bool(field(c)); }};
}

template <typename Field>
Entry text(const char* name, const char* desc, Field field) {
  return {{name, desc},
          [=](RunConfig& c, std::string_view v) { field(c) = std::string(v); },
          [=](const RunConfig& c) { return std::string(field(c)); }};
}

const std::vector<Entry>& entries() {
  static const std::vector<Entry> table = {
      Entry{{"seed", "seed for data generation, initialisation and batching"},
            [](RunConfig& c, std::string_view v) {
              const auto s = static_cast<std::uint64_t>(to_integer("seed", v));
              c.dataset.seed = s;
              c.training.seed = s;
            },
            [](const RunConfig& c) { return std::to_string(c.dataset.seed); }},
      Entry{{"out", "output directory"},
            [](RunConfig& c, std::string_view v) { c.out = std::string(v); },
            [](const RunConfig& c) { return c.out.string(); }},
      text("dataset", "dataset CSV path (default <out>/dataset.csv)", [](auto& c) -> auto& { return c.dataset_path; }),
      text("model", "model JSON path (default <out>/model_<variant>.json)", [](auto& c) -> auto& { return c.model_path; }),
      text("baseline_model", "autoencoder model for compare (default <out>/model_autoencoder.json)", [](auto& c) -> auto& { return c.baseline_model_path; }),
      integer("n_ic", "number of random initial conditions", [](auto& c) -> auto& { return c.dataset.n_ic; }),
      number("t_final", "duration of each training trajectory [s]", [](auto& c) -> auto& { return c.dataset.t_final; }),
      number("dt", "integration and sampling step [s]", [](auto& c) -> auto& { return c.dataset.dt; }),
      number("noise_std", "std of Gaussian noise added to each state", [](auto& c) -> auto& { return c.dataset.noise_std; }),
      number("ic_range", "initial states drawn uniform on [-ic_range, ic_range]", [](auto& c) -> auto& { return c.dataset.ic_range; }),
      Entry{{"bang_bang", "excite with u in {-1, +1} instead of uniform(-1, 1)", true},
            [](RunConfig& c, std::string_view v) {
              c.dataset.excitation = to_bool("bang_bang", v) ? Excitation::bang_bang : Excitation::uniform;
            },
            [](const RunConfig& c) { return from_bool(c.dataset.excitation == Excitation::bang_bang); }},
      number("gravity", "pendulum gravity g [m/s^2]", [](auto& c) -> auto& { return c.dataset.params.gravity; }),
      number("length", "pendulum length l [m]", [](auto& c) -> auto& { return c.dataset.params.length; }),
      integer("threads", "datagen worker threads (0 = all cores)", [](auto& c) -> auto& { return c.dataset.threads; }),
      Entry{{"variant", "training variant: rldk or autoencoder"},
            [](RunConfig& c, std::string_view v) { c.training.variant = variant_from_string(v); },
            [](const RunConfig& c) { return std::string(to_string(c.training.variant)); }},
      integer("epochs", "training epochs", [](auto& c) -> auto& { return c.training.epochs; }),
      integer("batch_size", "trajectories per batch", [](auto& c) -> auto& { return c.training.batch_size; }),
      number("learning_rate", "Adam learning rate", [](auto& c) -> auto& { return c.training.learning_rate; }),
      Entry{{"hidden", "hidden layer widths, comma separated"},
            [](RunConfig& c, std::string_view v) {
              std::vector<Eigen::Index> dims;
              for (double d : parse_vector(v)) {
                if (d < 1 || d != static_cast<double>(static_cast<Eigen::Index>(d))) {
                  throw ConfigError("'hidden' expects positive integers");
                }
                dims.push_back(static_cast<Eigen::Index>(d));
              }
              c.training.hidden = dims;
            },
            [](const RunConfig& c) { return join(c.training.hidden); }},
      integer("lifted_dim", "number N of learned observables", [](auto& c) -> auto& { return c.training.lifted_dim; }),
      Entry{{"activation", "hidden activation: tanh, relu or identity"},
            [](RunConfig& c, std::string_view v) { c.training.activation = activation_from_string(v); },
            [](const RunConfig& c) { return std::string(to_string(c.training.activation)); }},
      number("rcond", "relative singular value cutoff of the least-squares solve", [](auto& c) -> auto& { return c.training.rcond; }),
      number("pred_weight", "autoencoder: weight of the prediction loss", [](auto& c) -> auto& { return c.training.pred_weight; }),
      number("recon_weight", "autoencoder: weight of the reconstruction loss", [](auto& c) -> auto& { return c.training.recon_weight; }),
      text("x0", "initial state 'theta,theta_dot' for rollout and lqr", [](auto& c) -> auto& { return c.x0; }),
      integer("horizon", "rollout steps", [](auto& c) -> auto& { return c.horizon; }),
      text("u_policy", "rollout input: zero, const:<value>, random or bang_bang", [](auto& c) -> auto& { return c.u_policy; }),
      boolean("rollout_correct", "re-lift the extracted state every rollout step", [](auto& c) -> auto& { return c.rollout_correct; }),
      number("lqr_t_final", "closed-loop simulation length [s]", [](auto& c) -> auto& { return c.lqr_t_final; }),
      number("q_scale", "scale of the state block of Q", [](auto& c) -> auto& { return c.q_scale; }),
      number("r_scale", "scale of R", [](auto& c) -> auto& { return c.r_scale; }),
      number("u_clamp", "actuator bound |u| <= u_clamp in closed loop", [](auto& c) -> auto& { return c.u_clamp; }),
      boolean("lqr_reference_offset", "regulate phi(x) - phi(0) rather than phi(x)", [](auto& c) -> auto& { return c.lqr_reference_offset; }),
      integer("compare_horizon", "rollout steps evaluated by compare", [](auto& c) -> auto& { return c.compare_horizon; }),
      boolean("svg", "also render SVG line plots next to CSV traces", [](auto& c) -> auto& { return c.svg; }),
  };
  return table;
}

const Entry& find_entry(std::string_view key) {
  for (const auto& e : entries()) {
    if (e.key.name == key) return e;
  }
  throw ConfigError("unknown config key '" + std::string(key) + "'");
}

}  // namespace

const std::vector<ConfigKey>& config_keys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> k;
    for (const auto& e : entries()) k.push_back(e.key);
    return k;
  }();
  return keys;
}

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  find_entry(key).set(cfg, trim(value));
}

std::string get_config_value(const RunConfig& cfg, std::string_view key) {
  return find_entry(key).get(cfg);
}

void apply_config_text(RunConfig& cfg, std::string_view text) {
  std::size_t pos = 0, line_no = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    try {
      set_config_value(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void load_config_file(RunConfig& cfg, const std::filesystem::path& path) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const IoError& e) {
    throw ConfigError(e.what());
  }
  apply_config_text(cfg, text);
}

}  // namespace rldk
