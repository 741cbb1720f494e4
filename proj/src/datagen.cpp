#include "rldk/datagen.hpp"

#include <algorithm>
#include <map>
#include <numeric>
#include <optional>
#include <sstream>
#include <thread>

#include "rldk/csv.hpp"
#include "rldk/errors.hpp"

namespace rldk {

bool DatasetConfig::operator==(const DatasetConfig& o) const {
  return n_ic == o.n_ic && t_final == o.t_final && dt == o.dt && noise_std == o.noise_std &&
         ic_range == o.ic_range && excitation == o.excitation &&
         params.gravity == o.params.gravity && params.length == o.params.length &&
         seed == o.seed;
}

Rng make_stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream), static_cast<std::uint32_t>(stream >> 32)};
  return Rng(seq);
}

const char* to_string(Excitation e) {
  return e == Excitation::uniform ? "uniform" : "bang_bang";
}

Excitation excitation_from_string(std::string_view name) {
  if (name == "uniform") return Excitation::uniform;
  if (name == "bang_bang" || name == "bang-bang") return Excitation::bang_bang;
  throw ConfigError("unknown excitation '" + std::string(name) + "'");
}

Eigen::Vector2d random_initial_condition(Rng& rng, double ic_range, double noise_std) {
  std::uniform_real_distribution<double> uniform(-ic_range, ic_range);
  Eigen::Vector2d x;
  x(0) = uniform(rng);
  x(1) = uniform(rng);
  if (noise_std > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std);
    x(0) += noise(rng);
    x(1) += noise(rng);
  }
  return x;
}

namespace {

// Integrates one step, injects noise and records the pair. Input drawing is
// left to the caller so both trajectory generators share this core.
template <typename InputAt>
Trajectory run_noisy(const Eigen::Vector2d& x0, Eigen::Index steps, double dt, double noise_std,
                     Rng& rng, const PendulumParams& params, InputAt&& input_at) {
  if (!(dt > 0.0)) throw DomainError("generate_trajectory: dt must be positive");
  if (noise_std < 0.0) throw DomainError("generate_trajectory: noise_std must be >= 0");
  const DerivFn f = pendulum_rhs(params);
  std::normal_distribution<double> noise(0.0, noise_std > 0.0 ? noise_std : 1.0);

  Trajectory traj;
  traj.dt = dt;
  traj.states_x.resize(2, steps);
  traj.states_y.resize(2, steps);
  traj.inputs.resize(1, steps);

  Eigen::VectorXd x = x0;
  Eigen::VectorXd u(1);
  for (Eigen::Index k = 0; k < steps; ++k) {
    u(0) = input_at(k);
    traj.states_x.col(k) = x;
    traj.inputs.col(k) = u;
    Eigen::VectorXd next = rk4_step(f, static_cast<double>(k) * dt, x, u, dt);
    if (noise_std > 0.0) {
      next(0) += noise(rng);
      next(1) += noise(rng);
    }
    if (!(next.norm() <= 1e6)) {
      throw DivergenceError("generate_trajectory: state diverged at step " + std::to_string(k));
    }
    traj.states_y.col(k) = next;
    x = std::move(next);
  }
  return traj;
}

}  // namespace

Trajectory generate_trajectory(const Eigen::Vector2d& x0, double t_final, double dt,
                               double noise_std, Rng& rng, const PendulumParams& params,
                               Excitation excitation) {
  const auto steps = static_cast<Eigen::Index>(step_count(t_final, dt));
  std::uniform_real_distribution<double> uniform(-1.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  return run_noisy(x0, steps, dt, noise_std, rng, params, [&](Eigen::Index) {
    return excitation == Excitation::uniform ? uniform(rng) : (coin(rng) ? 1.0 : -1.0);
  });
}

Trajectory generate_trajectory(const Eigen::Vector2d& x0, const Eigen::MatrixXd& inputs,
                               double dt, double noise_std, Rng& rng,
                               const PendulumParams& params) {
  if (inputs.rows() != 1) throw ShapeError("generate_trajectory: pendulum takes one input");
  return run_noisy(x0, inputs.cols(), dt, noise_std, rng, params,
                   [&](Eigen::Index k) { return inputs(0, k); });
}

SplitSizes split_sizes(std::size_t n_ic) {
  const std::size_t validation = n_ic / 10;
  const std::size_t test = n_ic / 10;
  return {n_ic - validation - test, validation, test};
}

Dataset build_dataset(const DatasetConfig& config) {
  if (config.n_ic < 10) throw ConfigError("build_dataset: n_ic must be at least 10");
  config.params.validate();
  step_count(config.t_final, config.dt);

  std::vector<Trajectory> all(config.n_ic);
  const auto generate_one = [&](std::size_t i) {
    Rng rng = make_stream_rng(config.seed, i);
    const Eigen::Vector2d x0 = random_initial_condition(rng, config.ic_range, config.noise_std);
    all[i] = generate_trajectory(x0, config.t_final, config.dt, config.noise_std, rng,
                                 config.params, config.excitation);
    all[i].id = i;
  };

  unsigned workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(config.n_ic)));
  if (workers == 1) {
    for (std::size_t i = 0; i < config.n_ic; ++i) generate_one(i);
  } else {
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        try {
          for (std::size_t i = w; i < config.n_ic; i += workers) generate_one(i);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
    }
    for (auto& t : pool) t.join();
    for (auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  // Stream id n_ic is never used by a trajectory.
  std::vector<std::size_t> order(config.n_ic);
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng = make_stream_rng(config.seed, config.n_ic);
  std::shuffle(order.begin(), order.end(), split_rng);

  const SplitSizes sizes = split_sizes(config.n_ic);
  const auto take = [&](std::size_t begin, std::size_t count) {
    std::vector<std::size_t> ids(order.begin() + static_cast<std::ptrdiff_t>(begin),
                                 order.begin() + static_cast<std::ptrdiff_t>(begin + count));
    std::sort(ids.begin(), ids.end());
    std::vector<Trajectory> out;
    out.reserve(count);
    for (auto id : ids) out.push_back(std::move(all[id]));
    return out;
  };

  Dataset ds;
  ds.config = config;
  ds.train = take(0, sizes.train);
  ds.validation = take(sizes.train, sizes.validation);
  ds.test = take(sizes.train + sizes.validation, sizes.test);
  return ds;
}

SnapshotSet snapshot_matrices(const std::vector<Trajectory>& trajs) {
  if (trajs.empty()) throw DomainError("snapshot_matrices: no trajectories");
  const double dt = trajs.front().dt;
  const Eigen::Index n = trajs.front().states_x.rows();
  const Eigen::Index p = trajs.front().inputs.rows();
  Eigen::Index total = 0;
  for (const auto& t : trajs) {
    if (std::abs(t.dt - dt) > 1e-12 * std::abs(dt)) {
      throw DomainError("snapshot_matrices: trajectories have different dt");
    }
    if (t.states_x.rows() != n || t.states_y.rows() != n || t.inputs.rows() != p ||
        t.states_y.cols() != t.size() || t.inputs.cols() != t.size()) {
      throw ShapeError("snapshot_matrices: inconsistent trajectory shapes");
    }
    total += t.size();
  }
  SnapshotSet s{Eigen::MatrixXd(n, total), Eigen::MatrixXd(n, total), Eigen::MatrixXd(p, total)};
  Eigen::Index offset = 0;
  for (const auto& t : trajs) {
    s.X.middleCols(offset, t.size()) = t.states_x;
    s.Xp.middleCols(offset, t.size()) = t.states_y;
    s.U.middleCols(offset, t.size()) = t.inputs;
    offset += t.size();
  }
  return s;
}

// ---------------------------------------------------------------------------
// CSV persistence
//
//   # rldk-dataset dt=0.01 t_final=2 ... train=0;2;5 validation=1 test=3
//   traj_id,k,x1,x2,u,y1,y2
//   0,0,...

namespace {

std::string join_ids(const std::vector<Trajectory>& trajs) {
  std::string out;
  for (std::size_t i = 0; i < trajs.size(); ++i) {
    if (i) out += ';';
    out += std::to_string(trajs[i].id);
  }
  return out;
}

std::vector<std::string> column_names(const std::string& prefix, Eigen::Index count) {
  std::vector<std::string> names;
  if (count == 1 && prefix == "u") return {"u"};
  for (Eigen::Index i = 1; i <= count; ++i) names.push_back(prefix + std::to_string(i));
  return names;
}

}  // namespace

std::string serialize_dataset(const Dataset& ds) {
  const auto& c = ds.config;
  std::ostringstream os;
  os << "# rldk-dataset"
     << " dt=" << format_double(c.dt) << " t_final=" << format_double(c.t_final)
     << " noise_std=" << format_double(c.noise_std) << " seed=" << c.seed
     << " n_ic=" << c.n_ic << " ic_range=" << format_double(c.ic_range)
     << " excitation=" << to_string(c.excitation)
     << " gravity=" << format_double(c.params.gravity)
     << " length=" << format_double(c.params.length) << " train=" << join_ids(ds.train)
     << " validation=" << join_ids(ds.validation) << " test=" << join_ids(ds.test) << '\n';

  std::vector<const Trajectory*> ordered;
  for (const auto* split : {&ds.train, &ds.validation, &ds.test}) {
    for (const auto& t : *split) ordered.push_back(&t);
  }
  if (ordered.empty()) throw DomainError("save_dataset: dataset has no trajectories");
  std::sort(ordered.begin(), ordered.end(),
            [](const Trajectory* a, const Trajectory* b) { return a->id < b->id; });

  const Eigen::Index n = ordered.front()->states_x.rows();
  const Eigen::Index p = ordered.front()->inputs.rows();
  std::vector<std::string> header{"traj_id", "k"};
  for (auto& s : column_names("x", n)) header.push_back(s);
  for (auto& s : column_names("u", p)) header.push_back(s);
  for (auto& s : column_names("y", n)) header.push_back(s);
  for (std::size_t i = 0; i < header.size(); ++i) os << (i ? "," : "") << header[i];
  os << '\n';

  for (const auto* t : ordered) {
    for (Eigen::Index k = 0; k < t->size(); ++k) {
      os << t->id << ',' << k;
      for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(t->states_x(i, k));
      for (Eigen::Index i = 0; i < p; ++i) os << ',' << format_double(t->inputs(i, k));
      for (Eigen::Index i = 0; i < n; ++i) os << ',' << format_double(t->states_y(i, k));
      os << '\n';
    }
  }
  return os.str();
}

void save_dataset(const Dataset& ds, const std::filesystem::path& path) {
  write_text_file(path, serialize_dataset(ds));
}

Dataset parse_dataset(std::string_view text) {
  std::size_t pos = 0;
  std::size_t line_no = 0;
  const auto next_line = [&]() -> std::optional<std::string_view> {
    while (pos < text.size()) {
      auto end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      const auto line = trim(text.substr(pos, end - pos));
      pos = end + 1;
      ++line_no;
      if (!line.empty()) return line;
    }
    return std::nullopt;
  };

  // Header line.
  const auto first = next_line();
  if (!first || first->rfind("# rldk-dataset", 0) != 0) {
    throw ParseError("missing '# rldk-dataset' header", line_no ? line_no : 1);
  }
  const std::size_t header_line = line_no;
  std::map<std::string, std::string, std::less<>> kv;
  {
    std::istringstream is{std::string(first->substr(std::string_view("# rldk-dataset").size()))};
    std::string token;
    while (is >> token) {
      const auto eq = token.find('=');
      if (eq == std::string::npos) throw ParseError("bad header token '" + token + "'", header_line);
      kv[token.substr(0, eq)] = token.substr(eq + 1);
    }
  }
  const auto need = [&](const char* key) -> const std::string& {
    auto it = kv.find(key);
    if (it == kv.end()) throw ParseError(std::string("header missing '") + key + "'", header_line);
    return it->second;
  };

  Dataset ds;
  auto& c = ds.config;
  c.dt = parse_double(need("dt"), header_line);
  c.t_final = parse_double(need("t_final"), header_line);
  c.noise_std = parse_double(need("noise_std"), header_line);
  c.seed = static_cast<std::uint64_t>(std::stoull(need("seed")));
  c.n_ic = static_cast<std::size_t>(parse_integer(need("n_ic"), header_line));
  c.ic_range = parse_double(need("ic_range"), header_line);
  c.excitation = excitation_from_string(need("excitation"));
  c.params.gravity = parse_double(need("gravity"), header_line);
  c.params.length = parse_double(need("length"), header_line);
  if (!(c.dt > 0.0) || !(c.t_final > 0.0)) throw ParseError("header dt/t_final must be positive", header_line);
  const auto expected_steps = static_cast<Eigen::Index>(step_count(c.t_final, c.dt));

  std::map<std::size_t, int> membership;  // id -> split index
  const char* split_keys[] = {"train", "validation", "test"};
  for (int s = 0; s < 3; ++s) {
    const auto& ids = need(split_keys[s]);
    if (ids.empty()) continue;
    for (auto field : split_fields(ids, ';')) {
      const auto id = static_cast<std::size_t>(parse_integer(field, header_line));
      if (!membership.emplace(id, s).second) {
        throw ParseError("trajectory " + std::to_string(id) + " assigned to two splits", header_line);
      }
    }
  }

  // Column header.
  const auto cols_line = next_line();
  if (!cols_line) throw ParseError("missing column header", line_no + 1);
  const auto cols = split_fields(*cols_line);
  Eigen::Index n = 0, p = 0;
  for (auto col : cols) {
    if (col.size() >= 2 && col[0] == 'x') ++n;
    if (col[0] == 'u') ++p;
  }
  {
    std::vector<std::string> expect{"traj_id", "k"};
    for (auto& s : column_names("x", n)) expect.push_back(s);
    for (auto& s : column_names("u", p)) expect.push_back(s);
    for (auto& s : column_names("y", n)) expect.push_back(s);
    if (n == 0 || p == 0 || expect.size() != cols.size() ||
        !std::equal(expect.begin(), expect.end(), cols.begin())) {
      throw ParseError("unexpected column header", line_no);
    }
  }

  struct Rows {
    std::vector<double> x, u, y;
    std::size_t first_line = 0;
  };
  std::map<std::size_t, Rows> rows;
  while (auto line = next_line()) {
    const auto fields = split_fields(*line);
    if (fields.size() != cols.size()) {
      throw ParseError("expected " + std::to_string(cols.size()) + " fields", line_no);
    }
    const auto id = parse_integer(fields[0], line_no);
    const auto k = parse_integer(fields[1], line_no);
    if (id < 0 || k < 0) throw ParseError("negative traj_id or k", line_no);
    auto& r = rows[static_cast<std::size_t>(id)];
    if (r.u.empty()) r.first_line = line_no;
    if (static_cast<std::size_t>(k) != r.u.size() / static_cast<std::size_t>(p)) {
      throw ParseError("non-contiguous k for trajectory " + std::to_string(id), line_no);
    }
    std::size_t f = 2;
    for (Eigen::Index i = 0; i < n; ++i) r.x.push_back(parse_double(fields[f++], line_no));
    for (Eigen::Index i = 0; i < p; ++i) r.u.push_back(parse_double(fields[f++], line_no));
    for (Eigen::Index i = 0; i < n; ++i) r.y.push_back(parse_double(fields[f++], line_no));
  }
  if (rows.empty()) throw ParseError("dataset contains no transitions", line_no);

  std::vector<Trajectory>* splits[] = {&ds.train, &ds.validation, &ds.test};
  for (auto& [id, r] : rows) {
    const auto m = static_cast<Eigen::Index>(r.u.size()) / p;
    if (m != expected_steps) {
      throw ParseError("trajectory " + std::to_string(id) + " has " + std::to_string(m) +
                           " rows but header dt/t_final imply " + std::to_string(expected_steps),
                       r.first_line);
    }
    Trajectory t;
    t.id = id;
    t.dt = c.dt;
    t.states_x = Eigen::Map<Eigen::MatrixXd>(r.x.data(), n, m);
    t.inputs = Eigen::Map<Eigen::MatrixXd>(r.u.data(), p, m);
    t.states_y = Eigen::Map<Eigen::MatrixXd>(r.y.data(), n, m);
    for (Eigen::Index k = 0; k + 1 < m; ++k) {
      if (t.states_y.col(k) != t.states_x.col(k + 1)) {
        throw ParseError("trajectory " + std::to_string(id) + ": y at k=" + std::to_string(k) +
                             " does not match x at k+1",
                         r.first_line + static_cast<std::size_t>(k) + 1);
      }
    }
    const auto it = membership.find(id);
    if (it == membership.end()) {
      throw ParseError("trajectory " + std::to_string(id) + " not assigned to a split", r.first_line);
    }
    splits[it->second]->push_back(std::move(t));
    membership.erase(it);
  }
  if (!membership.empty()) {
    throw ParseError("split lists trajectory " + std::to_string(membership.begin()->first) +
                         " that has no rows",
                     header_line);
  }
  return ds;
}

Dataset load_dataset(const std::filesystem::path& path) { return parse_dataset(read_text_file(path)); }

}  // namespace rldk
