#include "rldk/model_io.hpp"

#include <json.hpp>

#include "rldk/csv.hpp"
#include "rldk/errors.hpp"

namespace rldk {

using nlohmann::json;

namespace {

json matrix_json(const Eigen::MatrixXd& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) data.push_back(m(i, j));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

Eigen::MatrixXd matrix_from(const json& j, const char* what) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (rows < 0 || cols < 0 || data.size() != static_cast<std::size_t>(rows * cols)) {
    throw ParseError(std::string("model: matrix '") + what + "' has inconsistent dimensions");
  }
  Eigen::MatrixXd m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i) {
    for (Eigen::Index j2 = 0; j2 < cols; ++j2) m(i, j2) = data[k++].get<double>();
  }
  return m;
}

json net_json(const Mlp& net) {
  json layers = json::array();
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    layers.push_back({{"weight", matrix_json(net.weight(l))}, {"bias", matrix_json(net.bias(l))}});
  }
  return {{"layer_dims", net.layer_dims()}, {"activation", to_string(net.activation())},
          {"layers", std::move(layers)}};
}

Mlp net_from(const json& j) {
  Mlp net(j.at("layer_dims").get<std::vector<Eigen::Index>>(),
          activation_from_string(j.at("activation").get<std::string>()));
  const auto& layers = j.at("layers");
  if (layers.size() != net.layer_count()) throw ParseError("model: layer count mismatch");
  for (std::size_t l = 0; l < net.layer_count(); ++l) {
    Eigen::MatrixXd w = matrix_from(layers[l].at("weight"), "weight");
    Eigen::MatrixXd b = matrix_from(layers[l].at("bias"), "bias");
    if (w.rows() != net.weight(l).rows() || w.cols() != net.weight(l).cols() ||
        b.rows() != net.bias(l).size() || b.cols() != 1) {
      throw ParseError("model: layer " + std::to_string(l) + " shape disagrees with layer_dims");
    }
    net.weight(l) = w;
    net.bias(l) = b.col(0);
  }
  return net;
}

}  // namespace

std::string model_to_json(const ModelFile& file) {
  const KoopmanModel& m = file.model;
  json j;
  j["format"] = "rldk-model";
  j["version"] = 1;
  j["variant"] = m.decoder ? "autoencoder" : "rldk";
  j["n"] = m.state_dim();
  j["N"] = m.net.output_dim();
  j["p"] = m.input_dim();
  j["dt"] = m.dt;
  j["net"] = net_json(m.net);
  if (m.decoder) j["decoder"] = net_json(*m.decoder);
  j["K"] = matrix_json(m.K);
  j["B"] = matrix_json(m.B);
  if (file.controller) {
    const auto& c = *file.controller;
    j["controller"] = {{"K_lqr", matrix_json(c.gain.K_lqr)},
                       {"riccati_solution", matrix_json(c.gain.riccati_solution)},
                       {"residual", c.gain.residual},
                       {"iterations", c.gain.iterations},
                       {"Q", matrix_json(c.weights.Q)},
                       {"R", matrix_json(c.weights.R)}};
  }
  return j.dump(1) + "\n";
}

ModelFile model_from_json(std::string_view text) {
  ModelFile file;
  try {
    const json j = json::parse(text);
    if (j.value("format", "") != "rldk-model") throw ParseError("model: not an rldk-model document");
    KoopmanModel& m = file.model;
    m.dt = j.at("dt").get<double>();
    m.net = net_from(j.at("net"));
    if (j.contains("decoder")) m.decoder = net_from(j.at("decoder"));
    m.K = matrix_from(j.at("K"), "K");
    m.B = matrix_from(j.at("B"), "B");
    m.validate();
    if (j.at("n").get<Eigen::Index>() != m.state_dim() || j.at("p").get<Eigen::Index>() != m.input_dim()) {
      throw ParseError("model: declared dimensions disagree with matrices");
    }
    if (j.contains("controller")) {
      const auto& c = j.at("controller");
      ControllerRecord rec;
      rec.gain.K_lqr = matrix_from(c.at("K_lqr"), "K_lqr");
      rec.gain.riccati_solution = matrix_from(c.at("riccati_solution"), "riccati_solution");
      rec.gain.residual = c.at("residual").get<double>();
      rec.gain.iterations = c.value("iterations", 0L);
      rec.weights.Q = matrix_from(c.at("Q"), "Q");
      rec.weights.R = matrix_from(c.at("R"), "R");
      file.controller = std::move(rec);
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("model: ") + e.what());
  } catch (const ShapeError& e) {
    throw ParseError(e.what());
  } catch (const DomainError& e) {
    throw ParseError(e.what());
  } catch (const ConfigError& e) {
    throw ParseError(e.what());
  }
  return file;
}

void save_model(const ModelFile& file, const std::filesystem::path& path) {
  write_text_file(path, model_to_json(file));
}

ModelFile load_model(const std::filesystem::path& path) { return model_from_json(read_text_file(path)); }

}  // namespace rldk
