#include "coalsens/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "coalsens/subset.hpp"

namespace coalsens {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& message) { throw ConfigError(message); }

const json& require(const json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) fail(std::string("missing field '") + key + "' in " + where);
  return *it;
}

double require_number(const json& obj, const char* key, const char* where) {
  const json& v = require(obj, key, where);
  if (!v.is_number()) fail(std::string("field '") + key + "' in " + where + " must be a number");
  return v.get<double>();
}

std::vector<double> require_vector(const json& obj, const char* key, const char* where) {
  const json& v = require(obj, key, where);
  if (!v.is_array() || v.empty()) fail(std::string("field '") + key + "' in " + where + " must be a nonempty array");
  std::vector<double> out;
  for (const auto& e : v) {
    if (!e.is_number()) fail(std::string("field '") + key + "' in " + where + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Eigen::MatrixXd require_matrix(const json& obj, const char* key, const char* where) {
  const json& v = require(obj, key, where);
  if (!v.is_array() || v.empty()) fail(std::string("field '") + key + "' in " + where + " must be an array of rows");
  const std::size_t n = v.size();
  Eigen::MatrixXd m(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!v[i].is_array() || v[i].size() != n)
      fail(std::string("field '") + key + "' in " + where + " must be a square array of arrays");
    for (std::size_t j = 0; j < n; ++j) {
      if (!v[i][j].is_number()) fail(std::string("field '") + key + "' in " + where + " must hold numbers");
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v[i][j].get<double>();
    }
  }
  return m;
}

Model parse_model(const json& spec) {
  if (!spec.is_object()) fail("'model' must be an object");
  const json& name_field = require(spec, "name", "'model'");
  if (!name_field.is_string()) fail("'model.name' must be a string");
  const std::string name = name_field.get<std::string>();

  if (name == "ishigami") {
    const double a = spec.value("a", 7.0);
    const double b = spec.value("b", 0.1);
    return Model::ishigami(a, b);
  }
  if (name == "linear") {
    return Model::linear(require_vector(spec, "beta", "'model'"));
  }
  if (name == "sum_diff") {
    return Model::sum_diff();
  }
  if (name == "constant") {
    const int d = static_cast<int>(require_number(spec, "d", "'model'"));
    return Model::constant(d, require_number(spec, "value", "'model'"));
  }
  std::string known;
  for (const auto& n : Model::registry_names()) {
    if (!known.empty()) known += ", ";
    known += n;
  }
  fail("unknown model '" + name + "'; registered models: " + known);
}

Marginal parse_marginal(const json& spec, std::size_t index) {
  const std::string where = "'inputs.marginals[" + std::to_string(index) + "]'";
  if (!spec.is_object()) fail(where + " must be an object");
  const json& fam_field = require(spec, "family", where.c_str());
  if (!fam_field.is_string()) fail(where + ".family must be a string");
  const std::string family = fam_field.get<std::string>();
  try {
    if (family == "uniform")
      return Marginal::uniform(require_number(spec, "lower", where.c_str()),
                               require_number(spec, "upper", where.c_str()));
    if (family == "normal")
      return Marginal::normal(require_number(spec, "mean", where.c_str()),
                              require_number(spec, "std", where.c_str()));
    if (family == "triangular")
      return Marginal::triangular(require_number(spec, "lower", where.c_str()),
                                  require_number(spec, "mode", where.c_str()),
                                  require_number(spec, "upper", where.c_str()));
  } catch (const std::invalid_argument& e) {
    fail(where + ": " + e.what());
  }
  fail(where + ": unknown family '" + family + "' (uniform, normal, triangular)");
}

std::vector<Marginal> parse_marginals(const json& spec) {
  const json& arr = require(spec, "marginals", "'inputs'");
  if (!arr.is_array() || arr.empty()) fail("'inputs.marginals' must be a nonempty array");
  std::vector<Marginal> out;
  for (std::size_t i = 0; i < arr.size(); ++i) out.push_back(parse_marginal(arr[i], i));
  return out;
}

InputModel parse_inputs(const json& spec) {
  if (!spec.is_object()) fail("'inputs' must be an object");
  const json& type_field = require(spec, "type", "'inputs'");
  if (!type_field.is_string()) fail("'inputs.type' must be a string");
  const std::string type = type_field.get<std::string>();
  try {
    if (type == "independent") {
      return InputModel::independent(parse_marginals(spec));
    }
    if (type == "gaussian") {
      const Eigen::MatrixXd cov = require_matrix(spec, "cov", "'inputs'");
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(cov.rows());
      if (spec.contains("mean")) {
        const std::vector<double> m = require_vector(spec, "mean", "'inputs'");
        if (static_cast<Eigen::Index>(m.size()) != cov.rows())
          fail("'inputs.mean' length must match 'inputs.cov'");
        mean = Eigen::Map<const Eigen::VectorXd>(m.data(), static_cast<Eigen::Index>(m.size()));
      }
      return InputModel::gaussian(std::move(mean), cov);
    }
    if (type == "gaussian_copula") {
      std::vector<Marginal> marginals = parse_marginals(spec);
      const Eigen::MatrixXd corr = require_matrix(spec, "correlation", "'inputs'");
      if (static_cast<std::size_t>(corr.rows()) != marginals.size())
        fail("'inputs.correlation' size must match the marginal count");
      return InputModel::gaussian_copula(corr, std::move(marginals));
    }
  } catch (const std::invalid_argument& e) {
    fail(std::string("'inputs': ") + e.what());
  }
  fail("unknown inputs type '" + type + "' (independent, gaussian, gaussian_copula)");
}

QoISpec parse_qoi(const json& root, int output_dim) {
  const json& qoi_field = require(root, "qoi", "the config");
  if (!qoi_field.is_string()) fail("'qoi' must be a string");
  const std::string name = qoi_field.get<std::string>();

  QoISpec qoi;
  if (name == "variance") {
    qoi.kind = QoISpec::Kind::Variance;
    if (root.contains("coordinate")) {
      // 1-based in configs, matching the subset index convention.
      qoi.coordinate = static_cast<int>(require_number(root, "coordinate", "the config")) - 1;
    }
  } else if (name == "covariance") {
    qoi.kind = QoISpec::Kind::Covariance;
    const json& pair = require(root, "pair", "the config");
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number() || !pair[1].is_number())
      fail("'pair' must be an array of two 1-based output indices");
    qoi.pair_p = pair[0].get<int>() - 1;
    qoi.pair_q = pair[1].get<int>() - 1;
  } else if (name == "covariance_matrix") {
    qoi.kind = QoISpec::Kind::CovarianceMatrix;
  } else if (name == "mmd" || name == "mean_mmd") {
    qoi.kind = QoISpec::Kind::MeanMMD;
    if (root.contains("kernel")) {
      const json& kernel = root["kernel"];
      if (!kernel.is_object()) fail("'kernel' must be an object");
      if (kernel.contains("family")) {
        const json& fam = kernel["family"];
        if (!fam.is_string() || fam.get<std::string>() != "rbf")
          fail("'kernel.family' must be \"rbf\"");
      }
      if (kernel.contains("bandwidth")) {
        const json& bw = kernel["bandwidth"];
        if (bw.is_string()) {
          const std::string s = bw.get<std::string>();
          if (s != "median" && s != "median-heuristic")
            fail("'kernel.bandwidth' must be a positive number or \"median\"");
          qoi.kernel.bandwidth = 0.0;
        } else if (bw.is_number()) {
          qoi.kernel.bandwidth = bw.get<double>();
          if (qoi.kernel.bandwidth <= 0.0)
            fail("'kernel.bandwidth' must be a positive number or \"median\"");
        } else {
          fail("'kernel.bandwidth' must be a positive number or \"median\"");
        }
      }
    }
  } else {
    fail("unknown qoi '" + name +
         "' (variance, covariance, covariance_matrix, mmd)");
  }

  try {
    qoi.check_compatible(output_dim);
  } catch (const std::invalid_argument& e) {
    fail(std::string("'qoi' incompatible with the model: ") + e.what());
  }
  return qoi;
}

EstimatorBudget parse_budget(const json& root) {
  EstimatorBudget budget;
  if (root.contains("n_outer")) budget.n_outer = static_cast<int>(require_number(root, "n_outer", "the config"));
  if (root.contains("n_inner")) budget.n_inner = static_cast<int>(require_number(root, "n_inner", "the config"));
  if (root.contains("n_ref")) budget.n_ref = static_cast<int>(require_number(root, "n_ref", "the config"));
  if (root.contains("seed")) {
    const json& s = root["seed"];
    if (!s.is_number_integer() || s.get<long long>() < 0)
      fail("'seed' must be a nonnegative integer");
    budget.seed = s.get<std::uint64_t>();
  }
  try {
    budget.validate();
  } catch (const std::invalid_argument& e) {
    fail(std::string("budget: ") + e.what());
  }
  return budget;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail(std::string("config is not valid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("config root must be a JSON object");

  Model model = parse_model(require(root, "model", "the config"));
  InputModel inputs = parse_inputs(require(root, "inputs", "the config"));

  const int d = model.input_dimension();
  if (d > kMaxDimension)
    fail("model dimension " + std::to_string(d) + " exceeds the cap of " +
         std::to_string(kMaxDimension) + " inputs (2^d subset table)");
  if (inputs.dimension() != d)
    fail("inputs dimension " + std::to_string(inputs.dimension()) +
         " does not match model input dimension " + std::to_string(d));

  QoISpec qoi = parse_qoi(root, model.output_dimension());
  EstimatorBudget budget = parse_budget(root);
  ExperimentConfig config{std::move(model), std::move(inputs), qoi, budget};
  if (root.contains("emit_csv")) {
    if (!root["emit_csv"].is_boolean()) fail("'emit_csv' must be a boolean");
    config.emit_csv = root["emit_csv"].get<bool>();
  }
  if (root.contains("emit_shapley")) {
    if (!root["emit_shapley"].is_boolean()) fail("'emit_shapley' must be a boolean");
    config.emit_shapley = root["emit_shapley"].get<bool>();
  }
  return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  try {
    return from_json(buffer.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace coalsens
