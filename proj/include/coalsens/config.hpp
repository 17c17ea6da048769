#pragma once

#include <stdexcept>
#include <string>

#include "coalsens/estimators.hpp"
#include "coalsens/input_models.hpp"
#include "coalsens/models.hpp"

namespace coalsens {

/// Schema or cross-field violation in an experiment config. The CLI maps
/// this category to exit code 2 (vs 3 for estimation failures).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A fully validated experiment: everything needed to call decompose plus
/// the output flags. Construction succeeds only when model, inputs, QoI and
/// budget are mutually compatible; no sampling happens during validation.
struct ExperimentConfig {
  Model model;
  InputModel inputs;
  QoISpec qoi;
  EstimatorBudget budget;
  bool emit_csv = true;
  bool emit_shapley = true;

  /// Parses the JSON text of a config file. Throws ConfigError with a
  /// human-readable message naming the offending field.
  static ExperimentConfig from_json(const std::string& json_text);

  /// from_json plus file I/O; the path appears in error messages.
  static ExperimentConfig from_file(const std::string& path);
};

}  // namespace coalsens
