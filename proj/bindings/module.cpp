#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "coalsens/config.hpp"
#include "coalsens/engine.hpp"
#include "coalsens/lattice.hpp"
#include "coalsens/report_io.hpp"
#include "coalsens/subset.hpp"

namespace py = pybind11;
using namespace coalsens;

namespace {

int table_dimension(std::size_t size) {
  int d = 0;
  while ((std::size_t{1} << d) < size) ++d;
  if ((std::size_t{1} << d) != size || d > kMaxDimension)
    throw std::invalid_argument("table length must be a power of two up to 2^24");
  return d;
}

SetFunctionTable to_table(const std::vector<double>& values) {
  SetFunctionTable table = SetFunctionTable::scalar(table_dimension(values.size()));
  for (SubsetMask a = 0; a < table.size(); ++a) table.set_channel(a, 0, values[a]);
  return table;
}

std::vector<double> from_table(const SetFunctionTable& table) {
  std::vector<double> out(table.size());
  for (SubsetMask a = 0; a < table.size(); ++a) out[a] = table.get_channel(a, 0);
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Coalitional decomposition of model quantities of interest";

  m.def(
      "mobius_transform",
      [](const std::vector<double>& phi) { return from_table(mobius_transform(to_table(phi))); },
      py::arg("phi"),
      "Mobius inversion of a scalar set function indexed by subset bitmask: "
      "psi[A] = sum over subsets B of A of (-1)^|A minus B| phi[B].");

  m.def(
      "zeta_transform",
      [](const std::vector<double>& psi) { return from_table(zeta_transform(to_table(psi))); },
      py::arg("psi"),
      "Subset sums of a scalar set function: phi[A] = sum over B subset of A of psi[B].");

  m.def("mobius_boolean", &mobius_boolean, py::arg("b"), py::arg("a"),
        "Mobius function of the Boolean lattice: (-1)^|a minus b| for b a subset of a.");

  m.def(
      "shapley_attribution",
      [](const std::vector<double>& psi) {
        return shapley_attribution(to_table(psi)).values;
      },
      py::arg("psi"),
      "Shapley values from Harsanyi dividends: Shap_i = sum over A owning i of psi[A]/|A|.");

  m.def(
      "subset_label", [](SubsetMask a) { return subsets::to_index_list(a); }, py::arg("mask"),
      "Ascending 1-based index list for a subset bitmask, e.g. 5 -> \"1,3\".");

  m.def(
      "validate_config",
      [](const std::string& config_json) {
        try {
          ExperimentConfig::from_json(config_json);
        } catch (const ConfigError& e) {
          throw std::invalid_argument(e.what());
        }
      },
      py::arg("config_json"),
      "Parses and cross-checks an experiment config; raises ValueError when invalid.");

  m.def(
      "run_decomposition",
      [](const std::string& config_json, int threads) {
        std::optional<ExperimentConfig> config;
        try {
          config.emplace(ExperimentConfig::from_json(config_json));
        } catch (const ConfigError& e) {
          throw std::invalid_argument(e.what());
        }
        EngineOptions options;
        options.threads = threads;
        DecompositionReport report =
            decompose(config->model, config->inputs, config->qoi, config->budget, options);
        if (!config->emit_shapley) report.attribution.reset();
        return report_to_json(report);
      },
      py::arg("config_json"), py::arg("threads") = 1,
      py::call_guard<py::gil_scoped_release>(),
      "Runs the full decomposition for a JSON config and returns the report as a JSON "
      "string (identical bytes to the CLI artifact).");
}
