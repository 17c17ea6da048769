#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "coalsens/engine.hpp"
#include "coalsens/report_io.hpp"

using namespace coalsens;
using nlohmann::json;

namespace {

EstimatorBudget budget(int n_outer, int n_inner, std::uint64_t seed) {
  EstimatorBudget b;
  b.n_outer = n_outer;
  b.n_inner = n_inner;
  b.seed = seed;
  return b;
}

DecompositionReport scalar_report() {
  const Model model = Model::linear({1.0, 1.0});
  const InputModel inputs = InputModel::independent(
      {Marginal::normal(0.0, 1.0), Marginal::normal(0.0, 1.0)});
  return decompose(model, inputs, QoISpec{}, budget(200, 30, 5));
}

DecompositionReport matrix_report() {
  QoISpec qoi;
  qoi.kind = QoISpec::Kind::CovarianceMatrix;
  const InputModel inputs = InputModel::independent(
      {Marginal::normal(0.0, 1.0), Marginal::normal(0.0, 1.0)});
  return decompose(Model::sum_diff(), inputs, qoi, budget(120, 20, 5));
}

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    const std::size_t end = text.find('\n', start);
    lines.push_back(text.substr(start, end - start));
    if (end == std::string::npos) break;
    start = end + 1;
  }
  return lines;
}

}  // namespace

TEST_CASE("format_double round-trips every finite double it prints") {
  CHECK(format_double(0.0) == "0");
  CHECK(format_double(1.5) == "1.5");
  CHECK(format_double(std::nan("")) == "null");
  CHECK(format_double(std::numeric_limits<double>::infinity()) == "null");

  const double awkward[] = {1.0 / 3.0,
                            3.14159265358979323846,
                            -2.2250738585072014e-308,
                            9007199254740993.0,
                            1e300,
                            -0.0,
                            5e-324};
  for (double x : awkward) {
    const std::string text = format_double(x);
    const double back = std::strtod(text.c_str(), nullptr);
    CHECK(back == x);
  }
}

TEST_CASE("scalar report json carries the fixed schema") {
  const DecompositionReport report = scalar_report();
  const std::string text = report_to_json(report);
  const json doc = json::parse(text);

  REQUIRE(doc.is_object());
  CHECK(doc.size() == 6);
  for (const char* key : {"meta", "phi", "psi", "ratios", "diagnostics", "attribution"})
    CHECK(doc.contains(key));

  // Top-level keys are emitted in a fixed order.
  CHECK(text.find("\"meta\"") < text.find("\"phi\""));
  CHECK(text.find("\"phi\"") < text.find("\"psi\""));
  CHECK(text.find("\"psi\"") < text.find("\"ratios\""));
  CHECK(text.find("\"ratios\"") < text.find("\"diagnostics\""));
  CHECK(text.find("\"diagnostics\"") < text.find("\"attribution\""));

  const json& meta = doc["meta"];
  CHECK(meta["schema"] == "coalsens-report-v1");
  CHECK(meta["model"] == report.meta.model);
  CHECK(meta["qoi"] == "variance");
  CHECK(meta["d"] == 2);
  CHECK(meta["output_dim"] == 1);
  CHECK(meta["budget"]["n_outer"] == 200);
  CHECK(meta["budget"]["n_inner"] == 30);
  CHECK(meta["budget"]["seed"] == 5);
  CHECK_FALSE(meta.contains("bandwidth"));
  CHECK(meta["subsets"] == json::array({"", "1", "2", "1,2"}));

  CHECK(doc["phi"]["values"].size() == 4);
  CHECK(doc["phi"]["std_errors"].size() == 4);
  CHECK(doc["phi"]["values"][0] == 0.0);
  CHECK(doc["psi"]["values"].size() == 4);
  CHECK(doc["ratios"].is_array());
  CHECK(doc["ratios"].size() == 4);

  const json& diag = doc["diagnostics"];
  CHECK(diag["total"].is_number());
  CHECK(diag["total"] == report.total.scalar());
  CHECK(diag["degenerate"] == false);
  CHECK(diag["fractional"]["status"] == "holds");
  CHECK(diag["fractional"]["violations"].is_array());
  CHECK(diag["gradual"]["certified"] == true);
  CHECK(diag["dk_membership"].is_null());

  CHECK(doc["attribution"]["method"] == "shapley");
  CHECK(doc["attribution"]["values"].size() == 2);
}

TEST_CASE("matrix report json swaps ratios and attribution for the cone check") {
  const DecompositionReport report = matrix_report();
  const std::string text = report_to_json(report);
  const json doc = json::parse(text);

  CHECK(doc.size() == 5);
  CHECK_FALSE(doc.contains("attribution"));
  CHECK(doc["ratios"].is_null());

  // Matrix values serialize as full square arrays.
  const json& top = doc["phi"]["values"][3];
  REQUIRE(top.is_array());
  REQUIRE(top.size() == 2);
  CHECK(top[0].size() == 2);
  CHECK(top[0][1] == top[1][0]);

  const json& dk = doc["diagnostics"]["dk_membership"];
  REQUIRE(dk.is_object());
  CHECK(dk.contains("status"));
  CHECK(dk.contains("diag_sign"));
  CHECK(dk.contains("min_eigenvalue"));
  CHECK(dk.contains("max_eigenvalue"));
}

TEST_CASE("scalar csv has one row per subset and an empty ratio when degenerate") {
  const DecompositionReport report = scalar_report();
  const std::vector<std::string> lines = split_lines(report_to_csv(report));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] == "subset,size,phi,phi_se,psi,psi_se,ratio");
  CHECK(lines[1].substr(0, 5) == "\"\",0,");
  CHECK(lines[2].substr(0, 6) == "\"1\",1,");
  CHECK(lines[4].substr(0, 8) == "\"1,2\",2,");
  // Non-degenerate: the ratio cell is populated.
  CHECK(lines[1].back() != ',');

  const DecompositionReport flat = decompose(
      Model::constant(2, 1.0),
      InputModel::independent({Marginal::normal(0.0, 1.0), Marginal::normal(0.0, 1.0)}),
      QoISpec{}, budget(50, 10, 1));
  for (std::size_t i = 1; i < 5; ++i) {
    const std::vector<std::string> rows = split_lines(report_to_csv(flat));
    CHECK(rows[i].back() == ',');  // empty ratio cell
  }
}

TEST_CASE("matrix csv emits one column group per packed entry") {
  const DecompositionReport report = matrix_report();
  const std::vector<std::string> lines = split_lines(report_to_csv(report));
  REQUIRE(lines.size() == 5);
  CHECK(lines[0] ==
        "subset,size"
        ",phi_1_1,phi_se_1_1,psi_1_1,psi_se_1_1"
        ",phi_1_2,phi_se_1_2,psi_1_2,psi_se_1_2"
        ",phi_2_2,phi_se_2_2,psi_2_2,psi_se_2_2");
  for (std::size_t i = 0; i < lines.size(); ++i) {
    std::size_t commas = 0;
    for (char c : lines[i]) commas += c == ',';
    // 14 columns; the last row carries one extra comma inside its quoted
    // "1,2" subset label.
    CHECK(commas == (i == 4 ? 14 : 13));
  }
}

TEST_CASE("attribution csv lists one share per input") {
  const DecompositionReport report = scalar_report();
  const std::vector<std::string> lines = split_lines(attribution_to_csv(report));
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "input,shapley");
  CHECK(lines[1].substr(0, 2) == "1,");
  CHECK(lines[2].substr(0, 2) == "2,");

  CHECK_THROWS_AS(attribution_to_csv(matrix_report()), std::logic_error);
}
