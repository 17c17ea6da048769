#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "coalsens/config.hpp"
#include "coalsens/engine.hpp"
#include "coalsens/report_io.hpp"

namespace {

namespace fs = std::filesystem;
using namespace coalsens;

constexpr int kExitOk = 0;
constexpr int kExitConfigError = 2;
constexpr int kExitRuntimeError = 3;

int default_threads() {
  if (const char* env = std::getenv("COALSENS_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end && *end == '\0' && value >= 1) return static_cast<int>(value);
    std::cerr << "warning: ignoring invalid COALSENS_THREADS=\"" << env << "\"\n";
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void write_file(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << contents;
}

std::string brief(const RingValue& v) {
  if (v.is_scalar()) return format_double(v.scalar());
  const SymMatrix& m = v.matrix();
  std::string out = "[";
  for (int i = 0; i < m.size(); ++i) {
    if (i) out += "; ";
    for (int j = 0; j < m.size(); ++j) {
      if (j) out += " ";
      out += format_double(m(i, j));
    }
  }
  return out + "]";
}

void print_summary(const DecompositionReport& report) {
  std::printf("model:      %s (d=%d, output_dim=%d)\n", report.meta.model.c_str(), report.d,
              report.k);
  std::printf("inputs:     %s\n", report.meta.inputs.c_str());
  std::printf("qoi:        %s", report.meta.qoi.c_str());
  if (report.meta.bandwidth)
    std::printf(" (bandwidth %s)", format_double(*report.meta.bandwidth).c_str());
  std::printf("\n");
  std::printf("total:      %s  (se %s)\n", brief(report.total).c_str(),
              brief(report.total_se).c_str());

  if (report.phi.is_scalar()) {
    std::printf("\n%-14s %14s %12s %14s %12s %10s\n", "subset", "phi", "se", "psi", "se",
                "ratio");
    for (SubsetMask a = 0; a < report.phi.size(); ++a) {
      const std::string label = "{" + subsets::to_index_list(a) + "}";
      std::printf("%-14s %14.6g %12.3g %14.6g %12.3g", label.c_str(),
                  report.phi.get_channel(a, 0), report.phi_std_errors.get_channel(a, 0),
                  report.psi.get_channel(a, 0), report.psi_std_errors.get_channel(a, 0));
      if (!report.ratios.empty())
        std::printf(" %10.4f", report.ratios[a]);
      std::printf("\n");
    }
  }

  std::printf("\nsum residual:  %s\n", brief(report.sum_residual).c_str());
  std::printf("fractional:    %s\n", report.fractional.describe().c_str());
  std::printf("gradual:       %s%s\n", report.gradual.certified ? "certified" : "not certified",
              report.gradual.certified ? ("  (" + report.gradual.f_a + ")").c_str() : "");
  if (report.dk_membership)
    std::printf("D_k check:     %s\n", report.dk_membership->describe().c_str());
  if (report.degenerate)
    std::printf("note:          total within 10 se of zero; ratios not reported\n");
  if (report.attribution) {
    std::printf("shapley:      ");
    for (double v : report.attribution->values) std::printf(" %s", format_double(v).c_str());
    std::printf("\n");
  }
}

int run_command(const std::string& config_path, int threads, const std::string& output_dir,
                bool quiet) {
  ExperimentConfig config = ExperimentConfig::from_file(config_path);

  EngineOptions options;
  options.threads = threads;
  DecompositionReport report;
  try {
    report = decompose(config.model, config.inputs, config.qoi, config.budget, options);
  } catch (const std::exception& e) {
    std::cerr << "estimation error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
  if (!config.emit_shapley) report.attribution.reset();

  const fs::path dir(output_dir);
  fs::create_directories(dir);
  const std::string stem = fs::path(config_path).stem().string();

  const fs::path json_path = dir / (stem + ".report.json");
  write_file(json_path, report_to_json(report));
  std::vector<fs::path> written{json_path};

  if (config.emit_csv) {
    const fs::path csv_path = dir / (stem + ".csv");
    write_file(csv_path, report_to_csv(report));
    written.push_back(csv_path);
  }
  if (report.attribution) {
    const fs::path shapley_path = dir / (stem + ".shapley.csv");
    write_file(shapley_path, attribution_to_csv(report));
    written.push_back(shapley_path);
  }

  if (!quiet) {
    print_summary(report);
    std::printf("\nwrote:");
    for (const auto& p : written) std::printf(" %s", p.string().c_str());
    std::printf("\nwall:  %.3f s (%d threads)\n", report.meta.wall_seconds,
                report.meta.threads);
  }
  return kExitOk;
}

int validate_command(const std::string& config_path) {
  ExperimentConfig config = ExperimentConfig::from_file(config_path);
  std::printf("ok: model=%s (d=%d, output_dim=%d), inputs=%s, qoi=%s, budget={n_outer=%d, "
              "n_inner=%d, n_ref=%d, seed=%llu}\n",
              config.model.name().c_str(), config.model.input_dimension(),
              config.model.output_dimension(), config.inputs.describe().c_str(),
              config.qoi.name().c_str(), config.budget.n_outer, config.budget.n_inner,
              config.budget.n_ref, static_cast<unsigned long long>(config.budget.seed));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"coalitional decomposition of model quantities of interest"};
  app.require_subcommand(1);

  std::string config_path;
  int threads = default_threads();
  std::string output_dir = ".";
  bool quiet = false;

  CLI::App* run = app.add_subcommand("run", "run an experiment and write report artifacts");
  run->add_option("config", config_path, "experiment config (JSON)")->required();
  run->add_option("--threads", threads, "worker threads for the subset map");
  run->add_option("--output-dir", output_dir, "directory for report artifacts");
  run->add_flag("--quiet", quiet, "suppress the summary table");

  CLI::App* validate = app.add_subcommand("validate", "check a config without sampling");
  validate->add_option("config", config_path, "experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfigError;
  }

  try {
    if (run->parsed()) return run_command(config_path, threads, output_dir, quiet);
    return validate_command(config_path);
  } catch (const coalsens::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntimeError;
  }
}
