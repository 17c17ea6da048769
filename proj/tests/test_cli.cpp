#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#ifndef COALSENS_CLI_PATH
#error "COALSENS_CLI_PATH must point at the coalsens binary"
#endif

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void spit(const fs::path& path, const std::string& contents) {
  std::ofstream out(path, std::ios::binary);
  out << contents;
}

fs::path fresh_dir() {
  static int counter = 0;
  const fs::path dir = fs::temp_directory_path() /
                       ("coalsens_cli_" + std::to_string(::getpid()) + "_" +
                        std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

RunResult run_cli(const std::string& args, const fs::path& dir,
                  const std::string& env_prefix = "") {
  const fs::path out_path = dir / "stdout.txt";
  const fs::path err_path = dir / "stderr.txt";
  std::string cmd = env_prefix + COALSENS_CLI_PATH + " " + args + " > " + out_path.string() +
                    " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  RunResult result;
  if (WIFEXITED(status)) result.exit_code = WEXITSTATUS(status);
  result.out = slurp(out_path);
  result.err = slurp(err_path);
  return result;
}

const char* kIshigamiConfig = R"({
  "model": {"name": "ishigami"},
  "inputs": {"type": "independent", "marginals": [
    {"family": "uniform", "lower": -3.14159265358979323846, "upper": 3.14159265358979323846},
    {"family": "uniform", "lower": -3.14159265358979323846, "upper": 3.14159265358979323846},
    {"family": "uniform", "lower": -3.14159265358979323846, "upper": 3.14159265358979323846}
  ]},
  "qoi": "variance",
  "n_outer": 60, "n_inner": 20, "seed": 3
})";

std::size_t count_lines(const std::string& text) {
  std::size_t n = 0;
  for (char c : text) n += c == '\n';
  return n;
}

}  // namespace

TEST_CASE("run writes the three artifacts and a summary") {
  const fs::path dir = fresh_dir();
  spit(dir / "ishigami.json", kIshigamiConfig);
  const fs::path out = dir / "artifacts";
  const RunResult result =
      run_cli("run " + (dir / "ishigami.json").string() + " --output-dir " + out.string() +
                  " --threads 2",
              dir);
  CHECK(result.exit_code == 0);
  CHECK(result.err.empty());
  CHECK(result.out.find("fractional") != std::string::npos);
  CHECK(result.out.find("wrote:") != std::string::npos);

  REQUIRE(fs::exists(out / "ishigami.report.json"));
  REQUIRE(fs::exists(out / "ishigami.csv"));
  REQUIRE(fs::exists(out / "ishigami.shapley.csv"));

  const json doc = json::parse(slurp(out / "ishigami.report.json"));
  for (const char* key : {"meta", "phi", "psi", "ratios", "diagnostics", "attribution"})
    CHECK(doc.contains(key));
  CHECK(doc["meta"]["schema"] == "coalsens-report-v1");
  CHECK(doc["meta"]["d"] == 3);
  CHECK(doc["meta"]["budget"]["n_outer"] == 60);
  CHECK(doc["phi"]["values"].size() == 8);

  // Header plus one row per subset.
  CHECK(count_lines(slurp(out / "ishigami.csv")) == 9);
  CHECK(count_lines(slurp(out / "ishigami.shapley.csv")) == 4);
  fs::remove_all(dir);
}

TEST_CASE("reports are byte-identical across thread counts and reruns") {
  const fs::path dir = fresh_dir();
  spit(dir / "exp.json", kIshigamiConfig);
  const fs::path out1 = dir / "t1";
  const fs::path out2 = dir / "t4";
  const fs::path out3 = dir / "env";
  CHECK(run_cli("run " + (dir / "exp.json").string() + " --quiet --threads 1 --output-dir " +
                    out1.string(),
                dir)
            .exit_code == 0);
  CHECK(run_cli("run " + (dir / "exp.json").string() + " --quiet --threads 4 --output-dir " +
                    out2.string(),
                dir)
            .exit_code == 0);
  const RunResult env = run_cli(
      "run " + (dir / "exp.json").string() + " --quiet --output-dir " + out3.string(), dir,
      "COALSENS_THREADS=3 ");
  CHECK(env.exit_code == 0);

  const std::string report = slurp(out1 / "exp.report.json");
  CHECK(report == slurp(out2 / "exp.report.json"));
  CHECK(report == slurp(out3 / "exp.report.json"));
  CHECK(slurp(out1 / "exp.csv") == slurp(out2 / "exp.csv"));
  CHECK(slurp(out1 / "exp.shapley.csv") == slurp(out2 / "exp.shapley.csv"));
  fs::remove_all(dir);
}

TEST_CASE("quiet mode silences stdout and emit flags prune artifacts") {
  const fs::path dir = fresh_dir();
  std::string config(kIshigamiConfig);
  config.insert(config.rfind('}'), ", \"emit_csv\": false, \"emit_shapley\": false");
  spit(dir / "lean.json", config);
  const fs::path out = dir / "artifacts";
  const RunResult result = run_cli(
      "run " + (dir / "lean.json").string() + " --quiet --output-dir " + out.string(), dir);
  CHECK(result.exit_code == 0);
  CHECK(result.out.empty());
  CHECK(fs::exists(out / "lean.report.json"));
  CHECK_FALSE(fs::exists(out / "lean.csv"));
  CHECK_FALSE(fs::exists(out / "lean.shapley.csv"));
  fs::remove_all(dir);
}

TEST_CASE("matrix runs emit the matrix csv and no shapley table") {
  const fs::path dir = fresh_dir();
  spit(dir / "matrix.json", R"({
    "model": {"name": "sum_diff"},
    "inputs": {"type": "gaussian", "cov": [[1.0, 0.0], [0.0, 1.0]]},
    "qoi": "covariance_matrix",
    "n_outer": 50, "n_inner": 15, "seed": 1
  })");
  const fs::path out = dir / "artifacts";
  const RunResult result = run_cli(
      "run " + (dir / "matrix.json").string() + " --quiet --output-dir " + out.string(), dir);
  CHECK(result.exit_code == 0);
  CHECK(fs::exists(out / "matrix.report.json"));
  CHECK(fs::exists(out / "matrix.csv"));
  CHECK_FALSE(fs::exists(out / "matrix.shapley.csv"));
  CHECK(slurp(out / "matrix.csv").rfind("subset,size,phi_1_1,", 0) == 0);
  const json doc = json::parse(slurp(out / "matrix.report.json"));
  CHECK(doc["ratios"].is_null());
  CHECK(doc["diagnostics"]["dk_membership"].is_object());
  fs::remove_all(dir);
}

TEST_CASE("validate checks a config without sampling") {
  const fs::path dir = fresh_dir();
  spit(dir / "exp.json", kIshigamiConfig);
  const RunResult ok = run_cli("validate " + (dir / "exp.json").string(), dir);
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.rfind("ok:", 0) == 0);
  CHECK(ok.out.find("ishigami") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("config problems exit with status 2") {
  const fs::path dir = fresh_dir();

  const RunResult missing = run_cli("run " + (dir / "absent.json").string(), dir);
  CHECK(missing.exit_code == 2);
  CHECK(missing.err.find("config error:") != std::string::npos);

  spit(dir / "broken.json", "{not json");
  const RunResult broken = run_cli("validate " + (dir / "broken.json").string(), dir);
  CHECK(broken.exit_code == 2);
  CHECK(broken.err.find("valid JSON") != std::string::npos);

  spit(dir / "unknown.json", R"({
    "model": {"name": "kriging"},
    "inputs": {"type": "gaussian", "cov": [[1]]},
    "qoi": "variance"})");
  const RunResult unknown = run_cli("validate " + (dir / "unknown.json").string(), dir);
  CHECK(unknown.exit_code == 2);
  CHECK(unknown.err.find("ishigami") != std::string::npos);

  std::string beta = "[1";
  std::string marginals = "[{\"family\": \"normal\", \"mean\": 0, \"std\": 1}";
  for (int i = 1; i < 25; ++i) {
    beta += ",1";
    marginals += ",{\"family\": \"normal\", \"mean\": 0, \"std\": 1}";
  }
  spit(dir / "wide.json",
       R"({"model": {"name": "linear", "beta": )" + beta +
           R"(]}, "inputs": {"type": "independent", "marginals": )" + marginals +
           R"(]}, "qoi": "variance"})");
  const RunResult wide = run_cli("validate " + (dir / "wide.json").string(), dir);
  CHECK(wide.exit_code == 2);
  CHECK(wide.err.find("24") != std::string::npos);

  spit(dir / "incompatible.json", R"({
    "model": {"name": "linear", "beta": [1, 1]},
    "inputs": {"type": "gaussian", "cov": [[1, 0], [0, 1]]},
    "qoi": "covariance", "pair": [1, 2]})");
  const RunResult incompatible = run_cli("run " + (dir / "incompatible.json").string(), dir);
  CHECK(incompatible.exit_code == 2);
  CHECK(incompatible.err.find("incompatible") != std::string::npos);

  const RunResult no_args = run_cli("run", dir);
  CHECK(no_args.exit_code == 2);
  const RunResult bad_sub = run_cli("frobnicate x.json", dir);
  CHECK(bad_sub.exit_code == 2);
  fs::remove_all(dir);
}

TEST_CASE("estimation failures exit with status 3") {
  const fs::path dir = fresh_dir();
  spit(dir / "flat.json", R"({
    "model": {"name": "constant", "d": 2, "value": 1.0},
    "inputs": {"type": "gaussian", "cov": [[1, 0], [0, 1]]},
    "qoi": "mmd",
    "n_outer": 30, "n_inner": 10, "n_ref": 40, "seed": 2
  })");
  const RunResult result = run_cli("run " + (dir / "flat.json").string(), dir);
  CHECK(result.exit_code == 3);
  CHECK(result.err.find("estimation error:") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("invalid COALSENS_THREADS warns and falls back") {
  const fs::path dir = fresh_dir();
  spit(dir / "exp.json", kIshigamiConfig);
  const RunResult result =
      run_cli("validate " + (dir / "exp.json").string(), dir, "COALSENS_THREADS=abc ");
  CHECK(result.exit_code == 0);
  CHECK(result.err.find("COALSENS_THREADS") != std::string::npos);
  fs::remove_all(dir);
}

TEST_CASE("help exits cleanly") {
  const fs::path dir = fresh_dir();
  const RunResult result = run_cli("--help", dir);
  CHECK(result.exit_code == 0);
  CHECK(result.out.find("run") != std::string::npos);
  fs::remove_all(dir);
}
