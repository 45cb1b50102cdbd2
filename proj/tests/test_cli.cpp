#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <string>

// end-to-end checks of the installed command surface: exit code 0 on
// success, 2 for configuration mistakes, 3 when the numerics give up

namespace fs = std::filesystem;

namespace {

int run_cli(const std::string& args) {
  std::string cmd = std::string(CORRLEN_CLI_BIN) + " " + args + " >/dev/null 2>&1";
  int status = std::system(cmd.c_str());
  REQUIRE(status != -1);
  REQUIRE(WIFEXITED(status));
  return WEXITSTATUS(status);
}

std::string data(const std::string& name) {
  return std::string(CORRLEN_DATA_DIR) + "/" + name;
}

struct OutDir {
  fs::path path;
  explicit OutDir(const std::string& tag) {
    path = fs::temp_directory_path() / ("corrlen_cli_" + tag + "_" + std::to_string(::getpid()));
    fs::remove_all(path);
  }
  ~OutDir() { fs::remove_all(path); }
  std::string str() const { return path.string(); }
};

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("geometry succeeds and writes its outputs") {
  OutDir out("geo");
  int code = run_cli("geometry --scenario " + data("geo_l4.json") + " --out " + out.str());
  CHECK(code == 0);
  CHECK(fs::exists(out.path / "geometry.csv"));
  CHECK(fs::exists(out.path / "boundary_profiles.csv"));
  CHECK(fs::exists(out.path / "wulff.svg"));
  CHECK(fs::exists(out.path / "geometry.json"));
}

TEST_CASE("nu-scan succeeds with threads and precision flags") {
  OutDir out("scan");
  int code = run_cli("nu-scan --scenario " + data("nuscan_d1.json") + " --out " + out.str() +
                     " --threads 2 --precision 9");
  CHECK(code == 0);
  CHECK(fs::exists(out.path / "nu_curve_0.csv"));
  CHECK(fs::exists(out.path / "directions.csv"));
  CHECK(fs::exists(out.path / "nu_scan.json"));
}

TEST_CASE("help exits cleanly") {
  CHECK(run_cli("--help") == 0);
  CHECK(run_cli("nu-scan --help") == 0);
}

TEST_CASE("configuration mistakes exit with 2") {
  OutDir out("bad");
  // missing scenario file
  CHECK(run_cli("geometry --scenario " + data("no_such_file.json") + " --out " + out.str()) == 2);
  // unknown key in the scenario
  CHECK(run_cli("nu-scan --scenario " + data("bad_key.json") + " --out " + out.str()) == 2);
  // command needs a kernel the scenario does not configure
  CHECK(run_cli("criterion --scenario " + data("geo_l4.json") + " --out " + out.str()) == 2);
  // unknown subcommand / no subcommand
  CHECK(run_cli("frobnicate --scenario " + data("geo_l4.json")) == 2);
  CHECK(run_cli("") == 2);
  // --scenario is required
  CHECK(run_cli("geometry --out " + out.str()) == 2);
}

TEST_CASE("numeric failure exits with 3") {
  OutDir out("uf");
  int code = run_cli("prefactor --scenario " + data("underflow.json") + " --out " + out.str());
  CHECK(code == 3);
}

}  // TEST_SUITE
