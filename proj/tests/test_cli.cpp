#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "doctest.h"

namespace fs = std::filesystem;

namespace {

int run(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string(LAB_BINARY) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// trials.csv with the runtime column (last field) blanked.
std::string csv_without_runtime(const fs::path& p) {
  std::istringstream in(slurp(p));
  std::string line, out;
  while (std::getline(in, line)) out += line.substr(0, line.rfind(',')) + "\n";
  return out;
}

struct TempDir {
  fs::path path;
  TempDir() : path(fs::temp_directory_path() / "scolab_cli_test") {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_CASE("unknown command prints usage and fails") {
  TempDir t;
  CHECK(run("frobnicate", t.path / "log") != 0);
  CHECK(slurp(t.path / "log").find("accept") != std::string::npos);
  CHECK(run("", t.path / "log") != 0);
}

TEST_CASE("version names the code construction and the suite") {
  TempDir t;
  CHECK(run("--version", t.path / "log") == 0);
  const std::string out = slurp(t.path / "log");
  CHECK(out.find("random-systematic") != std::string::npos);
  CHECK(out.find("accept/") != std::string::npos);
}

TEST_CASE("code build and verify") {
  TempDir t;
  const fs::path code = t.path / "c.bin";
  CHECK(run("code build --k 12 --rho 0.1 --seed 3 --out " + code.string(), t.path / "log") == 0);
  CHECK(fs::exists(code));
  CHECK(run("code verify --in " + code.string(), t.path / "log") == 0);
  CHECK(slurp(t.path / "log").find("verified") != std::string::npos);
  CHECK(run("code build --k 4 --rho 0.45 --retries 2 --out " + code.string(), t.path / "log") != 0);
}

TEST_CASE("trial runs are reproducible") {
  TempDir t;
  const fs::path a = t.path / "a", b = t.path / "b";
  CHECK(run("trial --trials 1 --seed 7 --out " + a.string(), t.path / "log") == 0);
  CHECK(run("trial --trials 1 --seed 7 --out " + b.string(), t.path / "log") == 0);
  CHECK(csv_without_runtime(a / "trials.csv") == csv_without_runtime(b / "trials.csv"));
  CHECK(slurp(a / "summary.txt") == slurp(b / "summary.txt"));
  CHECK(fs::exists(a / "aggregate.json"));
}

TEST_CASE("config errors exit nonzero with the key") {
  TempDir t;
  CHECK(run("trial --k 12 --out " + (t.path / "x").string(), t.path / "log") != 0);
  CHECK(slurp(t.path / "log").find("instance.k") != std::string::npos);
  CHECK(run("trial --mode gd --T 10 --out " + (t.path / "x").string(), t.path / "log") != 0);
  CHECK(slurp(t.path / "log").find("gd.T") != std::string::npos);
}

TEST_CASE("concentration command") {
  TempDir t;
  CHECK(run("concentration --out " + (t.path / "c").string(), t.path / "log") == 0);
  CHECK(slurp(t.path / "c" / "summary.txt").find("PASS C7") != std::string::npos);
}
