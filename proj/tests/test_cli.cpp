#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int status = -1;
  std::string output;
};

struct ScratchDir {
  fs::path path = fs::temp_directory_path() / ("rabsim-cli-" + std::to_string(::getpid()));
  ScratchDir() {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~ScratchDir() {
    std::error_code ec;
    fs::remove_all(path, ec);
  }
};

fs::path scratch_dir() {
  static const ScratchDir dir;
  return dir.path;
}

RunResult run(const std::string& args) {
  const std::string cmd = std::string(RABSIM_EXE) + " " + args + " 2>&1";
  RunResult r;
  FILE* p = ::popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int st = ::pclose(p);
  r.status = WIFEXITED(st) ? WEXITSTATUS(st) : -1;
  return r;
}

std::string read_file(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  std::ostringstream os;
  os << is.rdbuf();
  return os.str();
}

fs::path write_config(const std::string& name, const std::string& text) {
  const fs::path p = scratch_dir() / name;
  std::ofstream(p) << text;
  return p;
}

std::string wrote_path(const std::string& output, const std::string& ext) {
  std::smatch m;
  const std::regex re("wrote (\\S+\\." + ext + ")");
  REQUIRE(std::regex_search(output, m, re));
  return m[1];
}

}  // namespace

TEST_CASE("malformed unit reports line and column") {
  const auto cfg = write_config("bad-unit.yaml", "preset: forster-ravets\ndrive:\n  rabi: 5 MHzz\n");
  const auto r = run("gate -c " + cfg.string() + " -o " + (scratch_dir() / "out").string());
  CHECK(r.status == 2);
  CHECK(r.output.find("line 3") != std::string::npos);
  CHECK(r.output.find("column") != std::string::npos);
  CHECK(r.output.find("MHzz") != std::string::npos);
}

TEST_CASE("unknown preset and missing inputs are usage errors") {
  CHECK(run("gate -p no-such-preset -o " + (scratch_dir() / "out").string()).status == 2);
  CHECK(run("crossover -o " + (scratch_dir() / "out").string()).status == 2);
}

TEST_CASE("effective-check agrees with the closed form") {
  const auto r = run("effective-check -p spin-exchange-barredo -o " + (scratch_dir() / "eff").string());
  REQUIRE(r.status == 0);
  std::smatch m;
  REQUIRE(std::regex_search(r.output, m, std::regex("max deviation (\\S+) rad/us \\((\\S+) of Omega")));
  CHECK(std::stod(m[2]) < 1e-10);
  const fs::path json = fs::path(wrote_path(r.output, "csv")).replace_extension(".json");
  CHECK(fs::exists(json));
}

TEST_CASE("dynamics run writes a reproducible table") {
  const fs::path out = scratch_dir() / "dyn";
  const auto a = run("dynamics -p forster-ravets -o " + out.string());
  REQUIRE(a.status == 0);
  std::smatch m;
  REQUIRE(std::regex_search(a.output, m, std::regex("peak two-excitation population (\\S+)")));
  CHECK(std::stod(m[1]) >= 0.95);
  const std::string csv = wrote_path(a.output, "csv");
  const std::string first = read_file(csv);
  CHECK(first.rfind("t,", 0) == 0);

  const auto b = run("dynamics -p forster-ravets -o " + out.string());
  REQUIRE(b.status == 0);
  CHECK(wrote_path(b.output, "csv") == csv);
  CHECK(read_file(csv) == first);
}

TEST_CASE("output directory falls back to the environment") {
  const fs::path out = scratch_dir() / "env";
  ::setenv("RABSIM_OUT", out.c_str(), 1);
  const auto r = run("preset list");
  const auto g = run("effective-check -p forster-ravets");
  ::unsetenv("RABSIM_OUT");
  CHECK(r.status == 0);
  CHECK(r.output.find("forster-ravets") != std::string::npos);
  REQUIRE(g.status == 0);
  CHECK(fs::path(wrote_path(g.output, "csv")).parent_path() == out);
}
