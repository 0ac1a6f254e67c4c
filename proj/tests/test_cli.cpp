#include <catch2/catch_amalgamated.hpp>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

const char* cli_path() { return CNCDIR_CLI_PATH; }

struct TempDir {
  fs::path dir;
  TempDir() {
    dir = fs::temp_directory_path() /
          ("cncdir_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~TempDir() { fs::remove_all(dir); }
  std::string file(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args) {
  std::string cmd = std::string(cli_path()) + " " + args + " 2>/dev/null";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

std::string slurp(const std::string& path) {
  std::ifstream f(path);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write(const std::string& path, const std::string& body) {
  std::ofstream f(path);
  f << body;
}

}  // namespace

TEST_CASE("sample subcommand is deterministic", "[cli]") {
  TempDir t;
  write(t.file("p.json"), R"({"alpha":[1,1,1],"lambda":[5,2,3]})");
  REQUIRE(run("sample --model cncdir --params " + t.file("p.json") +
              " --n 5 --seed 1 --out " + t.file("a.csv")) == 0);
  REQUIRE(run("sample --model cncdir --params " + t.file("p.json") +
              " --n 5 --seed 1 --out " + t.file("b.csv")) == 0);
  CHECK(slurp(t.file("a.csv")) == slurp(t.file("b.csv")));
  REQUIRE(run("sample --model cncdir --params " + t.file("p.json") +
              " --n 5 --seed 2 --out " + t.file("c.csv")) == 0);
  CHECK(slurp(t.file("a.csv")) != slurp(t.file("c.csv")));
}

TEST_CASE("density grid of the uniform model is constant 2", "[cli]") {
  TempDir t;
  write(t.file("p.json"), R"({"alpha":[1,1,1]})");
  REQUIRE(run("density-grid --model dir --params " + t.file("p.json") +
              " --step 0.1 --out " + t.file("g.csv")) == 0);
  std::ifstream f(t.file("g.csv"));
  std::string line;
  int rows = 0;
  while (std::getline(f, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    auto pos = line.rfind(',');
    double pdf = std::stod(line.substr(pos + 1));
    CHECK(pdf == Catch::Approx(2.0).epsilon(1e-9));
    ++rows;
  }
  CHECK(rows > 20);
}

TEST_CASE("fit report round-trips into the other subcommands", "[cli]") {
  TempDir t;
  // simulate a small dataset through the CLI itself
  write(t.file("p.json"), R"({"alpha":[1,1,1],"lambda":[8,6,7]})");
  REQUIRE(run("sample --model cncdir --params " + t.file("p.json") +
              " --n 150 --seed 3 --out " + t.file("data.csv")) == 0);
  REQUIRE(run("fit --model cncdir --constrain a1,a2,a3 --data " +
              t.file("data.csv") + " --starts 3 --out " + t.file("fit.json")) == 0);

  auto j = nlohmann::json::parse(slurp(t.file("fit.json")));
  CHECK(j.at("family") == "cncdir");
  CHECK(j.at("converged").get<bool>());
  CHECK(j.at("estimates").contains("l1"));
  CHECK(j.at("params").at("alpha").size() == 3);

  // the report itself is a valid params file for the other commands
  REQUIRE(run("density-grid --model cncdir --params " + t.file("fit.json") +
              " --step 0.1 --out " + t.file("g.csv")) == 0);
  REQUIRE(run("moments --params " + t.file("fit.json") + " --r1 1 --r2 1 --out " +
              t.file("m.json")) == 0);
  auto m = nlohmann::json::parse(slurp(t.file("m.json")));
  double closed = m.at("closed_form").get<double>();
  double oracle = m.at("oracle").at("mw_series").get<double>();
  CHECK(closed == Catch::Approx(oracle).epsilon(1e-8));
  REQUIRE(run("sample --model cncdir --params " + t.file("fit.json") +
              " --n 3 --seed 1 --out " + t.file("s.csv")) == 0);
}

TEST_CASE("ingest subcommand filters and maps", "[cli]") {
  TempDir t;
  write(t.file("raw.csv"), "0.2,0.9\n0.2,0.3\n0.5,0.5\n0.9,0.8\n");
  REQUIRE(run("ingest --in " + t.file("raw.csv") + " --out " + t.file("s.csv")) == 0);
  std::string body = slurp(t.file("s.csv"));
  CHECK(body.find("0.1,0.8") != std::string::npos);
  CHECK(body.find("kept=2") != std::string::npos);
}

TEST_CASE("exit codes distinguish error classes", "[cli]") {
  TempDir t;
  // missing files and malformed input are domain errors
  CHECK(run("fit --model cncdir --data /nonexistent.csv --out -") == 2);
  write(t.file("bad.csv"), "0.2,0.3\n0.7,0.7\n");  // off-simplex row
  CHECK(run("fit --model cncdir --data " + t.file("bad.csv") + " --out -") == 2);
  write(t.file("p.json"), R"({"alpha":[1,1,1]})");
  CHECK(run("sample --model kb2 --params " + t.file("p.json") + " --out -") == 2);
  // bad CLI usage is caught by the parser
  CHECK(run("unknown-subcommand") != 0);
}

TEST_CASE("lr subcommand emits the four-hypothesis battery", "[cli][slow]") {
  TempDir t;
  write(t.file("p.json"), R"({"alpha":[1,1,1],"lambda":[8,6,7]})");
  REQUIRE(run("sample --model cncdir --params " + t.file("p.json") +
              " --n 120 --seed 5 --out " + t.file("data.csv")) == 0);
  REQUIRE(run("lr --model cncdir --data " + t.file("data.csv") +
              " --starts 2 --out " + t.file("lr.json")) == 0);
  auto j = nlohmann::json::parse(slurp(t.file("lr.json")));
  REQUIRE(j.at("hypotheses").size() == 4);
  for (const auto& h : j.at("hypotheses")) {
    CHECK(h.at("w").get<double>() >= 0.0);
    CHECK(h.at("p").get<double>() <= 1.0);
  }
  // markdown variant
  REQUIRE(run("lr --model cncdir --data " + t.file("data.csv") +
              " --starts 2 --format md --out " + t.file("lr.md")) == 0);
  CHECK(slurp(t.file("lr.md")).find("| H0 |") != std::string::npos);
}
