#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <sstream>
#include <string>
#include <unistd.h>

#include "serw/io.hpp"

namespace fs = std::filesystem;

namespace {

struct CliFixture {
  fs::path dir;
  CliFixture() {
    dir = fs::temp_directory_path() /
          ("serw_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(dir);
  }
  ~CliFixture() { fs::remove_all(dir); }

  std::string file(const std::string& name, const std::string& content) const {
    const fs::path p = dir / name;
    std::ofstream out(p);
    out << content;
    return p.string();
  }

  std::string path(const std::string& name) const {
    return (dir / name).string();
  }
};

int run_cli(const std::string& args) {
  const std::string cmd =
      std::string(SERW_CLI_PATH) + " " + args + " > /dev/null 2> /dev/null";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("w2 on identical files reports zero and exits cleanly") {
  CliFixture fx;
  const std::string a = fx.file("a.csv", "0,0\n1,0\n0,1\n");
  const std::string out = fx.path("r.json");
  const int code =
      run_cli("w2 --a " + a + " --b " + a + " --solver exact --out " + out);
  CHECK(code == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("value").get<double>() == 0.0);
  CHECK(j.at("command") == "w2");
  CHECK(fs::exists(fx.path("r.coupling.csv")));
}

TEST_CASE("malformed csv input exits with code 1") {
  CliFixture fx;
  const std::string bad = fx.file("bad.csv", "1,2\n3\n");
  const std::string good = fx.file("good.csv", "1,2\n3,4\n");
  CHECK(run_cli("w2 --a " + bad + " --b " + good + " --out " +
                fx.path("r.json")) == 1);
  CHECK(run_cli("w2 --a " + fx.path("missing.csv") + " --b " + good +
                " --out " + fx.path("r.json")) == 1);
}

TEST_CASE("gw on an isometric pair is near zero through the CLI") {
  CliFixture fx;
  // A rigid motion of a fixed 6-point planar cloud.
  const std::string a =
      fx.file("a.csv", "0,0\n2,0\n0,3\n1,1\n2,2\n-1,0.5\n");
  // Rotated by 90 degrees and translated: (x, y) -> (-y + 1, x - 2).
  const std::string b =
      fx.file("b.csv", "1,-2\n1,0\n-2,-2\n0,-1\n-1,0\n0.5,-3\n");
  const std::string out = fx.path("gw.json");
  CHECK(run_cli("gw --a " + a + " --b " + b +
                " --restarts 5 --seed 3 --threads 2 --out " + out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("value").get<double>() < 1e-8);
}

TEST_CASE("serw with zero epochs equals fserw in the value field") {
  CliFixture fx;
  const std::string a =
      fx.file("a.csv", "0,0,1\n1,0,0\n0,2,0\n1,1,1\n2,0.5,0\n");
  const std::string b = fx.file("b.csv", "0,1\n1,0\n2,2\n0.5,0\n1.5,1\n");
  const std::string out1 = fx.path("serw.json");
  const std::string out2 = fx.path("fserw.json");
  CHECK(run_cli("serw --a " + a + " --b " + b +
                " --epochs 0 --dim 2 --seed 1 --out " + out1) == 0);
  CHECK(run_cli("fserw --a " + a + " --b " + b + " --dim 2 --seed 1 --out " +
                out2) == 0);
  const std::string t1 = slurp(out1);
  const std::string t2 = slurp(out2);
  // The serialized value bytes must agree exactly.
  auto value_line = [](const std::string& text) {
    const size_t at = text.find("\"value\"");
    return text.substr(at, text.find('\n', at) - at);
  };
  CHECK(value_line(t1) == value_line(t2));
}

TEST_CASE("config file layers under explicit flags") {
  CliFixture fx;
  const std::string a = fx.file("a.csv", "0,0\n1,0\n0,1\n1,1\n");
  const std::string cfg = fx.file("cfg.json", "{\"dim\": 2, \"seed\": 7}");
  const std::string out = fx.path("r.json");
  CHECK(run_cli("fserw --a " + a + " --b " + a + " --config " + cfg +
                " --out " + out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("value").get<double>() <= 1e-10);

  const std::string badcfg = fx.file("bad.json", "{\"not-a-flag\": 1}");
  CHECK(run_cli("fserw --a " + a + " --b " + a + " --config " + badcfg +
                " --out " + out) == 1);
}

TEST_CASE("dtw subcommand emits distance and path") {
  CliFixture fx;
  const std::string a = fx.file("a.csv", "0\n1\n");
  const std::string b = fx.file("b.csv", "0\n0\n1\n");
  const std::string out = fx.path("dtw.json");
  CHECK(run_cli("dtw --a " + a + " --b " + b + " --out " + out) == 0);
  const auto j = nlohmann::json::parse(slurp(out));
  CHECK(j.at("distance").get<double>() == 0.0);
  CHECK(j.at("path").size() == 3);
}

TEST_CASE("unknown subcommand or missing flags exit with code 1") {
  CliFixture fx;
  CHECK(run_cli("frobnicate") == 1);
  CHECK(run_cli("w2 --a only.csv") == 1);
}
