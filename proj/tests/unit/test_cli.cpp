#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include <json.hpp>

#include "ergo/io.hpp"

namespace fs = std::filesystem;

namespace {

const fs::path& root_dir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "ergo_test_cli";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code;
  std::string err;
};

// Writes `config` to <tag>.json and runs `ergolearn <cmd> --config ... --out <tag>/ <extra>`.
Run run(const std::string& cmd, const std::string& tag, const std::string& config, const std::string& extra = "") {
  const fs::path cfg = root_dir() / (tag + ".json");
  {
    std::ofstream os(cfg);
    os << config;
  }
  const fs::path err = root_dir() / (tag + ".err");
  const std::string line = std::string(ERGOLEARN_EXE) + " " + cmd + " --config " + cfg.string() + " --out " +
                           (root_dir() / tag).string() + " " + extra + " 2> " + err.string() + " > /dev/null";
  const int status = std::system(line.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, slurp(err)};
}

fs::path out(const std::string& tag) { return root_dir() / tag; }

nlohmann::json summary(const std::string& tag) { return nlohmann::json::parse(slurp(out(tag) / "summary.json")); }

std::vector<std::vector<std::string>> csv(const fs::path& p) {
  std::ifstream in(p);
  return ergo::io::read_csv(in);
}

}  // namespace

TEST_CASE("basis listing") {
  const auto r = run("basis", "basis", R"({"n": 3, "locality": 2})");
  REQUIRE(r.code == 0);
  const auto rows = csv(out("basis") / "basis.csv");
  REQUIRE(rows.size() == 1 + 9 + 18);
  CHECK(rows[0][0] == "index");
  CHECK(rows[1 + 9][1] == "X0 X1");
  CHECK(rows[1 + 17][1] == "Z0 Z1");
}

TEST_CASE("ed on a small chain") {
  const auto r = run("ed", "ed", R"({"model": {"family": "ising", "n": 6, "g": 0.9, "h": 0.3},
                                     "ensemble": {"size": 12}})");
  REQUIRE(r.code == 0);
  const auto s = summary("ed");
  CHECK(s["ensemble_size"] == 12);
  CHECK(s["dimension"] == 64);
  CHECK(csv(out("ed") / "spectrum.csv").size() == 65);
  CHECK(csv(out("ed") / "ensemble.csv").size() == 13);
}

TEST_CASE("validation errors exit with 1 and name the field") {
  auto r = run("ed", "bad_field", R"({"model": {"family": "ising", "n": 6, "gg": 1.0}})");
  CHECK(r.code == 1);
  CHECK(r.err.find("model.gg") != std::string::npos);

  r = run("ed", "bad_n", R"({"model": {"family": "ising", "n": 1}})");
  CHECK(r.code == 1);
  CHECK(r.err.find("model.n") != std::string::npos);

  r = run("ed", "bad_json", "{\"model\": {\"n\": 6,,}}");
  CHECK(r.code == 1);
  CHECK(r.err.find("1:") != std::string::npos);

  r = run("pipeline", "empty_stages", R"({"stages": [], "model": {"family": "ising", "n": 4}})");
  CHECK(r.code == 1);
  CHECK(r.err.find("stages") != std::string::npos);

  r = run("pipeline", "bad_stage", R"({"stages": ["varspec", "qnd"], "model": {"family": "ising", "n": 4}})");
  CHECK(r.code == 1);

  r = run("ed", "bad_flag", R"({"model": {"family": "ising", "n": 4}})", "--jobs 0");
  CHECK(r.code == 1);

  const std::string missing = std::string(ERGOLEARN_EXE) + " ed --config /nonexistent.json 2>/dev/null";
  const int st = std::system(missing.c_str());
  CHECK(WEXITSTATUS(st) == 1);
}

TEST_CASE("runtime failures exit with 2") {
  const auto r = run("ed", "too_big", R"({"model": {"family": "ising", "n": 10, "max_dim": 64}})");
  CHECK(r.code == 2);
  CHECK(r.err.find("runtime error") != std::string::npos);
}

TEST_CASE("sweep is reproducible and resumes from checkpoints") {
  const std::string cfg = R"({"model": {"family": "ising", "h": 0.3},
    "n": [6, 7], "grid": {"g": [0.5, 1.0]},
    "ensemble": {"sizes": {"6": 10, "7": 16}},
    "metrics": ["r", "entropy", "delta_m"]})";
  REQUIRE(run("sweep", "sweep_a", cfg).code == 0);
  REQUIRE(run("sweep", "sweep_b", cfg, "--jobs 2").code == 0);
  const std::string a = slurp(out("sweep_a") / "sweep.csv");
  CHECK(a == slurp(out("sweep_b") / "sweep.csv"));
  CHECK(csv(out("sweep_a") / "sweep.csv").size() == 1 + 4 * 3);
  CHECK(fs::exists(out("sweep_a") / "manifest.json"));

  // Drop one checkpoint and damage another; the rerun recomputes both.
  fs::remove(out("sweep_a") / "checkpoints" / "point_1.csv");
  {
    std::ofstream os(out("sweep_a") / "checkpoints" / "point_2.csv");
    os << "# stale\nising,7,0.5,r,0,0,1\n";
  }
  REQUIRE(run("sweep", "sweep_a", cfg).code == 0);
  CHECK(slurp(out("sweep_a") / "sweep.csv") == a);
  CHECK(slurp(out("sweep_a") / "checkpoints" / "point_2.csv").find("# end") != std::string::npos);
}

TEST_CASE("single-point sweep agrees with varspec") {
  REQUIRE(run("sweep", "one", R"({"model": {"family": "ising", "g": 0.8, "h": 0.4},
    "n": 6, "ensemble": {"sizes": {"6": 9}}, "metrics": ["delta_m", "sigma2_max"]})").code == 0);
  REQUIRE(run("varspec", "vs", R"({"model": {"family": "ising", "n": 6, "g": 0.8, "h": 0.4},
    "ensemble": {"size": 9}})").code == 0);
  const auto rows = csv(out("one") / "sweep.csv");
  REQUIRE(rows.size() == 3);
  const auto s = summary("vs");
  CHECK(rows[1][2] == "delta_m");
  CHECK(std::stod(rows[1][3]) == doctest::Approx(s["delta_m"]["mean"].get<double>()).epsilon(1e-12));
  CHECK(std::stod(rows[2][3]) == doctest::Approx(s["sigma2_max"]["mean"].get<double>()).epsilon(1e-12));
}

TEST_CASE("shadows pipeline writes datasets and is seed-deterministic") {
  const std::string cfg = R"({"stages": ["qnd", "shadows", "varspec"],
    "model": {"family": "ising", "n": 4, "g": 0.9, "h": 0.3},
    "qnd": {"rounds": 4}, "shadows": {"shots": [200, 400]},
    "state": {"eigenstate": "mid"}})";
  REQUIRE(run("pipeline", "pipe_a", cfg, "--seed 7").code == 0);
  REQUIRE(run("pipeline", "pipe_b", cfg, "--seed 7").code == 0);
  REQUIRE(run("pipeline", "pipe_c", cfg, "--seed 8").code == 0);
  const fs::path ds = out("pipe_a") / "shadows_n400_r0.txt";
  REQUIRE(fs::exists(ds));
  const std::string text = slurp(ds);
  CHECK(text == slurp(out("pipe_b") / "shadows_n400_r0.txt"));
  CHECK(text != slurp(out("pipe_c") / "shadows_n400_r0.txt"));
  std::istringstream is(text);
  std::string line;
  const std::regex pat("^[XYZ]{4}:[+-]{4}$");
  int count = 0;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#') continue;
    CHECK(std::regex_match(line, pat));
    ++count;
  }
  CHECK(count == 400);
  CHECK(fs::exists(out("pipe_a") / "shadows_curve.csv"));
  CHECK(summary("pipe_a")["stages"].size() == 3);
}

TEST_CASE("recorded dataset feeds the varspec stage") {
  const fs::path ds = out("pipe_a") / "shadows_n400_r0.txt";
  REQUIRE(fs::exists(ds));
  const auto r = run("shadows", "replay", R"({"shadows": {"input": ")" + ds.string() + R"("}, "varspec": {"kernel": 1}})");
  CHECK(r.code == 0);
  CHECK(fs::exists(out("replay") / "summary.json"));
}

TEST_CASE("qnd and ff commands") {
  auto r = run("qnd", "qnd", R"({"model": {"family": "ising", "n": 5, "g": 0.9, "h": 0.3}, "qnd": {"rounds": 3}})");
  CHECK(r.code == 0);
  CHECK(fs::exists(out("qnd") / "qnd_rounds.csv"));

  r = run("ff", "ff", R"({"n": 12, "g": 1.0, "state": {"n_max": 2}, "q_curve": [1, 2, 3]})");
  CHECK(r.code == 0);
  CHECK(fs::exists(out("ff") / "ff_q_curve.csv"));
  CHECK(fs::exists(out("ff") / "ff_fits.csv"));
  const auto s = summary("ff");
  CHECK(s.contains("zero_modes"));

  r = run("ff", "ff_odd", R"({"n": 11})");
  CHECK(r.code == 1);
  CHECK(r.err.find("n:") != std::string::npos);
}
