#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "acmorse/cli.hpp"
#include "acmorse/io.hpp"
#include "acmorse/rng.hpp"
#include "json.hpp"
#include "oracles.hpp"

using namespace acmorse;
namespace fs = std::filesystem;

namespace {

struct EnvGuard {
  std::string name;
  EnvGuard(const std::string& n, const std::string& value) : name(n) {
    ::setenv(n.c_str(), value.c_str(), 1);
  }
  ~EnvGuard() { ::unsetenv(name.c_str()); }
};

fs::path scratch_dir(const std::string& tag) {
  fs::path dir = fs::path("cli_scratch") / tag;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& body) {
  fs::path p = dir / "run.cfg";
  std::ofstream out(p);
  out << body;
  out.close();
  return p.string();
}

int run_cli(std::initializer_list<std::string> args) {
  std::vector<std::string> store(args);
  std::vector<const char*> argv;
  argv.push_back("acmorse");
  for (const auto& a : store) argv.push_back(a.c_str());
  return run_command(static_cast<int>(argv.size()), argv.data());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> dir_contents(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(dir))
    if (e.is_regular_file()) out[fs::relative(e.path(), dir).string()] = slurp(e.path());
  return out;
}

const std::string kCircleBase =
    "grid.dim = 1\n"
    "grid.lengths = 6.283185307179586\n"
    "grid.sizes = 48\n"
    "metric.kind = euclidean\n"
    "potential.kind = cubic\n";

}  // namespace

TEST_CASE("config parsing: values, lists, comments, defaults") {
  auto cfg = Config::parse_text(
      "# leading comment\n"
      "grid.dim = 2   # trailing comment\n"
      "grid.lengths = 6.28, 3.14\n"
      "grid.sizes = 16, 8\n"
      "\n"
      "epsilon = 0.4\n"
      "solve.tol = 1e-9\n"
      "rng.seed = 18446744073709551615\n",
      "inline.cfg");
  CHECK(cfg.has("epsilon"));
  CHECK(!cfg.has("flow.dt"));
  CHECK(cfg.get_int("grid.dim") == 2);
  CHECK(cfg.get_double("epsilon") == 0.4);
  CHECK(cfg.get_double("flow.dt", 0.25) == 0.25);
  CHECK(cfg.get_string("metric.kind", "euclidean") == "euclidean");
  CHECK(cfg.get_seed("rng.seed", 0) == 18446744073709551615ULL);

  auto lens = cfg.get_doubles("grid.lengths");
  REQUIRE(lens.size() == 2);
  CHECK(lens[1] == 3.14);
  auto sizes = cfg.get_ints("grid.sizes");
  REQUIRE(sizes.size() == 2);
  CHECK(sizes[0] == 16);

  CHECK(!Config::known_keys().empty());
}

TEST_CASE("config diagnostics carry origin, line, and key") {
  // unknown key
  try {
    Config::parse_text("grid.dim = 1\nnot.a.key = 3\n", "bad.cfg");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("bad.cfg:2") != std::string::npos);
    CHECK(msg.find("not.a.key") != std::string::npos);
  }

  // duplicate key cites the first definition
  try {
    Config::parse_text("epsilon = 1\nepsilon = 2\n", "dup.cfg");
    FAIL("expected a parse error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("dup.cfg:2") != std::string::npos);
    CHECK(msg.find("dup.cfg:1") != std::string::npos);
  }

  // missing '='
  CHECK_THROWS_AS(Config::parse_text("epsilon\n", "x.cfg"), std::invalid_argument);
  // uppercase and underscores are not legal key characters
  CHECK_THROWS_AS(Config::parse_text("Epsilon = 1\n", "x.cfg"), std::invalid_argument);
  CHECK_THROWS_AS(Config::parse_text("grid_dim = 1\n", "x.cfg"), std::invalid_argument);

  // malformed numbers name the key and where it came from
  auto cfg = Config::parse_text("epsilon = fast\n", "y.cfg");
  try {
    cfg.get_double("epsilon");
    FAIL("expected a value error");
  } catch (const std::invalid_argument& e) {
    const std::string msg = e.what();
    CHECK(msg.find("epsilon") != std::string::npos);
    CHECK(msg.find("y.cfg:1") != std::string::npos);
  }
  // absent required key
  CHECK_THROWS_AS(cfg.get_double("grid.dim"), std::invalid_argument);
}

TEST_CASE("environment overrides beat file values") {
  auto cfg = Config::parse_text("epsilon = 1.5\n", "env.cfg");
  EnvGuard guard("ACMORSE_EPSILON", "2.5");
  cfg.apply_environment();
  CHECK(cfg.get_double("epsilon") == 2.5);

  // unregistered names are never picked up
  EnvGuard junk("ACMORSE_NOT_A_KEY", "1");
  cfg.apply_environment();  // must not throw
}

TEST_CASE("field CSV round-trips bitwise") {
  auto dir = scratch_dir("field_csv");
  auto g = TorusGrid::make(2, {2.0 * M_PI, 1.0}, {6, 5});
  Rng rng(3);
  Eigen::VectorXd v(g->node_count());
  for (std::int64_t i = 0; i < g->node_count(); ++i) v[i] = rng.sym() / 3.0;
  ScalarField u(g, v);

  const std::string path = (dir / "u.csv").string();
  write_field_csv(path, u);
  auto back = read_field_csv(path, g);
  CHECK((back.values - u.values).cwiseAbs().maxCoeff() == 0.0);

  const std::string text = slurp(path);
  CHECK(text.rfind("i0,i1,value\n", 0) == 0);

  // reading onto a mismatched grid is refused
  auto g2 = TorusGrid::make(2, {2.0 * M_PI, 1.0}, {5, 6});
  CHECK_THROWS_AS(read_field_csv(path, g2), std::invalid_argument);

  // corrupt one multi-index and the offending line is named
  std::string bad = text;
  const auto pos = bad.find("\n1,0,");
  REQUIRE(pos != std::string::npos);
  bad.replace(pos, 5, "\n1,9,");
  std::ofstream(dir / "bad.csv") << bad;
  try {
    read_field_csv((dir / "bad.csv").string(), g);
    FAIL("expected a format error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("bad.csv") != std::string::npos);
  }
}

TEST_CASE("tensor metric CSV builds the SPD metric") {
  auto dir = scratch_dir("tensor_csv");
  auto g = TorusGrid::make(2, {2.0 * M_PI, 2.0 * M_PI}, {4, 4});
  {
    std::ofstream out(dir / "g.csv");
    out << "i0,i1,g00,g01,g11\n";
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out << i << "," << j << ",1.2,0.1,0.9\n";
  }
  auto m = read_tensor_metric_csv((dir / "g.csv").string(), g);
  CHECK(m->sqrt_det(7) == doctest::Approx(std::sqrt(1.2 * 0.9 - 0.01)).epsilon(1e-14));

  {
    std::ofstream out(dir / "bad.csv");
    out << "i0,i1,g00,g01,g11\n";
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) out << i << "," << j << ",-1.0,0.0,1.0\n";
  }
  CHECK_THROWS_AS(read_tensor_metric_csv((dir / "bad.csv").string(), g),
                  std::invalid_argument);
}

TEST_CASE("full-precision formatting round-trips doubles") {
  for (double x : {1.0 / 3.0, 0.1, -1e-300, 2.0 * M_PI, 123456789.123456789}) {
    const std::string s = format_full(x);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
}

TEST_CASE("spectrum subcommand writes the closed-form eigenvalues") {
  auto dir = scratch_dir("spectrum_cmd");
  auto cfg = write_config(dir, kCircleBase +
                                   "epsilon = 1.0\n"
                                   "spectrum.count = 8\n"
                                   "output.dir = " +
                                   (dir / "out").string() + "\n");
  CHECK(run_cli({"spectrum", "--config", cfg}) == 0);

  std::ifstream in(dir / "out" / "spectrum.csv");
  std::string line;
  std::getline(in, line);
  CHECK(line == "index,eigenvalue,cluster");
  const int mode_of[8] = {0, 1, 1, 2, 2, 3, 3, 4};
  for (int i = 0; i < 8; ++i) {
    REQUIRE(std::getline(in, line));
    std::stringstream row(line);
    std::string idx, ev, cl;
    std::getline(row, idx, ',');
    std::getline(row, ev, ',');
    std::getline(row, cl, ',');
    CHECK(std::stoi(idx) == i);
    const double expect = oracles::axis_mode_eigenvalue(mode_of[i], 48, 2.0 * M_PI);
    CHECK(std::strtod(ev.c_str(), nullptr) == doctest::Approx(expect).epsilon(1e-10));
  }
  CHECK(!std::getline(in, line));

  // environment override shrinks the request
  {
    EnvGuard guard("ACMORSE_SPECTRUM_COUNT", "3");
    auto dir2 = scratch_dir("spectrum_env");
    auto cfg2 = write_config(dir2, kCircleBase +
                                       "epsilon = 1.0\n"
                                       "spectrum.count = 8\n"
                                       "output.dir = " +
                                       (dir2 / "out").string() + "\n");
    CHECK(run_cli({"spectrum", "--config", cfg2}) == 0);
    const std::string text = slurp(dir2 / "out" / "spectrum.csv");
    int rows = -1;  // header
    for (char c : text)
      if (c == '\n') ++rows;
    CHECK(rows == 3);
  }
}

TEST_CASE("solve subcommand converges and reports through files") {
  auto dir = scratch_dir("solve_cmd");
  auto cfg = write_config(dir, kCircleBase +
                                   "epsilon = 0.95\n"
                                   "solve.initial.kind = mode\n"
                                   "solve.initial.mode = 1\n"
                                   "solve.initial.amplitude = 0.3\n"
                                   "output.dir = " +
                                   (dir / "out").string() + "\n");
  CHECK(run_cli({"solve", "--config", cfg}) == 0);
  CHECK(fs::exists(dir / "out" / "solution.csv"));
  const std::string j = slurp(dir / "out" / "solve.json");
  CHECK(j.find("\"converged\": true") != std::string::npos);
  CHECK(j.find("\"index\": 1") != std::string::npos);

  // a start outside the a-priori box diverges: exit 1
  auto bad = write_config(scratch_dir("solve_bad"),
                          kCircleBase +
                              "epsilon = 0.95\n"
                              "solve.initial.kind = constant\n"
                              "solve.initial.value = 150\n"
                              "output.dir = " +
                              (dir / "bad_out").string() + "\n");
  CHECK(run_cli({"solve", "--config", bad}) == 1);
}

TEST_CASE("sweep runs are byte-identical across reruns") {
  auto dir = scratch_dir("sweep_cmd");
  const std::string body = kCircleBase +
                           "epsilon = 0.4\n"
                           "deflation.seeds = 40\n"
                           "rng.seed = 11\n";
  auto cfg1 = write_config(dir, body + "output.dir = " + (dir / "out1").string() + "\n");
  CHECK(run_cli({"sweep", "--config", cfg1}) == 0);
  // same run, different target directory, --out override
  CHECK(run_cli({"sweep", "--config", cfg1, "--out", (dir / "out2").string()}) == 0);

  auto c1 = dir_contents(dir / "out1");
  auto c2 = dir_contents(dir / "out2");
  REQUIRE(!c1.empty());
  REQUIRE(c1.size() == c2.size());
  for (const auto& [name, bytes] : c1) {
    REQUIRE(c2.count(name) == 1);
    CHECK(bytes == c2[name]);
  }

  // a different rng seed changes the outcome of the random search
  CHECK(run_cli({"sweep", "--config", cfg1, "--out", (dir / "out3").string(), "--seed", "12"}) ==
        0);
  CHECK(slurp(dir / "out3" / "sweep.json") != slurp(dir / "out1" / "sweep.json"));
}

TEST_CASE("continue subcommand brackets the first bifurcation and draws the diagram") {
  auto dir = scratch_dir("continue_cmd");
  auto cfg = write_config(dir, kCircleBase +
                                   "epsilon = 1.1\n"
                                   "epsilon.lo = 0.8\n"
                                   "epsilon.hi = 1.15\n"
                                   "solve.initial.kind = constant\n"
                                   "solve.initial.value = 0\n"
                                   "continuation.direction = -1\n"
                                   "output.dir = " +
                                   (dir / "out").string() + "\n");
  CHECK(run_cli({"continue", "--config", cfg}) == 0);

  const std::string csv = slurp(dir / "out" / "branch.csv");
  CHECK(csv.rfind("arclength,epsilon,supnorm,energy,index,nullity,event", 0) == 0);
  CHECK(csv.find("branch-point") != std::string::npos);

  const std::string svg = slurp(dir / "out" / "diagram.svg");
  CHECK(svg.find("<svg") != std::string::npos);
  CHECK(svg.find("polyline") != std::string::npos);
  CHECK(svg.find("circle") != std::string::npos);

  const auto j = nlohmann::json::parse(slurp(dir / "out" / "branch.json"));
  const double eps1 = 1.0 / oracles::axis_mode_eigenvalue(1, 48, 2.0 * M_PI);
  REQUIRE(!j["events"].empty());
  const auto& ev = j["events"][0];
  CHECK(ev["kind"] == "branch-point");
  // the bracket encloses the discrete crossing at the requested resolution
  const double lo = ev["epsilon.lo"].get<double>();
  const double hi = ev["epsilon.hi"].get<double>();
  CHECK(hi - lo <= 1e-6);
  CHECK(lo <= eps1);
  CHECK(eps1 <= hi);
}

TEST_CASE("flow subcommand records a monotone trajectory") {
  auto dir = scratch_dir("flow_cmd");
  auto cfg = write_config(dir, kCircleBase +
                                   "epsilon = 0.5\n"
                                   "solve.initial.kind = constant\n"
                                   "solve.initial.value = 0.5\n"
                                   "flow.steps = 4000\n"
                                   "output.dir = " +
                                   (dir / "out").string() + "\n");
  CHECK(run_cli({"flow", "--config", cfg}) == 0);
  const std::string csv = slurp(dir / "out" / "trajectory.csv");
  CHECK(csv.rfind("t,energy,supnorm,nearest", 0) == 0);
  const std::string j = slurp(dir / "out" / "flow.json");
  CHECK(j.find("\"equilibrated\": true") != std::string::npos);

  // energies in the CSV are nonincreasing
  std::stringstream ss(csv);
  std::string line;
  std::getline(ss, line);
  double prev = 1e300;
  while (std::getline(ss, line)) {
    std::stringstream row(line);
    std::string t, e;
    std::getline(row, t, ',');
    std::getline(row, e, ',');
    const double en = std::strtod(e.c_str(), nullptr);
    CHECK(en <= prev + 1e-9 * (1.0 + std::abs(prev)));
    prev = en;
  }
}

TEST_CASE("homology subcommand certifies the large-epsilon complex") {
  auto dir = scratch_dir("homology_cmd");
  auto cfg = write_config(dir, kCircleBase +
                                   "epsilon = 3.0\n"
                                   "deflation.seeds = 30\n"
                                   "homology.seeds = 30\n"
                                   "rng.seed = 4\n"
                                   "output.dir = " +
                                   (dir / "out").string() + "\n");
  CHECK(run_cli({"homology", "--config", cfg}) == 0);
  const auto j = nlohmann::json::parse(slurp(dir / "out" / "homology.json"));
  REQUIRE(j["ranks"].size() == 2);
  CHECK(j["ranks"][0] == 1);
  CHECK(j["ranks"][1] == 0);
  CHECK(j["parity"]["verdict"] == "PASS");
  CHECK(j["heuristic"] == false);
  for (const auto& b : j["boundaries"]) CHECK(b["reliability"] == "exact");
}

TEST_CASE("verify subcommand reports PASS and the singular band as exit codes") {
  auto dir = scratch_dir("verify_cmd");
  auto cfg = write_config(dir, kCircleBase +
                                   "epsilon = 0.4\n"
                                   "verify.seeds = 80\n"
                                   "rng.seed = 2\n"
                                   "output.dir = " +
                                   (dir / "out").string() + "\n");
  CHECK(run_cli({"verify", "--config", cfg}) == 0);
  const std::string txt = slurp(dir / "out" / "verify.txt");
  CHECK(txt.find("PASS") != std::string::npos);
  const std::string j = slurp(dir / "out" / "verify.json");
  CHECK(j.find("\"verdict\": \"PASS\"") != std::string::npos);

  // inside the singular band the statement does not apply: exit 2
  const double eps1 = 1.0 / oracles::axis_mode_eigenvalue(1, 48, 2.0 * M_PI);
  auto dir2 = scratch_dir("verify_na");
  auto cfg2 = write_config(dir2, kCircleBase + "epsilon = " + format_full(eps1 * (1.0 + 2e-5)) +
                                     "\n"
                                     "verify.seeds = 10\n"
                                     "output.dir = " +
                                     (dir2 / "out").string() + "\n");
  CHECK(run_cli({"verify", "--config", cfg2}) == 2);
  CHECK(slurp(dir2 / "out" / "verify.txt").find("NOT_APPLICABLE") != std::string::npos);
}

TEST_CASE("bad invocations exit nonzero without tracebacks") {
  CHECK(run_cli({"not-a-command"}) != 0);
  CHECK(run_cli({"spectrum"}) != 0);  // --config is required
  auto dir = scratch_dir("bad_cfg");
  auto cfg = write_config(dir, "grid.dim = 7\n");
  CHECK(run_cli({"spectrum", "--config", cfg}) == 1);
  CHECK(run_cli({"spectrum", "--config", (dir / "missing.cfg").string()}) == 1);
}
