#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "cli/commands.hpp"
#include "cli/config.hpp"

namespace fs = std::filesystem;
using namespace gridquant::cli;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) {
    path = fs::temp_directory_path() / ("gridquant_cli_" + name);
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  out << text;
  return p;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string first_line(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

std::size_t line_count(const fs::path& p) {
  std::ifstream in(p);
  std::size_t n = 0;
  for (std::string line; std::getline(in, line);) ++n;
  return n;
}

struct Result {
  int code;
  std::string out, err;
};

Result invoke(std::vector<std::string> args) {
  args.insert(args.begin(), "gridquant");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = run_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

const char* kQuadratic = R"({
  "problem": {"type": "quadratic", "nodes": 5, "dim": 3, "mu": 1, "l": 6, "seed": 2},
  "algorithm": "gd", "bits": 16, "horizon": 80, "eps": 1e-4
})";

const char* kAnalytic = R"({
  "analytic": {"gain": 1, "sigma": 0.9, "bound": 1, "dim": 1},
  "bits": {"min": 1, "max": 20}, "eps": 0.1,
  "rate": {"model": "constant", "capacity": 0.6931471805599453}
})";

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("config parsing") {
    const ExperimentConfig c = parse_config(kQuadratic);
    CHECK(c.problem->nodes == 5);
    CHECK(c.bits.value == 16);
    CHECK_THROWS_AS(parse_config(R"({"analytic": {}, "colour": 3})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"analytic": {"sigma": 1.2}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"type": "quadratic", "nodez": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"analytic": {}, "bits": 0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"analytic": {}, "bits": {"min": 9, "max": 3}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"analytic": {}, "loss": 1.0})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"analytic": {}, "seed": -1})"), ConfigError);
    CHECK_THROWS_AS(parse_config("{not json"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"type": "csv", "path": "/no/such.csv"}})"), ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"type": "quadratic"}, "algorithm": "dual"})"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(R"({"problem": {"type": "quadratic"}, "topology": "path"})"),
                    ConfigError);
    CHECK(parse_config(R"({"analytic": {}, "bits": "auto"})").bits.kind == BitsConfig::Kind::Auto);
  }

  TEST_CASE("run writes a trace and reports the envelope") {
    TempDir dir("run");
    const auto cfg = write_file(dir.path / "q.json", kQuadratic);
    const Result r = invoke({"run", "--config", cfg.string(), "--out", (dir.path / "o").string()});
    CHECK(r.code == 0);
    CHECK(r.out.find("envelope=held") != std::string::npos);
    CHECK(r.out.find("status=completed") != std::string::npos);
    CHECK(first_line(dir.path / "o" / "trace.csv") == "k,err,r_k,bits_cum,t_seconds");
    CHECK(line_count(dir.path / "o" / "trace.csv") == 82);
  }

  TEST_CASE("exit codes") {
    TempDir dir("codes");
    const auto out = (dir.path / "o").string();
    std::string low = kQuadratic;
    low.replace(low.find("\"bits\": 16"), 10, "\"bits\": 2");
    const auto low_cfg = write_file(dir.path / "low.json", low);
    const Result div = invoke({"run", "--config", low_cfg.string(), "--out", out});
    CHECK(div.code == kExitDivergent);
    CHECK(div.err.find("min_bits") != std::string::npos);

    std::string fast = kQuadratic;
    fast.replace(fast.find("\"bits\": 16"), 10, "\"bits\": 8, \"alpha\": 0.05");
    const auto fast_cfg = write_file(dir.path / "fast.json", fast);
    const Result over = invoke({"run", "--config", fast_cfg.string(), "--out", out});
    CHECK(over.code == kExitGridOverflow);
    CHECK(over.out.find("status=grid_overflow") != std::string::npos);

    CHECK(invoke({"run", "--config", (dir.path / "missing.json").string()}).code == kExitConfig);
    const auto bad = write_file(dir.path / "bad.json", R"({"analytic": {}, "extra": 1})");
    CHECK(invoke({"sweep-bits", "--config", bad.string()}).code == kExitConfig);
    const auto csv = write_file(dir.path / "csvprob.json",
                                R"({"problem": {"type": "csv", "path": "nowhere.csv"}})");
    CHECK(invoke({"run", "--config", csv.string()}).code == kExitConfig);
    CHECK(invoke({"frobnicate", "--config", bad.string()}).code == kExitConfig);
    CHECK(invoke({"run"}).code == kExitConfig);
  }

  TEST_CASE("sweep-bits marks the argmin") {
    TempDir dir("sweep");
    const auto cfg = write_file(dir.path / "a.json", kAnalytic);
    const auto out = dir.path / "o";
    CHECK(invoke({"sweep-bits", "--config", cfg.string(), "--out", out.string()}).code == 0);
    const auto file = out / "sweep_bits.csv";
    CHECK(first_line(file) == "b,k_eps,B_eps,T_eps,empirical_bits,argmin");
    // b = 4..20 converge
    CHECK(line_count(file) == 18);
    const std::string text = read_file(file);
    CHECK(text.find("\n6,") != std::string::npos);
    const auto row6 = text.substr(text.find("\n6,") + 1);
    CHECK(row6.substr(0, row6.find('\n')).back() == '1');

    std::string single = kAnalytic;
    single.replace(single.find("{\"min\": 1, \"max\": 20}"), 21, "7");
    const auto one = write_file(dir.path / "one.json", single);
    CHECK(invoke({"sweep-bits", "--config", one.string(), "--out", out.string()}).code == 0);
    CHECK(line_count(file) == 2);
  }

  TEST_CASE("empirical bits never exceed the closed form") {
    TempDir dir("empirical");
    const auto cfg = write_file(dir.path / "e.json", R"({
      "problem": {"type": "quadratic", "nodes": 4, "dim": 2, "mu": 1, "l": 4, "seed": 5},
      "bits": {"min": 1, "max": 14}, "eps": 1e-3, "horizon": 2000, "empirical": true})");
    const auto out = dir.path / "o";
    CHECK(invoke({"sweep-bits", "--config", cfg.string(), "--out", out.string()}).code == 0);
    std::ifstream in(out / "sweep_bits.csv");
    std::string line;
    std::getline(in, line);
    int rows = 0;
    while (std::getline(in, line)) {
      std::vector<std::string> f;
      std::stringstream ss(line);
      for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
      REQUIRE(f.size() >= 5);
      REQUIRE_FALSE(f[4].empty());
      CHECK(std::stod(f[4]) <= std::stod(f[2]) + std::stod(f[0]));
      ++rows;
    }
    CHECK(rows > 0);
  }

  TEST_CASE("ttc and retrans schemas") {
    TempDir dir("ttc");
    std::string text = kAnalytic;
    text.insert(text.rfind('}'), R"(, "loss_grid": [0.01, 0.05, 0.3], "links": 20)");
    const auto cfg = write_file(dir.path / "t.json", text);
    const auto out = dir.path / "o";
    CHECK(invoke({"ttc", "--config", cfg.string(), "--out", out.string()}).code == 0);
    CHECK(first_line(out / "ttc.csv") == "b,theta,p,rate_model,k_eps,T_eps,LB,UB,rho");
    CHECK(line_count(out / "ttc.csv") == 1 + 17 * 3);

    std::string rt = text;
    rt.replace(rt.find("{\"min\": 1, \"max\": 20}"), 21, "6");
    const auto rcfg = write_file(dir.path / "r.json", rt);
    CHECK(invoke({"retrans", "--config", rcfg.string(), "--out", out.string(), "--replicas", "500"})
              .code == 0);
    CHECK(first_line(out / "retrans.csv") == "p,LB,UB,sim_mean,ci_lo,ci_hi");
    {
      std::ifstream in(out / "retrans.csv");
      std::string line;
      std::getline(in, line);
      while (std::getline(in, line)) {
        std::vector<double> f;
        std::stringstream ss(line);
        for (std::string cell; std::getline(ss, cell, ',');) f.push_back(std::stod(cell));
        REQUIRE(f.size() == 6);
        CHECK(f[1] <= f[3]);
        CHECK(f[3] <= f[2]);
      }
    }

    CHECK(invoke({"retrans", "--config", rcfg.string(), "--out", out.string(), "--replicas", "0"})
              .code == 0);
    CHECK(read_file(out / "retrans.csv").find(",,,\n") != std::string::npos);

    std::string fixed = rt;
    fixed.insert(fixed.rfind('}'), R"(, "policy": "fixed_rounds", "delta": 0.9)");
    const auto fcfg = write_file(dir.path / "f.json", fixed);
    CHECK(invoke({"retrans", "--config", fcfg.string(), "--out", out.string(), "--replicas", "300"})
              .code == 0);
    CHECK(first_line(out / "retrans.csv") ==
          "p,LB,UB,sim_mean,ci_lo,ci_hi,rounds,success_rate,success_se");
  }

  TEST_CASE("identical config and seed give byte-identical output") {
    TempDir dir("determinism");
    std::string text = kQuadratic;
    text.insert(text.rfind('}'), R"(, "rate": {"model": "constant", "capacity": 1.0}, "loss": 0.1)");
    const auto cfg = write_file(dir.path / "d.json", text);
    for (const char* cmd : {"run", "sweep-bits"}) {
      const auto a = dir.path / "a", b = dir.path / "b";
      invoke({cmd, "--config", cfg.string(), "--out", a.string(), "--seed", "77"});
      invoke({cmd, "--config", cfg.string(), "--out", b.string(), "--seed", "77"});
      for (const auto& entry : fs::directory_iterator(a)) {
        CHECK(read_file(entry.path()) == read_file(b / entry.path().filename()));
      }
    }
    std::string rt = kAnalytic;
    rt.replace(rt.find("{\"min\": 1, \"max\": 20}"), 21, "6");
    rt.insert(rt.rfind('}'), R"(, "loss_grid": [0.05, 0.2], "links": 20)");
    const auto rcfg = write_file(dir.path / "r.json", rt);
    invoke({"retrans", "--config", rcfg.string(), "--out", (dir.path / "ra").string(), "--replicas", "300"});
    invoke({"retrans", "--config", rcfg.string(), "--out", (dir.path / "rb").string(), "--replicas", "300"});
    CHECK(read_file(dir.path / "ra" / "retrans.csv") == read_file(dir.path / "rb" / "retrans.csv"));
    invoke({"retrans", "--config", rcfg.string(), "--out", (dir.path / "rc").string(), "--replicas",
            "300", "--seed", "5"});
    CHECK(read_file(dir.path / "ra" / "retrans.csv") != read_file(dir.path / "rc" / "retrans.csv"));
  }

  TEST_CASE("dual and projected configurations run") {
    TempDir dir("variants");
    const auto dual = write_file(dir.path / "dual.json", R"({
      "problem": {"type": "quadratic", "nodes": 6, "dim": 2, "mu": 1, "l": 3, "seed": 9},
      "algorithm": "dual", "topology": {"type": "geometric", "radius": 0.7, "seed": 3},
      "bits": "auto", "horizon": 50})");
    const Result d = invoke({"run", "--config", dual.string(), "--out", (dir.path / "o").string()});
    CHECK(d.code == 0);
    CHECK(d.out.find("envelope=held") != std::string::npos);

    write_file(dir.path / "g.txt", "3\n0 1\n1 2\n");
    const auto edges = write_file(dir.path / "edges.json", R"({
      "problem": {"type": "quadratic", "nodes": 3, "dim": 2, "seed": 9},
      "algorithm": "dual", "topology": {"type": "edge_list", "path": "g.txt"},
      "bits": 20, "horizon": 20})");
    CHECK(invoke({"run", "--config", edges.string(), "--out", (dir.path / "o").string()}).code == 0);

    const auto pgd = write_file(dir.path / "pgd.json", R"({
      "problem": {"type": "logistic", "samples": 200, "dim": 4, "nodes": 4, "rho": 1, "seed": 1},
      "algorithm": "pgd", "bits": "auto", "horizon": 30})");
    CHECK(invoke({"run", "--config", pgd.string(), "--out", (dir.path / "o").string()}).code == 0);

    write_file(dir.path / "data.csv", "1,0.5,1.0\n-1,-0.2,-1.1\n1,1.5,0.3\n-1,-1.0,0.2\n");
    const auto csv = write_file(dir.path / "csv.json", R"({
      "problem": {"type": "csv", "path": "data.csv", "nodes": 2, "rho": 0.5},
      "bits": 18, "horizon": 30})");
    CHECK(invoke({"run", "--config", csv.string(), "--out", (dir.path / "o").string()}).code == 0);
  }
}
