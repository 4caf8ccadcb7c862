#include "dqwalk/cli.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

using namespace dqwalk;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const RunConfig& cfg) {
  std::ostringstream out, err;
  const int code = dispatch(cfg, out, err);
  return {code, out.str(), err.str()};
}

RunConfig config(const std::string& sub) {
  RunConfig cfg;
  cfg.subcommand = sub;
  return cfg;
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

const std::string kDataDir = DQWALK_TEST_DATA_DIR;

}  // namespace

TEST_CASE("walk: fully broken line stays at the origin", "[cli]") {
  auto cfg = config("walk");
  cfg.channel.builtin = "broken-line";
  cfg.channel.p = 1.0;
  cfg.t = 50;
  const auto r = run(cfg);
  REQUIRE(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0] == std::vector<std::string>{"x", "prob"});
  CHECK(rows[1][0] == "0");
  CHECK(std::abs(std::stod(rows[1][1]) - 1.0) <= 1e-12);
}

TEST_CASE("walk: two coherent steps", "[cli]") {
  auto cfg = config("walk");
  cfg.t = 2;
  const auto rows = parse_csv(run(cfg).out);
  REQUIRE(rows.size() == 4);
  CHECK(rows[1][0] == "-2");
  CHECK(std::abs(std::stod(rows[1][1]) - 0.25) <= 1e-15);
  CHECK(rows[2][0] == "0");
  CHECK(std::abs(std::stod(rows[2][1]) - 0.5) <= 1e-15);
  CHECK(rows[3][0] == "2");
  CHECK(std::abs(std::stod(rows[3][1]) - 0.25) <= 1e-15);
}

TEST_CASE("walk: invalid channel file", "[cli]") {
  auto cfg = config("walk");
  cfg.channel.file = kDataDir + "/incomplete_channel.json";
  const auto r = run(cfg);
  CHECK(r.code == kExitInvalidInput);
  CHECK(r.out.empty());
  CHECK(r.err.find("residual") != std::string::npos);
}

TEST_CASE("walk: channel file matches the builtin channel", "[cli]") {
  auto builtin = config("walk");
  builtin.t = 6;
  auto from_file = builtin;
  from_file.channel.file = kDataDir + "/hadamard_channel.json";
  const auto a = run(builtin), b = run(from_file);
  CHECK(b.code == kExitOk);
  CHECK(a.out == b.out);
}

TEST_CASE("moments agree with the walk oracle", "[cli]") {
  const std::string path = "cli_walk_moments.csv";
  auto walk = config("walk");
  walk.channel.builtin = "broken-line";
  walk.t = 20;
  walk.coin = "mixed";
  walk.moments_output = path;
  std::ostringstream sink;
  CHECK(cmd_walk(walk, sink, sink) == kExitOk);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  const auto oracle = parse_csv(buf.str());

  auto moments = walk;
  moments.subcommand = "moments";
  moments.moments_output.clear();
  const auto engine = parse_csv(run(moments).out);
  REQUIRE(engine.size() == oracle.size());
  REQUIRE(engine.size() == 22);
  CHECK(engine[0] == std::vector<std::string>{"t", "first", "second", "variance"});
  for (std::size_t i = 1; i < engine.size(); ++i) {
    for (std::size_t c = 1; c < 4; ++c) CHECK(std::abs(std::stod(engine[i][c]) - std::stod(oracle[i][c])) <= 1e-9);
  }
  std::remove(path.c_str());
}

TEST_CASE("moments: asymptotic on a coherent channel is a regime error", "[cli]") {
  auto cfg = config("moments");
  cfg.channel.builtin = "broken-line";
  cfg.channel.p = 0.0;
  cfg.asymptotic = true;
  const auto r = run(cfg);
  CHECK(r.code == kExitRegime);
  CHECK(r.err.find("NotContracting") != std::string::npos);
}

TEST_CASE("moments: asymptotic output", "[cli]") {
  auto cfg = config("moments");
  cfg.channel.builtin = "broken-line";
  cfg.coin = "mixed";
  cfg.asymptotic = true;
  const auto rows = parse_csv(run(cfg).out);
  REQUIRE(rows.size() == 2);
  CHECK(rows[1][0] == "1024");
  CHECK(std::abs(std::stod(rows[1][1])) <= 1e-12);
}

TEST_CASE("moments: naive and recursive agree", "[cli]") {
  auto cfg = config("moments");
  cfg.channel.builtin = "broken-line";
  cfg.t = 12;
  const auto a = parse_csv(run(cfg).out);
  cfg.naive = true;
  const auto b = parse_csv(run(cfg).out);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 1; i < a.size(); ++i) {
    for (std::size_t c = 1; c < 4; ++c) CHECK(std::abs(std::stod(a[i][c]) - std::stod(b[i][c])) <= 1e-11);
  }
}

TEST_CASE("moments: JSON output", "[cli]") {
  auto cfg = config("moments");
  cfg.t = 5;
  cfg.format = "json";
  const auto j = nlohmann::json::parse(run(cfg).out);
  CHECK(j.at("n_k").get<int>() == 28);
  CHECK(j.at("second").size() == 6);
  cfg.format = "xml";
  CHECK(run(cfg).code == kExitInvalidInput);
}

TEST_CASE("invalid inputs map to exit code 2", "[cli]") {
  auto cfg = config("moments");
  cfg.coin = "0.5,0,0,0.9";
  CHECK(run(cfg).code == kExitInvalidInput);
  cfg.coin = "up";
  CHECK(run(cfg).code == kExitInvalidInput);
  cfg = config("moments");
  cfg.channel.builtin = "broken-line";
  cfg.channel.theta2 = 0.0;
  const auto r = run(cfg);
  CHECK(r.code == kExitInvalidInput);
  CHECK(r.err.find("PhaseConstraintViolated") != std::string::npos);
  CHECK(run(config("nonsense")).code == kExitInvalidInput);
}

TEST_CASE("diffusion: crossover", "[cli]") {
  auto cfg = config("diffusion");
  cfg.critical = true;
  const auto rows = parse_csv(run(cfg).out);
  REQUIRE(rows.size() == 2);
  const double pc = std::stod(rows[1][0]);
  CHECK(pc >= 0.412);
  CHECK(pc <= 0.422);
  CHECK(std::abs(std::stod(rows[1][1]) - 0.5) <= 1e-9);
}

TEST_CASE("diffusion: default sweep", "[cli]") {
  const auto rows = parse_csv(run(config("diffusion")).out);
  REQUIRE(rows.size() == 21);
  CHECK(rows[0] == std::vector<std::string>{"p", "K", "D", "I", "method"});
  CHECK(rows.back()[0] == "1");
  CHECK(rows.back()[1] == "0.5");
}

TEST_CASE("diffusion: per-point errors are annotated", "[cli]") {
  auto cfg = config("diffusion");
  cfg.p_values = {0.0, 0.5};
  const auto r = run(cfg);
  CHECK(r.code == kExitOk);
  const auto rows = parse_csv(r.out);
  REQUIRE(rows.size() == 3);
  CHECK(rows[1][4] == "error:BallisticRegime");
  CHECK(rows[2][4] == "closed-form");
}

TEST_CASE("diffusion: slope column", "[cli]") {
  auto cfg = config("diffusion");
  cfg.p_values = {0.5};
  cfg.with_slope = true;
  cfg.coin = "mixed";
  const auto rows = parse_csv(run(cfg).out);
  REQUIRE(rows.size() == 2);
  REQUIRE(rows[1].size() == 6);
  const double d = std::stod(rows[1][2]), slope = std::stod(rows[1][5]);
  CHECK(std::abs(slope - d) <= 0.02 * d);
}

TEST_CASE("xcheck passes on the clean engine", "[cli]") {
  auto cfg = config("xcheck");
  cfg.t = 10;
  cfg.coin_reduction = true;
  const auto r = run(cfg);
  CHECK(r.code == kExitOk);
  CHECK(r.out.find("FAIL") == std::string::npos);
  CHECK(r.out.find("coin-reduction second-moment") != std::string::npos);
}

TEST_CASE("xcheck catches a sign flip in G", "[cli]") {
  auto cfg = config("xcheck");
  cfg.t = 10;
  cfg.inject_g_sign_flip = true;
  const auto r = run(cfg);
  CHECK(r.code == kExitCheckFailed);
  bool second_failed = false;
  for (const auto& row : parse_csv(r.out)) {
    if (row.size() == 4 && row[0].find("oracle second-moment") == 0 && row[3] == "FAIL") second_failed = true;
  }
  CHECK(second_failed);
}

TEST_CASE("RunConfig JSON round trip", "[cli]") {
  RunConfig cfg = config("diffusion");
  cfg.channel.builtin = "coin-dephasing";
  cfg.channel.q = 0.125;
  cfg.channel.theta1 = 0.1;
  cfg.coin = "0.5,0.1,0.2,0.3";
  cfg.t = 77;
  cfg.n_k = 513;
  cfg.p_values = {0.1, 1.0 / 3.0};
  cfg.with_slope = true;
  cfg.tol = 1e-7;
  const RunConfig back = nlohmann::json::parse(nlohmann::json(cfg).dump()).get<RunConfig>();
  CHECK(back == cfg);

  const RunConfig defaults = nlohmann::json::parse("{}").get<RunConfig>();
  CHECK(defaults == RunConfig{});
}

TEST_CASE("CSV output does not depend on the thread count", "[cli]") {
  auto cfg = config("moments");
  cfg.channel.builtin = "broken-line";
  cfg.channel.p = 0.3;
  cfg.t = 60;
  std::vector<std::string> outputs;
  for (const char* threads : {"1", "2", "7", "0"}) {
    setenv("DQWALK_THREADS", threads, 1);
    outputs.push_back(run(cfg).out);
  }
  unsetenv("DQWALK_THREADS");
  for (const auto& o : outputs) CHECK(o == outputs.front());
}
