#include <doctest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

namespace {

using nlohmann::json;

struct CliResult {
  int code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args) {
  std::string cmd = std::string("\"") + FKCAP_CLI_PATH + "\" " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::string out;
  char buf[4096];
  size_t n = 0;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, n);
  int status = pclose(pipe);
  CliResult r;
  r.out = out;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  REQUIRE(out.good());
  out << content;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Fixtures {
  Fixtures() {
    write_file("cli_id1.json", R"({"m": 1, "kraus": [[[1]]], "label": "identity"})");
    write_file("cli_pair2.json",
               R"({"m": 2, "kraus": [[[1,0],[0,1]], [[1,0],[0,-1]]]})");
    write_file("cli_e11.json", R"({"m": 2, "kraus": [[[1,0],[0,0]]]})");
    write_file("cli_bad.json", R"({"m": 2, "kraus": [[[1]]]})");
    write_file("cli_c1.json", R"([[2, 0], [0, 2]])");
  }
};

const Fixtures& fixtures() {
  static Fixtures f;
  return f;
}

json parse_stdout(const CliResult& r) {
  return json::parse(r.out);
}

}  // namespace

TEST_CASE("cap: identity tuple converges to capacity one") {
  fixtures();
  CliResult r = run_cli("cap cli_id1.json");
  REQUIRE(r.code == 0);
  json out = parse_stdout(r);
  CHECK(out["command"] == "cap");
  CHECK(out["label"] == "identity");
  CHECK(out["m"] == 1);
  CHECK(out["config"]["tol"] == 1e-8);
  CHECK(out["capacity"]["status"] == "converged");
  CHECK(std::abs(out["capacity"]["cap_estimate"].get<double>() - 1.0) < 1e-10);
}

TEST_CASE("cap: the corner tuple is reported as rank decreasing") {
  fixtures();
  CliResult r = run_cli("cap cli_e11.json");
  REQUIRE(r.code == 0);
  json out = parse_stdout(r);
  CHECK(out["capacity"]["status"] == "rank_decreasing_suspected");
  CHECK(out["capacity"]["cap_estimate"] == 0.0);
}

TEST_CASE("cap: the oracle agrees with the scaling estimate") {
  fixtures();
  CliResult r = run_cli("cap cli_pair2.json --oracle --tol 1e-12");
  REQUIRE(r.code == 0);
  json out = parse_stdout(r);
  CHECK(std::abs(out["capacity"]["cap_estimate"].get<double>() - 4.0) < 1e-8);
  CHECK(std::abs(out["oracle"]["value"].get<double>() - 4.0) < 1e-4);
  CHECK(out["oracle"]["relative_gap"].get<double>() < 1e-4);
}

TEST_CASE("fkdet: both routes agree and the integer bound holds") {
  fixtures();
  CliResult r = run_cli("fkdet cli_pair2.json --grid-points 800 --check-corollary");
  REQUIRE(r.code == 0);
  json out = parse_stdout(r);
  double want = std::sqrt(2.0) * std::exp(-0.5);
  CHECK(std::abs(out["capacity_route"]["value"].get<double>() - want) < 1e-6);
  CHECK(out["capacity_route"]["certified"] == true);
  CHECK(out["relative_discrepancy"].get<double>() <= 1e-2);
  CHECK(out["corollary"]["checked"] == true);
  CHECK(out["corollary"]["holds"] == true);
}

TEST_CASE("fkdet: spectral route reports the corner atom") {
  fixtures();
  CliResult r = run_cli("fkdet cli_e11.json --route spectral --grid-points 400");
  REQUIRE(r.code == 0);
  json out = parse_stdout(r);
  CHECK(out["spectral_route"]["atom_flag"] == true);
  CHECK(out["spectral_route"]["value"] == 0.0);
  CHECK(out["spectral_route"]["log_det"].is_null());
  CHECK(out["spectral_route"]["atom_mass"].get<double>() >= 0.25);
}

TEST_CASE("exit codes: 2 for malformed input, flags, or usage") {
  fixtures();
  CHECK(run_cli("fkdet cli_id1.json --route sideways").code == 2);
  CHECK(run_cli("cap cli_bad.json").code == 2);
  CHECK(run_cli("cap cli_missing_file.json").code == 2);
  CHECK(run_cli("").code == 2);
  CHECK(run_cli("notacommand cli_id1.json").code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE("scale: doubling the left factor multiplies the capacity by 16") {
  fixtures();
  CliResult r = run_cli("scale cli_pair2.json --c1 cli_c1.json");
  REQUIRE(r.code == 0);
  write_file("cli_scaled.json", r.out);
  CliResult c = run_cli("cap cli_scaled.json --tol 1e-12");
  REQUIRE(c.code == 0);
  json out = parse_stdout(c);
  CHECK(std::abs(out["capacity"]["cap_estimate"].get<double>() - 64.0) < 1e-6);
}

TEST_CASE("moments: identity table is Catalan with zero slack") {
  fixtures();
  CliResult r = run_cli("moments cli_id1.json --kmax 4");
  REQUIRE(r.code == 0);
  json out = parse_stdout(r);
  REQUIRE(out["table"].size() == 5);
  for (int k = 0; k <= 4; ++k) {
    CHECK(out["table"][k]["k"] == k);
    CHECK(out["table"][k]["ok"] == true);
    CHECK(out["table"][k]["moment"] == out["table"][k]["catalan"]);
  }
}

TEST_CASE("density: summary plus reproducible csv") {
  fixtures();
  CliResult r1 = run_cli(
      "density cli_id1.json --grid-points 201 --eps 1e-2 --csv cli_den.csv");
  REQUIRE(r1.code == 0);
  json out = parse_stdout(r1);
  CHECK(std::abs(out["summary"]["mass"].get<double>() - 1.0) < 0.05);
  CHECK(out["summary"]["atom_at_zero"].get<double>() <= 1e-3);
  CHECK(out["summary"]["failed_points"] == 0);
  CHECK(out["summary"]["points"] == 201);
  CHECK(std::abs(out["summary"]["support_radius"].get<double>() - 2.0) < 1e-12);

  std::string csv1 = slurp("cli_den.csv");
  CHECK(csv1.substr(0, 15) == "energy,density\n");
  CHECK(csv1.find('\r') == std::string::npos);
  long lines = 0;
  for (char ch : csv1)
    if (ch == '\n') ++lines;
  CHECK(lines == 202);

  CliResult r2 = run_cli(
      "density cli_id1.json --grid-points 201 --eps 1e-2 --csv cli_den.csv");
  CHECK(r2.out == r1.out);
  CHECK(slurp("cli_den.csv") == csv1);
  std::remove("cli_den.csv");
}

TEST_CASE("randmat: identical flags give identical bytes") {
  fixtures();
  CliResult r1 = run_cli("randmat cli_pair2.json --N 16 --trials 4 --seed 9 --threads 1");
  CliResult r2 = run_cli("randmat cli_pair2.json --N 16 --trials 4 --seed 9 --threads 1");
  REQUIRE(r1.code == 0);
  CHECK(r1.out == r2.out);
  json out = parse_stdout(r1);
  CHECK(out["report"]["per_trial"].size() == 4);
  CHECK(out["report"]["singular_count"] == 0);
}

TEST_CASE("config files override defaults but not explicit flags") {
  fixtures();
  write_file("cli_cfg.json", R"({"kmax": 3})");
  CliResult r1 = run_cli("moments cli_id1.json --config cli_cfg.json");
  REQUIRE(r1.code == 0);
  CHECK(parse_stdout(r1)["table"].size() == 4);

  CliResult r2 = run_cli("moments cli_id1.json --kmax 2 --config cli_cfg.json");
  REQUIRE(r2.code == 0);
  CHECK(parse_stdout(r2)["table"].size() == 3);

  write_file("cli_cfg_bad.json", R"({"bogus": 1})");
  CHECK(run_cli("moments cli_id1.json --config cli_cfg_bad.json").code == 2);

  write_file("cli_cfg_type.json", R"({"kmax": "three"})");
  CHECK(run_cli("moments cli_id1.json --config cli_cfg_type.json").code == 2);
}
