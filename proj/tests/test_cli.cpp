#define DOCTEST_CONFIG_IMPLEMENT
#include "doctest.h"

#include "json.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>
#include <vector>

// Exit-code and output contract of the command-line tool, exercised through
// real subprocesses.  argv[1] = path to the binary under test.

namespace {

std::string g_bin;

struct RunResult {
  int code = -1;
  std::string out;
};

RunResult run_tool(const std::string& args) {
  RunResult r;
  std::string cmd = g_bin + " " + args + " 2>/dev/null";
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
  int status = pclose(pipe);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string tmp_path(const std::string& name) {
  std::filesystem::create_directories("cli_tmp");
  return "cli_tmp/" + name;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("mk-config emits the smallest feasible level") {
  auto r = run_tool("mk-config --eps 1/2 --d 2");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema"] == "v1");
  CHECK(j["eps"] == "1/2");
  CHECK(j["d"] == 2);
  CHECK(j["m"] == 2);
  CHECK(j["exponents"] == nlohmann::json::array({1, 1}));

  auto r3 = run_tool("mk-config --eps 1/4 --d 3");
  REQUIRE(r3.code == 0);
  CHECK(nlohmann::json::parse(r3.out)["m"] == 5);

  CHECK(run_tool("mk-config --eps 3/4 --d 2").code == 2);
  CHECK(run_tool("mk-config --eps 1/2 --d 0").code == 2);
  CHECK(run_tool("mk-config --eps nonsense --d 2").code == 2);
}

TEST_CASE("analyze reports the sandwich at the flagship point") {
  std::string cfg = tmp_path("half_two.json");
  REQUIRE(run_tool("mk-config --eps 1/2 --d 2 --out " + cfg).code == 0);

  auto r = run_tool("analyze " + cfg + " --p 2");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["regime"] == "middle");
  CHECK(double(j["q"]) == doctest::Approx(2.0));
  CHECK(double(j["A_p"]) == doctest::Approx(0.70710678).epsilon(1e-7));
  CHECK(double(j["B"]) == doctest::Approx(1.92360).epsilon(1e-4));
  CHECK(double(j["lower"]) == doctest::Approx(1.0458250).epsilon(1e-5));
  CHECK(double(j["upper"]) == doctest::Approx(1.1952286).epsilon(1e-5));
  CHECK(double(j["eta"]) == doctest::Approx(0.9039013).epsilon(1e-5));
  CHECK(double(j["lower/B"]) == doctest::Approx(1.0458250 / 1.9235938).epsilon(1e-4));

  // deterministic output bytes
  auto r2 = run_tool("analyze " + cfg + " --p 2");
  CHECK(r.out == r2.out);

  CHECK(run_tool("analyze " + cfg + " --p 1").code == 2);
  CHECK(run_tool("analyze missing.json --p 2").code == 2);
  std::string corrupt = tmp_path("corrupt.json");
  write_file(corrupt, "{ not json ");
  CHECK(run_tool("analyze " + corrupt + " --p 2").code == 2);
}

TEST_CASE("endpoint ratios for both witnesses") {
  std::string cfg = tmp_path("quarter_eight.json");
  REQUIRE(run_tool("mk-config --eps 1/4 --d 8 --out " + cfg).code == 0);

  auto r = run_tool("endpoint " + cfg + " --lambda 0.5 --witness single");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(double(j["A"]) == doctest::Approx(1.4426950).epsilon(1e-6));
  CHECK(double(j["c"]) == doctest::Approx(0.3431525).epsilon(1e-5));
  // superlevel is exactly Q1, so the ratio collapses to 1/((1+A) 2 log(e+2))
  CHECK(double(j["ratio"]) == doctest::Approx(0.1319364).epsilon(1e-5));
  CHECK(double(j["sharpness"]) == doctest::Approx(0.3222793).epsilon(1e-5));
  CHECK(double(j["expmoment"]) <= double(j["expmoment_upper"]));
  CHECK(double(j["expmoment_upper"]) <= double(j["inv_eps"]));

  auto rc = run_tool("endpoint " + cfg + " --lambda 0.125 --witness center");
  REQUIRE(rc.code == 0);
  auto jc = nlohmann::json::parse(rc.out);
  CHECK(double(jc["ratio"]) == doctest::Approx(0.1488606).epsilon(1e-4));

  CHECK(run_tool("endpoint " + cfg + " --lambda -1 --witness single").code == 2);
  CHECK(run_tool("endpoint " + cfg + " --lambda 0 --witness single").code == 2);
  CHECK(run_tool("endpoint " + cfg + " --lambda 0.5 --witness tower").code == 2);
}

TEST_CASE("sweep produces aligned deterministic CSV") {
  std::string spec = tmp_path("sweep_small.json");
  write_file(spec, R"({"schema":"v1","eps":["1/2","1/4"],"d":[1,2,4],"p":[2.0],"mode":"float"})");

  auto r = run_tool("sweep " + spec);
  REQUIRE(r.code == 0);
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : r.out) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else
      cur += ch;
  }
  REQUIRE(lines.size() == 7);  // header + 2*3*1 rows
  CHECK(lines[0] ==
        "eps,d,p,q,A_p,regime,B,lower,upper,lower/B,upper/B,eta,C_pow_inv_q,status");
  for (std::size_t i = 1; i < lines.size(); ++i) {
    CHECK(lines[i].substr(lines[i].size() - 3) == ",ok");
    // fourteen columns on every row
    CHECK(std::count(lines[i].begin(), lines[i].end(), ',') == 13);
  }
  CHECK(lines[1].substr(0, 8) == "1/2,1,2,");

  auto r2 = run_tool("sweep " + spec);
  CHECK(r.out == r2.out);  // byte-identical reruns

  // canonical field names and spec-file outputs are honored
  std::string canon = tmp_path("sweep_canon.json");
  std::string canon_csv = tmp_path("sweep_canon.csv");
  write_file(canon, std::string(R"({"schema":"v1","eps_grid":["1/2","1/4"],"d_grid":[1,2,4],)") +
                        R"("p_grid":[2.0],"mode":"float","outputs":{"csv":")" + canon_csv +
                        R"("}})");
  auto rc = run_tool("sweep " + canon);
  REQUIRE(rc.code == 0);
  std::ifstream canon_in(canon_csv, std::ios::binary);
  REQUIRE(canon_in.good());
  std::string canon_bytes((std::istreambuf_iterator<char>(canon_in)),
                          std::istreambuf_iterator<char>());
  CHECK(canon_bytes == r.out);  // same grid, same bytes, routed to the file

  // empty grid is a usage error
  std::string empty = tmp_path("sweep_empty.json");
  write_file(empty, R"({"schema":"v1","eps":[],"d":[1],"p":[2.0],"mode":"float"})");
  CHECK(run_tool("sweep " + empty).code == 2);

  // exact mode is capped at enumerable dimensions; failed rows flip the exit
  std::string exact = tmp_path("sweep_exact.json");
  write_file(exact, R"({"schema":"v1","eps":["1/2"],"d":[2,30],"p":[2.0],"mode":"exact"})");
  auto rx = run_tool("sweep " + exact);
  CHECK(rx.code == 3);
  CHECK(rx.out.find("error: exact mode requires d <= 24") != std::string::npos);
  CHECK(rx.out.find("1/2,2,2,") != std::string::npos);  // healthy row still present
}

TEST_CASE("sweep plot data files") {
  std::string spec = tmp_path("sweep_plot.json");
  write_file(spec,
             R"({"schema":"v1","eps":["1/2","1/8"],"d":[1,4,16],"p":[2.0,4.0],"mode":"float"})");
  std::string pfx = tmp_path("plot");
  auto r = run_tool("sweep " + spec + " --out " + tmp_path("sweep_plot.csv") +
                    " --plot-data " + pfx);
  REQUIRE(r.code == 0);
  for (int pi = 1; pi <= 2; ++pi) {
    std::ifstream in(pfx + ".p" + std::to_string(pi) + ".dat");
    REQUIRE(in.good());
    std::string l1, l2;
    std::getline(in, l1);
    std::getline(in, l2);
    CHECK(l1.substr(0, 6) == "# p = ");
    CHECK(l2 == "# A_p upper/B");
    int points = 0;
    double prev = -1.0;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      ++points;
      double a = std::stod(line);
      CHECK(a >= prev);  // sorted by A_p
      prev = a;
    }
    CHECK(points == 6);
  }
}

TEST_CASE("family analysis over the two corollary rules") {
  auto r = run_tool("family --rule closed --p0 2 --jmax 100");
  REQUIRE(r.code == 0);
  auto j = nlohmann::json::parse(r.out);
  CHECK(j["bounded_range"] == "[2, inf]");
  CHECK(j["members"] == 100);
  CHECK(j["checkpoints"] == nlohmann::json::array({10, 100}));
  REQUIRE(j["trajectories"].size() == 3);
  CHECK(double(j["trajectories"][0]["p"]) == doctest::Approx(2.0));
  CHECK_FALSE(bool(j["trajectories"][0]["divergent"]));
  CHECK(double(j["trajectories"][1]["p"]) == doctest::Approx(1.5));
  CHECK(bool(j["trajectories"][1]["divergent"]));
  CHECK(double(j["sup_d"]) == doctest::Approx(10000.0));

  auto ro = run_tool("family --rule open --p0 2 --jmax 1000");
  REQUIRE(ro.code == 0);
  auto jo = nlohmann::json::parse(ro.out);
  CHECK(jo["bounded_range"] == "(2, inf]");
  CHECK(bool(jo["trajectories"][0]["divergent"]));

  CHECK(run_tool("family --rule closed --p0 1 --jmax 100").code == 2);
  CHECK(run_tool("family --rule closed --p0 2 --jmax 0").code == 2);
  CHECK(run_tool("family --rule sideways --p0 2 --jmax 10").code == 2);
}

TEST_CASE("verify small grid passes end to end") {
  auto r = run_tool("verify --grid small");
  CHECK(r.code == 0);
  CHECK(r.out.find("RESULT PASS") != std::string::npos);
  CHECK(run_tool("verify --grid sideways").code == 2);
}

TEST_CASE("usage errors and help") {
  CHECK(run_tool("--help").code == 0);
  CHECK(run_tool("").code == 2);
  CHECK(run_tool("frobnicate").code == 2);
}

int main(int argc, char** argv) {
  std::vector<char*> pass;
  pass.push_back(argv[0]);
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (g_bin.empty() && a.rfind("--", 0) != 0)
      g_bin = a;
    else
      pass.push_back(argv[i]);
  }
  if (g_bin.empty()) {
    std::fprintf(stderr, "usage: test_cli <toruslab-binary> [doctest args]\n");
    return 1;
  }
  doctest::Context ctx;
  ctx.applyCommandLine(static_cast<int>(pass.size()), pass.data());
  return ctx.run();
}
