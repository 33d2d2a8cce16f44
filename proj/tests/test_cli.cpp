#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "tdram/io.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path work_dir() {
  static const fs::path dir = [] {
    auto d = fs::temp_directory_path() / "tdram_cli_test";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

RunResult run(const std::string& args, const std::string& env_prefix = "") {
  const fs::path out = work_dir() / "stdout.txt";
  const fs::path err = work_dir() / "stderr.txt";
  const std::string cmd = env_prefix + std::string(TDRAM_CLI_PATH) + " " + args + " > " +
                          out.string() + " 2> " + err.string();
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out), slurp(err)};
}

}  // namespace

TEST_CASE("simulate writes a CSV our reader accepts") {
  const fs::path csv = work_dir() / "wave.csv";
  const auto r = run("simulate --cell --sequence 0,1,2 --dt 2p --out " + csv.string());
  REQUIRE(r.exit_code == 0);

  const auto wf = tdram::waveform_from_csv(slurp(csv));
  CHECK(wf.samples() > 1000);
  CHECK(wf.has_node("bl2"));
  CHECK(wf.has_node("x"));
  CHECK(wf.has_branch("m1"));

  // Fig.-5-style read behavior on BL2: held high after reading 0,
  // partially discharged after 1, deeply discharged after 2.
  const double T = 5.2e-9;
  const double bl2_read0 = wf.node_at("bl2", 1 * T - 50e-12);
  const double bl2_read1 = wf.node_at("bl2", 2 * T - 50e-12);
  const double bl2_read2 = wf.node_at("bl2", 3 * T - 50e-12);
  CHECK(bl2_read0 > 0.98 * 1.2);
  CHECK(bl2_read1 < bl2_read0);
  CHECK(bl2_read1 > 0.4);
  CHECK(bl2_read2 < 0.4);

  // round-trip: serialize the parsed waveform and parse it again
  const auto again = tdram::waveform_from_csv(tdram::waveform_to_csv(wf));
  CHECK(again.samples() == wf.samples());
  CHECK(again.node("bl2") == wf.node("bl2"));
}

TEST_CASE("simulate exit codes") {
  CHECK(run("simulate --netlist /nonexistent/missing.sp").exit_code == 3);

  const auto bad_trit = run("simulate --cell --sequence 3");
  CHECK(bad_trit.exit_code == 1);
  CHECK(bad_trit.err.find("3") != std::string::npos);

  const fs::path bad = work_dir() / "bad.sp";
  std::ofstream(bad) << "C1 x 0 0.1q\n";
  const auto parse_fail = run("simulate --netlist " + bad.string());
  CHECK(parse_fail.exit_code == 1);
  CHECK(parse_fail.err.find("unknown suffix") != std::string::npos);

  CHECK(run("simulate").exit_code == 1);  // neither --netlist nor --cell
}

TEST_CASE("netlist-check") {
  const fs::path good = work_dir() / "good.sp";
  std::ofstream(good) << "V1 a 0 dc 1.2\nC1 a 0 1f\n.end\n";
  const auto ok = run("netlist-check --netlist " + good.string());
  CHECK(ok.exit_code == 0);
  CHECK(ok.out.find("ok:") != std::string::npos);

  const fs::path bad = work_dir() / "check_bad.sp";
  std::ofstream(bad) << "V1 a 0 dc 1.2\nR1 a 0 1k\n";
  const auto fail = run("netlist-check --netlist " + bad.string());
  CHECK(fail.exit_code == 1);
  CHECK(fail.err.find("line 2") != std::string::npos);
  CHECK(fail.out.empty());  // no metrics on failure paths
}

TEST_CASE("measure reports the metric keys") {
  const auto r = run("measure --cell --sequence 0,1,2 --dt 2p");
  REQUIRE(r.exit_code == 0);
  for (const char* key :
       {"write_time_s", "read_sense_time_s", "avg_current_a", "avg_power_w"})
    CHECK(r.out.find(key) != std::string::npos);

  const auto variant = run("measure --cell --sequence 0,1 --dt 2p --metric-variant final-value");
  CHECK(variant.exit_code == 0);

  const auto sense = run("measure --cell --sequence 0,1 --dt 2p --with-sense");
  REQUIRE(sense.exit_code == 0);
  CHECK(sense.out.find("sense_read_trit") != std::string::npos);
  CHECK(sense.out.find("sense.supply_current_a") != std::string::npos);
  CHECK(sense.out.find("sense_time_0 = 0\n") != std::string::npos);
}

TEST_CASE("mc determinism and exit codes") {
  const fs::path j1 = work_dir() / "mc1.json";
  const fs::path c1 = work_dir() / "mc1.csv";
  const fs::path j2 = work_dir() / "mc2.json";
  const fs::path c2 = work_dir() / "mc2.csv";

  const std::string base = "mc --trials 3 --seed 42 --out-json ";
  REQUIRE(run(base + j1.string() + " --out-csv " + c1.string()).exit_code == 0);
  REQUIRE(run(base + j2.string() + " --out-csv " + c2.string()).exit_code == 0);
  CHECK(slurp(j1) == slurp(j2));
  CHECK(slurp(c1) == slurp(c2));

  // 3 trials -> header plus three rows
  int lines = 0;
  std::istringstream csv(slurp(c1));
  for (std::string line; std::getline(csv, line);) ++lines;
  CHECK(lines == 4);

  CHECK(run("mc --trials 0").exit_code == 1);

  // TDRAM_SEED fallback matches an explicit --seed
  const fs::path j3 = work_dir() / "mc3.json";
  REQUIRE(run("mc --trials 3 --out-json " + j3.string(), "TDRAM_SEED=42 ").exit_code == 0);
  CHECK(slurp(j3) == slurp(j1));
}

TEST_CASE("mc single-parameter sweep") {
  const auto r = run("mc --trials 2 --seed 7 --vary temp");
  REQUIRE(r.exit_code == 0);
  CHECK(r.out.find("write_time_s_trit2") != std::string::npos);

  CHECK(run("mc --trials 2 --seed 7 --vary bogus").exit_code == 1);
}
