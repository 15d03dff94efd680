#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "cli_util.hpp"
#include "cnmf/io.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace cnmf;
using test::run_cli;
namespace fs = std::filesystem;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "cnmf_test_cli";

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

struct Fresh {
  Fresh() {
    fs::remove_all(kRoot);
    fs::create_directories(kRoot);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Fresh, "gen writes the default instance") {
  write(kRoot / "cfg.json", R"({"N":100,"T":250,"K":3,"L":5,"p":0.75,"seed":1})");
  const auto p = run_cli("gen " + (kRoot / "cfg.json").string() + " --out " + (kRoot / "a").string());
  CHECK_MESSAGE(p.code == 0, p.out);
  const auto X = io::read_csv(kRoot / "a" / "X.csv");
  CHECK(X.rows() == 100);
  CHECK(X.cols() == 250);
  CHECK(fs::exists(kRoot / "a" / "W_5.csv"));
  CHECK(fs::exists(kRoot / "a" / "meta.json"));

  CHECK(run_cli("gen " + (kRoot / "cfg.json").string() + " --out " + (kRoot / "b").string()).code == 0);
  CHECK(slurp(kRoot / "a" / "X.csv") == slurp(kRoot / "b" / "X.csv"));
}

TEST_CASE_FIXTURE(Fresh, "gen usage errors") {
  write(kRoot / "cfg.json", R"({"N":100,"K":3,"L":5})");
  CHECK(run_cli("gen " + (kRoot / "cfg.json").string() + " --out " + (kRoot / "a").string()).code == 2);
  CHECK(run_cli("gen --N 10 --T 250 --K 3 --L 5 --out " + (kRoot / "a").string()).code == 2);
  CHECK(run_cli("gen --N 100 --T 250 --K 3 --L 5").code == 2);
  CHECK(run_cli("frobnicate").code == 2);
  CHECK(run_cli("--help").code == 0);
}

TEST_CASE_FIXTURE(Fresh, "gen with noise, fit and score") {
  const std::string d = (kRoot / "inst").string();
  REQUIRE(run_cli("gen --N 40 --T 160 --K 3 --L 4 --seed 2 --noise uniform --beta 0.001 --out " + d).code == 0);
  CHECK(fs::exists(kRoot / "inst" / "X_noisy.csv"));

  const std::string out = (kRoot / "fit").string();
  const auto fit = run_cli("fit " + d + "/X.csv --alg lecs --K 3 --L 4 --t-sweep --truth " + d + "/H.csv --out " + out);
  REQUIRE_MESSAGE(fit.code == 0, fit.out);
  const auto report = io::Json::parse(slurp(kRoot / "fit" / "report.json"));
  CHECK(report.at("relMse").get<double>() <= 1e-9);
  CHECK(report.at("score").get<double>() >= 1 - 1e-6);
  CHECK(report.contains("sweep"));

  const auto sc = run_cli("score " + d + "/H.csv " + out + "/H.csv");
  REQUIRE(sc.code == 0);
  CHECK(io::Json::parse(sc.out).at("score").get<double>() >= 1 - 1e-6);

  const std::string anls = (kRoot / "anls").string();
  const auto a = run_cli("fit " + d + "/X_noisy.csv --alg anls --K 3 --L 4 --iters 3 --init " + out + " --out " + anls);
  CHECK_MESSAGE(a.code == 0, a.out);
  const auto ar = io::Json::parse(slurp(kRoot / "anls" / "report.json"));
  CHECK(ar.at("lossTrace").size() == 4);

  CHECK(run_cli("fit " + d + "/X.csv --alg mult --K 3 --L 4 --iters 5 --seed 3 --out " + (kRoot / "m").string()).code == 0);
  CHECK(run_cli("fit " + d + "/X.csv --alg lecs-pre --K 3 --L 4 --t 1e-9 --out " + (kRoot / "p").string()).code == 0);
}

TEST_CASE_FIXTURE(Fresh, "fit errors") {
  CHECK(run_cli("fit " + (kRoot / "missing.csv").string() + " --K 1 --L 1").code == 2);
  write(kRoot / "x.csv", "1,2\n3,4\n");
  CHECK(run_cli("fit " + (kRoot / "x.csv").string() + " --K 1").code == 2);
  CHECK(run_cli("fit " + (kRoot / "x.csv").string() + " --K 1 --L 1 --alg magic").code == 2);
  CHECK(run_cli("fit " + (kRoot / "x.csv").string() + " --K 3 --L 3").code == 2);
  // a threshold above every column norm leaves nothing to locate
  CHECK(run_cli("fit " + (kRoot / "x.csv").string() + " --K 1 --L 1 --t 100 --out " + (kRoot / "o").string()).code == 1);
}

TEST_CASE_FIXTURE(Fresh, "bench") {
  write(kRoot / "bench.json",
        R"({"instance":{"N":20,"T":100,"K":2,"L":3},"trials":1,"noise_kinds":["uniform","gaussian","exponential"],)"
        R"("betas":[0.001,0.01,0.1,1,10],"algorithms":["lecs","mult"],"mult_iterations":10})");
  const auto p = run_cli("bench " + (kRoot / "bench.json").string() + " --seed 4 --out " + (kRoot / "r.csv").string());
  REQUIRE_MESSAGE(p.code == 0, p.out);
  const std::string csv = slurp(kRoot / "r.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 31);
  CHECK(csv.rfind("noise,beta,trial,alg,score,rel_mse,seconds,chosen_t\n", 0) == 0);

  write(kRoot / "bad.json", R"({"trials":"many"})");
  CHECK(run_cli("bench " + (kRoot / "bad.json").string()).code == 2);
}

TEST_CASE_FIXTURE(Fresh, "score") {
  write(kRoot / "h.csv", "1,0,2\n0,3,0\n");
  write(kRoot / "scaled.csv", "0,6,0\n2,0,4\n");
  write(kRoot / "orth.csv", "2,0,-1\n-2,0,1\n");
  write(kRoot / "wide.csv", "1,0,2,0\n0,3,0,1\n");
  const auto s = run_cli("score " + (kRoot / "h.csv").string() + " " + (kRoot / "h.csv").string());
  REQUIRE(s.code == 0);
  CHECK(io::Json::parse(s.out).at("score").get<double>() == doctest::Approx(1.0));
  const auto sc = io::Json::parse(run_cli("score " + (kRoot / "h.csv").string() + " " + (kRoot / "scaled.csv").string()).out);
  CHECK(sc.at("score").get<double>() == doctest::Approx(1.0));
  CHECK(sc.at("permutation") == io::Json::array({1, 0}));
  const auto orth = run_cli("score " + (kRoot / "h.csv").string() + " " + (kRoot / "orth.csv").string());
  CHECK(io::Json::parse(orth.out).at("score").get<double>() == doctest::Approx(0.0));
  CHECK(run_cli("score " + (kRoot / "h.csv").string() + " " + (kRoot / "wide.csv").string()).code == 2);
}
