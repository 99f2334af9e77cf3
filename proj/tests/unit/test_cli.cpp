#include <filesystem>
#include <fstream>
#include <sstream>

#include "commands.hpp"
#include "doctest.h"

using namespace icann;
using namespace icann::cli;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& f) const { return (path / f).string(); }
};

int run(std::vector<std::string> args) {
  args.insert(args.begin(), "icann");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(int(argv.size()), argv.data());
}

std::string slurp(const std::string& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("configuration merging") {
  json cfg = default_config();
  merge_config(cfg, json::parse(R"({"paths": {"steps_per_ramp": 50}, "train": {"gradient": "exact"}})"));
  CHECK(cfg["paths"]["steps_per_ramp"] == 50);
  CHECK(train_config(cfg).gradient == GradientMode::Exact);

  CHECK_THROWS_AS(merge_config(cfg, json::parse(R"({"pathz": {}})")), ConfigError);
  CHECK_THROWS_AS(merge_config(cfg, json::parse(R"({"paths": {"UT": "big"}})")), ConfigError);
  CHECK_THROWS_AS(merge_config(cfg, json::parse(R"({"paths": {"steps_per_ramp": 2.5}})")), ConfigError);
  try {
    merge_config(cfg, json::parse(R"({"train": {"lr": 0.1}})"));
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("train.lr") != std::string::npos);
  }
}

TEST_CASE("key=value overrides") {
  json cfg = default_config();
  apply_override(cfg, "train.learning_rate=0.05");
  apply_override(cfg, "generate.cases=UT,Cyc");
  apply_override(cfg, "paths.Cyc=[1.2,0.9]");
  apply_override(cfg, "train.pretrain=false");
  apply_override(cfg, "generate.model=tschoegl");
  CHECK(cfg["train"]["learning_rate"] == 0.05);
  CHECK(cfg["generate"]["cases"] == json::array({"UT", "Cyc"}));
  CHECK(path_spec(cfg, PathKind::Cyclic).amplitude_compression == 0.9);
  CHECK(cfg["train"]["pretrain"] == false);
  CHECK(cfg["generate"]["model"] == "tschoegl");
  CHECK_THROWS_AS(apply_override(cfg, "train.nope=1"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "train.learning_rate"), ConfigError);
  CHECK_THROWS_AS(apply_override(cfg, "train.learning_rate=fast"), ConfigError);
  json ok = default_config();
  apply_override(ok, "train.groups=psi_e,nothing");
  CHECK_THROWS_AS(train_config(ok), ConfigError);
}

TEST_CASE("generate writes loadable, reproducible datasets") {
  TempDir dir("icann_cli_generate");
  REQUIRE(run({"generate", "--model", "vm_af", "--cases", "UT,EB,UC", "--out", dir / "a",
               "--set", "paths.steps_per_ramp=40"}) == 0);
  REQUIRE(run({"generate", "--model", "vm_af", "--cases", "UT,EB,UC", "--out", dir / "b",
               "--set", "paths.steps_per_ramp=40"}) == 0);
  for (const std::string c : {"UT", "EB", "UC"}) {
    const Dataset ds = load_dataset(dir / ("a/" + c + ".csv"));
    CHECK(ds.size() == 41);
    for (const Sym3& C : ds.C) CHECK(det(C) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(slurp(dir / ("a/" + c + ".csv")) == slurp(dir / ("b/" + c + ".csv")));
  }
  CHECK(slurp(dir / "a/manifest.json") == slurp(dir / "b/manifest.json"));
  const json resolved = json::parse(slurp(dir / "a/config.resolved"));
  CHECK(resolved["paths"]["steps_per_ramp"] == 40);
  const json manifest = json::parse(slurp(dir / "a/manifest.json"));
  CHECK(manifest["outputs"].size() == 3);
}

TEST_CASE("generated Tschoegl data yields at 2 and 4") {
  TempDir dir("icann_cli_tschoegl");
  REQUIRE(run({"generate", "--model", "tschoegl", "--cases", "UT,UC", "--out", dir.path.string(),
               "--set", "paths.UC=0.7"}) == 0);
  const Dataset ut = load_dataset(dir / "UT.csv");
  const Dataset uc = load_dataset(dir / "UC.csv");
  CHECK(ut.normalization == doctest::Approx(2.0).epsilon(0.02));
  CHECK(uc.normalization == doctest::Approx(4.0).epsilon(0.02));
}

TEST_CASE("simulate with generator-equivalent weights") {
  TempDir dir("icann_cli_simulate");
  REQUIRE(run({"generate", "--cases", "Cyc", "--out", dir / "data"}) == 0);
  save_weights(vm_af_equivalent_weights(VmAfParams{}), dir / "eq.json");
  REQUIRE(run({"simulate", "--weights", dir / "eq.json", "--data", dir / "data/Cyc.csv", "--out", dir / "sim"}) == 0);
  const json manifest = json::parse(slurp(dir / "sim/manifest.json"));
  CHECK(manifest["summary"]["relative_rms"].get<double>() <= 0.01);
  // The stress history parses back as a dataset.
  const Dataset back = load_dataset(dir / "sim/simulate.csv");
  CHECK(back.size() == load_dataset(dir / "data/Cyc.csv").size());
}

TEST_CASE("trace von Mises weights") {
  TempDir dir("icann_cli_trace");
  WeightSet<double> ws;
  ws.g1.w2[4] = 0.25;
  save_weights(ws, dir / "vm.json");
  REQUIRE(run({"trace", "--weights", dir / "vm.json", "--out", dir / "tr", "--set", "trace.n_rays=8"}) == 0);
  std::istringstream in(slurp(dir / "tr/trace.csv"));
  std::string line;
  std::getline(in, line);
  CHECK(line == "s11,s22,s33");
  std::vector<double> s11;
  while (std::getline(in, line)) s11.push_back(std::stod(line.substr(0, line.find(','))));
  REQUIRE(s11.size() == 8);
  CHECK(s11[0] == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(s11[4] == doctest::Approx(-2.0).epsilon(1e-9));

  REQUIRE(run({"trace", "--weights", dir / "vm.json", "--out", dir / "tr3", "--set", "trace.mode=3d",
               "--set", "trace.n_polar=4", "--set", "trace.n_azimuth=6"}) == 0);
  CHECK(json::parse(slurp(dir / "tr3/manifest.json"))["summary"]["points"].get<int>() > 0);

  // A purely volumetric potential never reaches 1 along deviatoric rays.
  WeightSet<double> vol;
  vol.g1.w2[0] = 1.0;
  save_weights(vol, dir / "vol.json");
  CHECK(run({"trace", "--weights", dir / "vol.json", "--out", dir / "open"}) == 2);
}

TEST_CASE("train and resume") {
  TempDir dir("icann_cli_train");
  REQUIRE(run({"generate", "--cases", "UT", "--out", dir / "data", "--set", "paths.steps_per_ramp=20"}) == 0);
  const std::vector<std::string> common{"--set", "train.max_epochs=10", "--set", "train.pretrain_epochs=5",
                                        "--set", "train.gradient=exact"};
  std::vector<std::string> a{"train", "--data", dir / "data/UT.csv", "--out", dir / "t1"};
  a.insert(a.end(), common.begin(), common.end());
  REQUIRE(run(a) == 0);
  for (const char* f : {"weights.json", "report.json", "loss.csv", "config.resolved", "manifest.json"})
    CHECK(fs::exists(dir.path / "t1" / f));
  CHECK_FALSE(json::parse(slurp(dir / "t1/report.json"))["pretraining"].empty());
  for (double w : flatten(load_weights(dir / "t1/weights.json"))) CHECK(w >= 0.0);

  std::vector<std::string> b{"train", "--data", dir / "data/UT.csv", "--resume", dir / "t1/weights.json",
                             "--out", dir / "t2"};
  b.insert(b.end(), common.begin(), common.end());
  REQUIRE(run(b) == 0);
  const json rep = json::parse(slurp(dir / "t2/report.json"));
  CHECK(rep["pretraining"].empty());
  CHECK(rep["resumed"] == true);
}

TEST_CASE("exit codes") {
  TempDir dir("icann_cli_exit");
  CHECK(run({"train", "--out", dir / "t"}) == 1);  // no datasets
  CHECK(run({"generate", "--set", "nope=1", "--out", dir / "g"}) == 1);
  CHECK(run({"generate", "--config", dir / "missing.json", "--out", dir / "g"}) == 1);
  CHECK(run({"frobnicate"}) == 1);
  CHECK(run({}) == 1);

  {
    std::ofstream(dir / "cfg.json") << R"({"generate": {"cases": ["UT"]}, "paths": {"steps_per_ramp": 10}})";
  }
  CHECK(run({"generate", "--config", dir / "cfg.json", "--out", dir / "g"}) == 0);
  CHECK(fs::exists(dir.path / "g/UT.csv"));

  // An activation argument far outside its range is a numerical failure.
  WeightSet<double> ws = vm_af_equivalent_weights(VmAfParams{});
  ws.psi_e.w2[1] = 1.0;
  ws.psi_e.w1[0] = 1e6;
  save_weights(ws, dir / "bad.json");
  CHECK(run({"simulate", "--weights", dir / "bad.json", "--out", dir / "s"}) == 2);

  CHECK(run({"verify", "--out", dir / "v", "--set", "verify.samples=20"}) == 0);
}
