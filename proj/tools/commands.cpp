#include "commands.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "CLI11.hpp"

#include "icann/models.hpp"

namespace icann::cli {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

void write_text(const fs::path& file, const std::string& text) {
  std::ofstream out(file, std::ios::binary);
  if (!out) throw InputError("cannot write " + file.string());
  out << text;
}

std::string read_text(const fs::path& file) {
  std::ifstream in(file, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) h = (h ^ c) * 1099511628211ull;
  return h;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

WeightSet<double> require_weights(const json& section, const std::string& key) {
  const std::string file = section.at("weights").get<std::string>();
  if (file.empty()) throw ConfigError(key + ".weights is required");
  return load_weights(file);
}

}  // namespace

Outputs cmd_generate(const json& cfg, const fs::path& out) {
  const json& g = cfg.at("generate");
  const std::string model = g.at("model").get<std::string>();
  if (model != "vm_af" && model != "tschoegl") throw ConfigError("generate.model must be 'vm_af' or 'tschoegl'");
  if (g.at("cases").empty()) throw ConfigError("generate.cases is empty");
  const double noise = g.at("noise").get<double>();
  if (noise < 0.0) throw ConfigError("generate.noise must be non-negative");
  const StepOptions opt = step_options(cfg);

  std::mt19937_64 rng(cfg.at("seed").get<std::uint64_t>());
  Outputs o;
  for (const auto& c : g.at("cases")) {
    const std::string name = c.get<std::string>();
    const LoadPath path = make_path(path_spec(cfg, path_kind_from_name(name)));
    Dataset ds = model == "vm_af" ? generate_vm_af(vm_af_params(cfg), path, opt)
                                  : generate_tschoegl(tschoegl_params(cfg), path, opt);
    ds.name = name;
    if (noise > 0.0) {
      std::normal_distribution<double> n(0.0, noise * ds.normalization);
      for (std::size_t i = 1; i < ds.size(); ++i) ds.sigma11[i] += n(rng);
      ds.provenance.emplace_back("noise", num(noise));
      ds.provenance.emplace_back("seed", std::to_string(cfg.at("seed").get<std::uint64_t>()));
    }
    const std::string file = name + ".csv";
    save_dataset(ds, (out / file).string());
    o.files.push_back(file);
    o.summary[name] = {{"records", ds.size()}, {"max_abs_sigma11", ds.normalization}};
  }
  return o;
}

Outputs cmd_train(const json& cfg, const fs::path& out) {
  const json& t = cfg.at("train");
  if (t.at("data").empty()) throw ConfigError("train.data lists no dataset files");
  std::vector<Dataset> data;
  for (const auto& f : t.at("data")) data.push_back(load_dataset(f.get<std::string>()));
  const TrainConfig tc = train_config(cfg);

  const std::string resume_file = t.at("resume").get<std::string>();
  WeightSet<double> resume;
  if (!resume_file.empty()) resume = load_weights(resume_file);
  const TrainReport rep = train(data, tc, resume_file.empty() ? nullptr : &resume);

  save_weights(rep.weights, (out / "weights.json").string());
  json r = rep.to_json();
  r["config"] = config_to_json(tc);
  r["resumed"] = !resume_file.empty();
  write_text(out / "report.json", r.dump(2) + "\n");
  std::string loss = "epoch,loss\n";
  for (std::size_t i = 0; i < rep.loss_history.size(); ++i) loss += std::to_string(i) + "," + num(rep.loss_history[i]) + "\n";
  write_text(out / "loss.csv", loss);

  Outputs o;
  o.files = {"weights.json", "report.json", "loss.csv"};
  o.summary = {{"epochs", rep.epochs}, {"best_loss", rep.best_loss}, {"scale", rep.scale},
               {"early_stopped", rep.early_stopped}, {"pretrained", resume_file.empty() && tc.pretrain}};
  return o;
}

namespace {

template <class Model>
std::vector<StepResult<double>> run_model(const Model& m, const DrivingHistory& h, const StepOptions& opt) {
  return simulate_path(m, h, opt);
}

}  // namespace

Outputs cmd_simulate(const json& cfg, const fs::path& out) {
  const json& s = cfg.at("simulate");
  const StepOptions opt = step_options(cfg);
  const std::string data_file = s.at("data").get<std::string>();

  Dataset drive;
  if (!data_file.empty()) {
    drive = load_dataset(data_file);
  } else {
    const LoadPath p = make_path(path_spec(cfg, path_kind_from_name(s.at("case").get<std::string>())));
    drive.time = p.time;
    drive.C = p.C;
  }

  const std::string model = s.at("model").get<std::string>();
  std::vector<StepResult<double>> res;
  if (model == "network")
    res = run_model(NetworkModel<double>(require_weights(s, "simulate")), drive.history(), opt);
  else if (model == "vm_af")
    res = run_model(VonMisesAfModel(vm_af_params(cfg)), drive.history(), opt);
  else if (model == "tschoegl")
    res = run_model(TschoeglModel(tschoegl_params(cfg)), drive.history(), opt);
  else
    throw ConfigError("simulate.model must be 'network', 'vm_af' or 'tschoegl'");

  const bool compare = !drive.sigma11.empty();
  std::string text = "time,C11,C22,C33,sigma11,sigma22,sigma33,dlambda,phi,dissipation";
  if (compare) text += ",sigma11_data";
  text += "\n";
  double sq = 0.0;
  for (std::size_t i = 0; i < drive.size(); ++i) {
    Sym3 sig = Sym3::zero();
    double dl = 0.0, phi = 0.0, d = 0.0;
    if (i > 0) {
      const auto& r = res[i - 1];
      sig = r.sigma;
      dl = r.dlambda;
      phi = r.phi_final;
      d = r.dissipation.total;
    }
    text += num(drive.time[i]) + "," + num(drive.C[i].xx()) + "," + num(drive.C[i].yy()) + "," + num(drive.C[i].zz()) +
            "," + num(sig.xx()) + "," + num(sig.yy()) + "," + num(sig.zz()) + "," + num(dl) + "," + num(phi) + "," +
            num(d);
    if (compare) {
      text += "," + num(drive.sigma11[i]);
      sq += (sig.xx() - drive.sigma11[i]) * (sig.xx() - drive.sigma11[i]);
    }
    text += "\n";
  }
  write_text(out / "simulate.csv", text);

  Outputs o;
  o.files = {"simulate.csv"};
  o.summary = {{"records", drive.size()}};
  if (compare) {
    const double rms = std::sqrt(sq / double(drive.size()));
    o.summary["rms"] = rms;
    o.summary["relative_rms"] = rms / max_abs_stress(drive);
  }
  return o;
}

Outputs cmd_trace(const json& cfg, const fs::path& out) {
  const json& t = cfg.at("trace");
  const WeightSet<double> ws = require_weights(t, "trace");
  const std::string pot = t.at("potential").get<std::string>();
  if (pot != "g1" && pot != "g2") throw ConfigError("trace.potential must be 'g1' or 'g2'");
  const PotentialWeights<double>& w = pot == "g1" ? ws.g1 : ws.g2;
  TraceOptions opt;
  opt.cap = t.at("cap").get<double>();
  opt.tol = t.at("tol").get<double>();

  const std::string mode = t.at("mode").get<std::string>();
  std::vector<Sym3> pts;
  if (mode == "2d")
    pts = trace_yield_surface(w, stress_plane_from_name(t.at("plane").get<std::string>()), t.at("n_rays").get<int>(), opt);
  else if (mode == "3d")
    pts = trace_yield_surface_3d(w, t.at("n_polar").get<int>(), t.at("n_azimuth").get<int>(), opt);
  else
    throw ConfigError("trace.mode must be '2d' or '3d'");

  std::string text = "s11,s22,s33\n";
  for (const Sym3& p : pts) text += num(p.xx()) + "," + num(p.yy()) + "," + num(p.zz()) + "\n";
  write_text(out / "trace.csv", text);
  Outputs o;
  o.files = {"trace.csv"};
  o.summary = {{"points", pts.size()}, {"potential", pot}, {"mode", mode}};
  return o;
}

Outputs cmd_verify(const json& cfg, const fs::path& out, bool* all_pass) {
  const auto results = run_properties(cfg);
  json report = json::array();
  bool ok = true;
  for (const auto& r : results) {
    report.push_back({{"property", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << " | " << r.detail << "\n";
    ok = ok && r.pass;
  }
  write_text(out / "verify.json", report.dump(2) + "\n");
  if (all_pass) *all_pass = ok;
  Outputs o;
  o.files = {"verify.json"};
  o.summary = {{"properties", results.size()}, {"all_pass", ok}};
  return o;
}

void write_run_files(const std::string& command, const json& cfg, const fs::path& out, const Outputs& outputs,
                     const std::string& status) {
  write_text(out / "config.resolved", cfg.dump(2) + "\n");
  json files = json::array();
  for (const auto& f : outputs.files) {
    const std::string text = read_text(out / f);
    files.push_back({{"file", f}, {"bytes", text.size()}, {"fnv1a64", hex(fnv1a(text))}});
  }
  const json manifest = {{"command", command},
                         {"seed", cfg.at("seed")},
                         {"status", status},
                         {"config", "config.resolved"},
                         {"outputs", files},
                         {"summary", outputs.summary}};
  write_text(out / "manifest.json", manifest.dump(2) + "\n");
}

int run_cli(int argc, const char* const* argv) {
  CLI::App app{"Finite-strain elastoplasticity networks: data generation, training and analysis"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_file, out_dir, model, data, weights, resume;
  std::vector<std::string> sets, cases;
  std::uint64_t seed = 0;
  auto* seed_opt = app.add_option("--seed", seed, "random seed");
  app.add_option("--config", config_file, "JSON configuration file");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--set", sets, "override, key.path=value")->take_all()->allow_extra_args(false);
  app.add_option("--model", model, "generator or simulation model");
  app.add_option("--cases", cases, "load cases, comma separated")->delimiter(',');
  app.add_option("--data", data, "dataset files (train, comma separated) or driving dataset (simulate)");
  app.add_option("--weights", weights, "weights JSON file");
  app.add_option("--resume", resume, "start training from these weights");

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"generate", "write synthetic datasets"},
      {"train", "pretrain and train a network on datasets"},
      {"simulate", "stress history of a model along a path"},
      {"trace", "yield surface points of a trained potential"},
      {"verify", "run the property suite"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kInputFailure;
  }
  const std::string command = app.get_subcommands().front()->get_name();

  fs::path out;
  try {
    json cfg = default_config();
    if (!config_file.empty()) merge_config(cfg, load_config_file(config_file));
    if (seed_opt->count() > 0) cfg["seed"] = seed;
    for (const auto& s : sets) apply_override(cfg, s);
    if (!model.empty()) apply_override(cfg, (command == "simulate" ? "simulate.model=" : "generate.model=") + model);
    if (!cases.empty()) {
      json arr = cases;
      merge_config(cfg, {{"generate", {{"cases", arr}}}});
    }
    if (!data.empty()) apply_override(cfg, (command == "simulate" ? "simulate.data=" : "train.data=") + data);
    if (!weights.empty()) apply_override(cfg, (command == "trace" ? "trace.weights=" : "simulate.weights=") + weights);
    if (!resume.empty()) apply_override(cfg, "train.resume=" + resume);

    out = out_dir.empty() ? fs::path("runs") / command : fs::path(out_dir);
    fs::create_directories(out);

    Outputs o;
    bool pass = true;
    if (command == "generate")
      o = cmd_generate(cfg, out);
    else if (command == "train")
      o = cmd_train(cfg, out);
    else if (command == "simulate")
      o = cmd_simulate(cfg, out);
    else if (command == "trace")
      o = cmd_trace(cfg, out);
    else
      o = cmd_verify(cfg, out, &pass);
    write_run_files(command, cfg, out, o, pass ? "ok" : "property failure");
    std::cout << command << ": wrote " << o.files.size() << " file(s) to " << out.string() << "\n";
    return pass ? kOk : kPropertyFailure;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputFailure;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputFailure;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputFailure;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalFailure;
  }
}

}  // namespace icann::cli
