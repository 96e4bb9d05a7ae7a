#include "ctrtab/cli/app.hpp"

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "ctrtab/cli/pipeline.hpp"
#include "ctrtab/data/csv.hpp"
#include "ctrtab/error.hpp"
#include "ctrtab/synth/synthgen.hpp"
#include "ctrtab/theory/harness.hpp"
#include "ctrtab/train/checkpoint.hpp"

#ifndef CTRTAB_VERSION
#define CTRTAB_VERSION "0.0.0"
#endif

namespace ctrtab::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const ConfigError*>(&e) || dynamic_cast<const json::exception*>(&e)) return exit_config;
  // Out-of-domain parameters almost always come straight from the config.
  if (dynamic_cast<const DomainError*>(&e)) return exit_config;
  if (dynamic_cast<const PrerequisiteError*>(&e)) return exit_prerequisite;
  if (dynamic_cast<const TrainingAbort*>(&e)) return exit_training_abort;
  if (dynamic_cast<const DataError*>(&e) || dynamic_cast<const FormatError*>(&e)) return exit_data;
  return exit_other;
}

std::string file_hash(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PrerequisiteError("cannot open " + path.string());
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in) {
    in.read(buf, sizeof buf);
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

namespace {

void check_keys(const json& j, std::initializer_list<std::string_view> allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

json section(const json& cfg, const char* key) { return cfg.contains(key) ? cfg.at(key) : json::object(); }

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : (base / path).lexically_normal();
}

fs::path path_or(const json& cfg, const char* key, const fs::path& base, const fs::path& fallback) {
  return cfg.contains(key) ? resolve(base, cfg.at(key).get<std::string>()) : fallback;
}

void require_file(const fs::path& p, const std::string& what) {
  if (!fs::is_regular_file(p)) throw PrerequisiteError("missing " + what + ": " + p.string());
}

std::string profile_of(const json& cfg) { return cfg.value("profile", std::string("desk")); }

std::optional<std::uint64_t> seed_of(const json& cfg) {
  if (!cfg.contains("seed")) return std::nullopt;
  return cfg.at("seed").get<std::uint64_t>();
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

class Manifest {
 public:
  Manifest(std::string key, const fs::path& out) : key_(std::move(key)), out_(out) {}

  void seed(std::uint64_t s) { entry_["seed"] = s; }
  void config(const json& resolved) {
    entry_["config"] = resolved;
    std::string file = key_;
    std::replace(file.begin(), file.end(), ':', '_');
    write_json(out_ / (file + ".config.json"), resolved);
  }
  void input(const std::string& role, const fs::path& p) {
    entry_["inputs"][role] = json{{"path", p.string()}, {"fnv1a64", file_hash(p)}};
  }
  void output(const fs::path& p) {
    entry_["outputs"][fs::relative(p, out_).generic_string()] = file_hash(p);
  }

  // Entries are keyed by command so several commands can share one output
  // directory; rerunning a command replaces only its own entry.
  void write() const {
    const fs::path path = out_ / "manifest.json";
    json m = json::object();
    if (fs::exists(path)) {
      std::ifstream in(path);
      m = json::parse(in, nullptr, false);
      if (!m.is_object()) m = json::object();
    }
    m["version"] = CTRTAB_VERSION;
    m["runs"][key_] = entry_;
    write_json(path, m);
  }

 private:
  std::string key_;
  fs::path out_;
  json entry_ = json::object();
};

eval::GbtParams gbt_from_json(const json& j) {
  check_keys(j, {"rounds", "depth", "shrinkage", "lambda"}, "gbt");
  eval::GbtParams p;
  p.rounds = j.value("rounds", p.rounds);
  p.depth = j.value("depth", p.depth);
  p.shrinkage = j.value("shrinkage", p.shrinkage);
  p.lambda = j.value("lambda", p.lambda);
  if (p.rounds == 0 || p.depth == 0 || !(p.shrinkage > 0.0) || !(p.lambda >= 0.0))
    throw ConfigError("gbt: rounds and depth must be positive, shrinkage > 0, lambda >= 0");
  return p;
}

json gbt_to_json(const eval::GbtParams& p) {
  return json{{"rounds", p.rounds}, {"depth", p.depth}, {"shrinkage", p.shrinkage}, {"lambda", p.lambda}};
}

train::TrainConfig train_config(const json& cfg) {
  auto base = train::TrainConfig::profile(profile_of(cfg));
  if (auto s = seed_of(cfg)) base.seed = *s;
  auto c = train::TrainConfig::from_json(section(cfg, "train"), base);
  c.validate();
  return c;
}

sample::SampleConfig sample_config(const json& cfg) {
  sample::SampleConfig base;
  if (auto s = seed_of(cfg)) base.seed = *s;
  return sample::SampleConfig::from_json(section(cfg, "sample"), base);
}

data::RawTable load_table(const fs::path& csv, const fs::path& schema) {
  require_file(csv, "data file");
  require_file(schema, "schema file");
  return data::load_csv(csv, data::TableSchema::load(schema));
}

double test_fraction_of(const json& cfg) {
  const double f = cfg.value("test_fraction", 0.2);
  if (!(f > 0.0 && f < 1.0)) throw ConfigError("test_fraction must lie in (0, 1)");
  return f;
}

void save_losses(const fs::path& path, const std::vector<double>& losses) {
  std::ofstream out(path, std::ios::binary);
  out << "step,loss\n";
  for (std::size_t i = 0; i < losses.size(); ++i) out << i + 1 << ',' << data::format_double(losses[i]) << '\n';
}

train::StepCallback progress(std::ostream& log, std::size_t total, const char* what) {
  return [&log, total, what](std::size_t step, double loss) {
    if (step % 500 == 0 || step == total) log << what << " step " << step << '/' << total << " loss " << loss << '\n';
  };
}

}  // namespace

void cmd_gen(const json& cfg, const fs::path& base, const fs::path& out, std::ostream& log) {
  check_keys(cfg, {"profile", "seed", "generator", "synth", "dims"}, "gen");
  const std::string generator = cfg.value("generator", std::string("synth"));
  if (generator != "synth" && generator != "mixture") throw ConfigError("gen: generator must be synth or mixture");
  (void)base;
  json syn = section(cfg, "synth");
  if (auto s = seed_of(cfg); s && !syn.contains("seed")) syn["seed"] = *s;
  const auto spec = synth::SynthSpec::from_json(syn);
  spec.validate();

  std::vector<std::size_t> dims;
  if (cfg.contains("dims")) dims = cfg.at("dims").get<std::vector<std::size_t>>();
  if (generator == "mixture" && !dims.empty()) throw ConfigError("gen: dims applies to the synth generator only");

  json resolved{{"profile", profile_of(cfg)}, {"seed", spec.seed}, {"generator", generator}, {"synth", spec.to_json()}};
  if (!dims.empty()) resolved["dims"] = dims;

  fs::create_directories(out);
  Manifest manifest("gen", out);
  manifest.seed(spec.seed);
  manifest.config(resolved);

  auto emit = [&](const data::RawTable& t, const fs::path& dir) {
    fs::create_directories(dir);
    data::save_csv(dir / "data.csv", t);
    t.schema.save(dir / "schema.json");
    manifest.output(dir / "data.csv");
    manifest.output(dir / "schema.json");
    log << "gen " << t.rows() << " rows x " << t.schema.size() << " columns -> " << dir.string() << '\n';
  };
  if (generator == "mixture") {
    emit(synth::gaussian_mixture_table(spec.n_rows, spec.seed), out);
  } else if (dims.empty()) {
    emit(synth::generate(spec), out);
  } else {
    for (std::size_t d : dims) {
      auto s = spec;
      s.n_features = d;
      s.n_informative = std::min(spec.n_informative, d);
      s.n_redundant = std::min(spec.n_redundant, d - s.n_informative);
      emit(synth::generate(s), out / ("dim_" + std::to_string(d)));
    }
  }
  manifest.write();
}

void cmd_train(const json& cfg, const fs::path& base, const fs::path& out, std::ostream& log) {
  check_keys(cfg, {"profile", "seed", "data", "schema", "test_fraction", "denoiser", "train"}, "train");
  const auto tc = train_config(cfg);
  const fs::path data_path = path_or(cfg, "data", base, out / "data.csv");
  const fs::path schema_path = path_or(cfg, "schema", base, data_path.parent_path() / "schema.json");
  const double test_fraction = test_fraction_of(cfg);
  const auto table = load_table(data_path, schema_path);

  json resolved{{"profile", profile_of(cfg)},     {"seed", tc.seed},        {"data", data_path.string()},
                {"schema", schema_path.string()}, {"test_fraction", test_fraction}, {"train", tc.to_json()}};
  fs::path denoiser_path;
  if (tc.stage == train::Stage::control) {
    denoiser_path = path_or(cfg, "denoiser", base, out / "denoiser.ckpt");
    resolved["denoiser"] = denoiser_path.string();
    if (!fs::is_regular_file(denoiser_path))
      throw PrerequisiteError("control stage needs a trained denoiser checkpoint: " + denoiser_path.string());
  }

  fs::create_directories(out);
  Manifest manifest(std::string("train:") + std::string(train::to_string(tc.stage)), out);
  manifest.seed(tc.seed);
  manifest.config(resolved);
  manifest.input("data", data_path);
  manifest.input("schema", schema_path);

  const auto prepared = prepare(table, test_fraction, tc.seed);
  data::save_csv(out / "train.csv", prepared.train);
  data::save_csv(out / "test.csv", prepared.test);
  log << "train: " << prepared.train.rows() << " train rows, " << prepared.test.rows() << " test rows, encoded width "
      << prepared.encoder.dim() << '\n';

  train::TrainResult result;
  fs::path ckpt;
  switch (tc.stage) {
    case train::Stage::denoiser:
      result = train::train_denoiser(prepared.matrix, prepared.encoder, tc, progress(log, tc.steps, "denoiser"));
      ckpt = out / "denoiser.ckpt";
      break;
    case train::Stage::control: {
      manifest.input("denoiser", denoiser_path);
      auto bundle = train::load_checkpoint(denoiser_path, table.schema.fingerprint());
      if (!(bundle.encoder == prepared.encoder))
        throw ConfigError("denoiser checkpoint was fitted on a different split; use the same seed and test_fraction");
      result = train::train_control(prepared.matrix, std::move(bundle), tc, progress(log, tc.steps, "control"));
      ckpt = out / "ctrtab.ckpt";
      break;
    }
    case train::Stage::joint:
      result = train::train_joint(prepared.matrix, prepared.encoder, tc, progress(log, tc.steps, "joint"));
      ckpt = out / "ctrtab.ckpt";
      break;
  }
  train::save_checkpoint(result.bundle, ckpt);
  const fs::path losses = out / (std::string(train::to_string(tc.stage)) + "_losses.csv");
  save_losses(losses, result.losses);
  for (const auto& p : {out / "train.csv", out / "test.csv", ckpt, losses}) manifest.output(p);
  manifest.write();
}

void cmd_sample(const json& cfg, const fs::path& base, const fs::path& out, std::ostream& log) {
  check_keys(cfg, {"profile", "seed", "checkpoint", "train", "sample"}, "sample");
  const auto sc = sample_config(cfg);
  const fs::path ckpt = path_or(cfg, "checkpoint", base, out / "ctrtab.ckpt");
  const fs::path train_path = path_or(cfg, "train", base, out / "train.csv");
  require_file(ckpt, "checkpoint");
  require_file(train_path, "training table");
  json resolved{{"profile", profile_of(cfg)},
                {"seed", sc.seed},
                {"checkpoint", ckpt.string()},
                {"train", train_path.string()},
                {"sample", sc.to_json()}};

  const auto bundle = train::load_checkpoint(ckpt);
  const auto train_table = data::load_csv(train_path, bundle.encoder.schema());

  fs::create_directories(out);
  Manifest manifest("sample", out);
  manifest.seed(sc.seed);
  manifest.config(resolved);
  manifest.input("checkpoint", ckpt);
  manifest.input("train", train_path);

  const auto synthetic = sample::synthesize_table(bundle, train_table, sc);
  data::save_csv(out / "synthetic.csv", synthetic);
  log << "sample: " << synthetic.rows() << " rows (" << sample::to_string(sc.condition_source) << ")\n";
  manifest.output(out / "synthetic.csv");
  manifest.write();
}

void cmd_eval(const json& cfg, const fs::path& base, const fs::path& out, std::ostream& log) {
  check_keys(cfg, {"profile", "seed", "schema", "real_train", "real_test", "synthetic", "gbt"}, "eval");
  const auto gbt = gbt_from_json(section(cfg, "gbt"));
  const fs::path schema_path = path_or(cfg, "schema", base, out / "schema.json");
  const fs::path train_path = path_or(cfg, "real_train", base, out / "train.csv");
  const fs::path test_path = path_or(cfg, "real_test", base, out / "test.csv");
  const fs::path syn_path = path_or(cfg, "synthetic", base, out / "synthetic.csv");
  for (const auto& [p, what] : {std::pair{schema_path, "schema"}, std::pair{train_path, "real training table"},
                                std::pair{test_path, "real test table"}, std::pair{syn_path, "synthetic table"}})
    require_file(p, what);
  json resolved{{"profile", profile_of(cfg)},          {"schema", schema_path.string()},
                {"real_train", train_path.string()},   {"real_test", test_path.string()},
                {"synthetic", syn_path.string()},      {"gbt", gbt_to_json(gbt)}};

  const auto schema = data::TableSchema::load(schema_path);
  const auto real_train = data::load_csv(train_path, schema);
  const auto real_test = data::load_csv(test_path, schema);
  const auto synthetic = data::load_csv(syn_path, schema);

  fs::create_directories(out);
  Manifest manifest("eval", out);
  manifest.config(resolved);
  manifest.input("schema", schema_path);
  manifest.input("real_train", train_path);
  manifest.input("real_test", test_path);
  manifest.input("synthetic", syn_path);

  const auto encoder = data::fit_encoder(real_train);
  auto report = eval::evaluate(real_train, real_test, synthetic, encoder, gbt);
  report.provenance = json{{"real_train", file_hash(train_path)},
                           {"real_test", file_hash(test_path)},
                           {"synthetic", file_hash(syn_path)},
                           {"gbt", gbt_to_json(gbt)}};
  write_json(out / "metrics.json", report.to_json());
  {
    std::ofstream pairs(out / "fidelity_pairs.csv", std::ios::binary);
    report.fidelity.write_pair_csv(pairs);
  }
  const auto& e = report.efficacy;
  log << "eval: task " << eval::to_string(e.task);
  if (e.real.f1) log << " f1 real " << *e.real.f1 << " synthetic " << *e.synthetic.f1;
  if (e.real.r2) log << " r2 real " << *e.real.r2 << " synthetic " << e.synthetic.r2.value_or(0.0);
  log << " ndcr " << report.dcr.ndcr << " density " << report.fidelity.column_density << '\n';
  manifest.output(out / "metrics.json");
  manifest.output(out / "fidelity_pairs.csv");
  manifest.write();
}

void cmd_verify(const json& cfg, const fs::path& base, const fs::path& out, std::ostream& log) {
  check_keys(cfg,
             {"profile", "seed", "probe", "dim", "hidden", "points", "etas", "n_mc", "noise", "gap_eta", "fit_steps",
              "fit_lr", "checkpoint", "data"},
             "verify");
  const std::string kind = cfg.value("probe", std::string("linear"));
  const std::uint64_t seed = seed_of(cfg).value_or(0);
  const std::size_t dim = cfg.value("dim", std::size_t{4});
  const std::size_t hidden = cfg.value("hidden", std::size_t{8});
  const std::size_t points = cfg.value("points", std::size_t{64});
  const std::size_t n_mc = cfg.value("n_mc", std::size_t{100000});
  const auto etas = cfg.value("etas", std::vector<double>{1e-3, 3e-3, 1e-2, 3e-2});
  const double gap_eta = cfg.value("gap_eta", 3e-3);
  const std::size_t fit_steps = cfg.value("fit_steps", std::size_t{0});
  const double fit_lr = cfg.value("fit_lr", 1e-2);
  const std::string noise_name = cfg.value("noise", std::string("laplace"));
  theory::PerturbNoise noise;
  if (noise_name == "laplace") noise = theory::PerturbNoise::laplace;
  else if (noise_name == "laplace_flipped") noise = theory::PerturbNoise::laplace_flipped;
  else if (noise_name == "gaussian") noise = theory::PerturbNoise::gaussian;
  else throw ConfigError("verify: unknown noise '" + noise_name + "'");
  if (dim == 0 || points == 0 || hidden == 0) throw ConfigError("verify: dim, hidden and points must be positive");
  if (n_mc < 2) throw ConfigError("verify: n_mc must be at least 2");
  if (!(gap_eta > 0.0)) throw ConfigError("verify: gap_eta must be positive");

  json resolved{{"profile", profile_of(cfg)}, {"seed", seed},       {"probe", kind},     {"points", points},
                {"n_mc", n_mc},               {"etas", etas},       {"noise", noise_name}, {"gap_eta", gap_eta}};

  fs::create_directories(out);
  Manifest manifest("verify", out);
  manifest.seed(seed);

  std::unique_ptr<theory::Probe> probe;
  net::ModelBundle bundle;
  nd::Tensor data_matrix;
  if (kind == "linear") {
    resolved["dim"] = dim;
    probe = std::make_unique<theory::LinearProbe>(theory::LinearProbe::random(dim, points, seed));
  } else if (kind == "constant") {
    resolved["dim"] = dim;
    nd::Rng rng(seed);
    probe = std::make_unique<theory::ConstantProbe>(nd::sample_normal(rng.init(), {1, dim}),
                                                    nd::sample_normal(rng.data(), {points, dim}),
                                                    nd::sample_normal(rng.noise(), {points, dim}));
  } else if (kind == "silu") {
    resolved["dim"] = dim;
    resolved["hidden"] = hidden;
    resolved["fit_steps"] = fit_steps;
    auto p = std::make_unique<theory::SiluProbe>(theory::SiluProbe::random(dim, hidden, points, seed));
    if (fit_steps > 0) {
      // Deterministic toy target: a second random network of the same shape.
      resolved["fit_lr"] = fit_lr;
      const auto teacher = theory::SiluProbe::random(dim, hidden, 1, nd::derive_seed(seed, 0x7e));
      nd::Tape tape;
      p->set_targets(teacher.forward(tape, tape.constant(p->conditions())).value());
      const double loss = p->fit(fit_steps, fit_lr);
      log << "verify: fitted silu probe to loss " << loss << '\n';
    }
    probe = std::move(p);
  } else if (kind == "ctrtab") {
    const fs::path ckpt = path_or(cfg, "checkpoint", base, out / "ctrtab.ckpt");
    const fs::path data_path = path_or(cfg, "data", base, out / "train.csv");
    require_file(ckpt, "checkpoint");
    require_file(data_path, "training table");
    resolved["checkpoint"] = ckpt.string();
    resolved["data"] = data_path.string();
    manifest.input("checkpoint", ckpt);
    manifest.input("data", data_path);
    bundle = train::load_checkpoint(ckpt);
    data_matrix = data::encode(data::load_csv(data_path, bundle.encoder.schema()), bundle.encoder).matrix;
    probe = std::make_unique<theory::CtrTabProbe>(bundle, data_matrix, points, seed);
  } else {
    throw ConfigError("verify: unknown probe '" + kind + "'");
  }
  manifest.config(resolved);

  const auto reg = theory::reg_term(*probe);
  json report{{"probe", probe->name()}, {"dim", probe->dim()}, {"points", probe->points()}, {"reg", reg.to_json()}};
  const auto at = theory::noised_gap(*probe, gap_eta, n_mc, seed, noise, reg);
  report["gap"] = at.to_json();
  report["gap_over_eta_sq"] = at.gap / (gap_eta * gap_eta);
  report["relative_error"] =
      reg.total() != 0.0 ? json(std::abs(at.gap / (gap_eta * gap_eta) - reg.total()) / std::abs(reg.total())) : json(nullptr);
  if (noise == theory::PerturbNoise::laplace) {
    const auto sc = theory::scaling_check(*probe, etas, n_mc, seed);
    report["scaling"] = sc.to_json();
    if (sc.fitted) report["slope"] = sc.slope;
    log << "verify: " << probe->name() << (sc.fitted ? " slope " + std::to_string(sc.slope) : " fit refused: " + sc.reason)
        << '\n';
  }
  report["optimum"] = theory::tikhonov_at_optimum_check(*probe).to_json();
  write_json(out / "verify.json", report);
  manifest.output(out / "verify.json");
  manifest.write();
}

void cmd_ablate(const json& cfg, const fs::path& base, const fs::path& out, std::ostream& log) {
  check_keys(cfg,
             {"profile", "seed", "data", "schema", "test_fraction", "train", "sample", "gbt", "variants",
              "noise_scales", "noise_types"},
             "ablate");
  const auto tc = train_config(cfg);
  const auto sc = sample_config(cfg);
  const auto gbt = gbt_from_json(section(cfg, "gbt"));
  const fs::path data_path = path_or(cfg, "data", base, out / "data.csv");
  const fs::path schema_path = path_or(cfg, "schema", base, data_path.parent_path() / "schema.json");
  const double test_fraction = test_fraction_of(cfg);
  const auto scales = cfg.value("noise_scales", std::vector<double>{0.0, 0.01, 0.1, 1.0, 1000.0});
  const auto type_names = cfg.value("noise_types", std::vector<std::string>{"gaussian", "uniform"});
  std::vector<net::NoiseType> types;
  for (const auto& t : type_names) types.push_back(net::noise_type_from_string(t));
  for (double b : scales)
    if (!(b >= 0.0)) throw ConfigError("ablate: noise scales must be non-negative");

  auto variants = ablation_variants(tc, scales, types);
  if (cfg.contains("variants")) variants = select_variants(variants, cfg.at("variants").get<std::vector<std::string>>());
  std::vector<std::string> names;
  for (const auto& v : variants) names.push_back(v.name);

  const auto table = load_table(data_path, schema_path);
  json resolved{{"profile", profile_of(cfg)},    {"seed", tc.seed},          {"data", data_path.string()},
                {"schema", schema_path.string()}, {"test_fraction", test_fraction}, {"train", tc.to_json()},
                {"sample", sc.to_json()},         {"gbt", gbt_to_json(gbt)}, {"variants", names},
                {"noise_scales", scales},         {"noise_types", type_names}};

  fs::create_directories(out);
  Manifest manifest("ablate", out);
  manifest.seed(tc.seed);
  manifest.config(resolved);
  manifest.input("data", data_path);
  manifest.input("schema", schema_path);

  const auto prepared = prepare(table, test_fraction, tc.seed);
  const auto results = run_ablation(prepared, variants, sc, gbt, &log);
  json rows = json::array();
  for (const auto& r : results) rows.push_back(r.to_json());
  write_json(out / "ablation.json", json{{"variants", rows}});
  manifest.output(out / "ablation.json");
  manifest.write();
}

int run(const Invocation& inv, std::ostream& log, std::ostream& err) {
  try {
    if (!fs::is_regular_file(inv.config)) throw PrerequisiteError("missing config file: " + inv.config.string());
    json cfg;
    {
      std::ifstream in(inv.config);
      try {
        cfg = json::parse(in);
      } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
      }
    }
    if (!cfg.is_object()) throw ConfigError("config must be a JSON object");
    if (inv.seed) cfg["seed"] = *inv.seed;
    if (inv.stage) {
      if (inv.command != "train") throw ConfigError("--stage applies to train only");
      cfg["train"]["stage"] = *inv.stage;
    }
    const fs::path base = inv.config.has_parent_path() ? inv.config.parent_path() : fs::path(".");
    const std::string& c = inv.command;
    if (c == "gen") cmd_gen(cfg, base, inv.out, log);
    else if (c == "train") cmd_train(cfg, base, inv.out, log);
    else if (c == "sample") cmd_sample(cfg, base, inv.out, log);
    else if (c == "eval") cmd_eval(cfg, base, inv.out, log);
    else if (c == "verify") cmd_verify(cfg, base, inv.out, log);
    else if (c == "ablate") cmd_ablate(cfg, base, inv.out, log);
    else throw ConfigError("unknown command '" + c + "'");
    return exit_ok;
  } catch (const std::exception& e) {
    err << "ctrtab " << inv.command << ": " << e.what() << '\n';
    return exit_code_for(e);
  }
}

}  // namespace ctrtab::cli
