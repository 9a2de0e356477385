#include "curator/simulate.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

#include "curator/dedup.hpp"
#include "curator/errors.hpp"
#include "curator/rng.hpp"

namespace fs = std::filesystem;

namespace curator {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::istringstream iss(s);
  while (std::getline(iss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

long parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "not an integer: " + value);
  }
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError(key, "not a number: " + value);
  }
}

std::string resolve(const std::string& dir, const std::string& path) {
  if (path.empty() || fs::path(path).is_absolute()) return path;
  return (fs::path(dir) / path).string();
}

std::ifstream open_or_throw(const std::string& path, const std::string& what) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + what + ": " + path);
  return in;
}

}  // namespace

RunConfig load_run_config(std::istream& in, const std::string& config_dir) {
  RunConfig cfg;
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  bool saw_out = false, saw_strategies = false, saw_spec = false,
       saw_taxonomy = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      if (section != "run" && section != "pool" && section != "al")
        throw ConfigError(section, "unknown section");
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ConfigError(section.empty() ? "<top>" : section,
                        "line " + std::to_string(lineno) + " is not key = value");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    const std::string path = section + "." + key;

    if (section == "run") {
      if (key == "out") {
        cfg.out_dir = resolve(config_dir, value);
        saw_out = true;
      } else if (key == "strategies") {
        for (const std::string& name : split_list(value)) {
          const auto s = strategy_from_name(name);
          if (!s) throw ConfigError("run.strategies", "unknown strategy: " + name);
          cfg.strategies.push_back(*s);
        }
        saw_strategies = true;
      } else if (key == "repeat") {
        cfg.repeat = static_cast<int>(parse_int(path, value));
      } else {
        throw ConfigError(path, "unknown key");
      }
    } else if (section == "pool") {
      if (key == "spec") {
        cfg.pool_spec_path = resolve(config_dir, value);
        saw_spec = true;
      } else if (key == "taxonomy") {
        cfg.taxonomy_path = resolve(config_dir, value);
        saw_taxonomy = true;
      } else if (key == "eval_per_class") {
        cfg.eval_per_class = static_cast<int>(parse_int(path, value));
      } else {
        throw ConfigError(path, "unknown key");
      }
    } else if (section == "al") {
      if (key == "rounds") cfg.al.rounds = static_cast<int>(parse_int(path, value));
      else if (key == "batch") cfg.al.batch = static_cast<int>(parse_int(path, value));
      else if (key == "top_k") cfg.al.top_k = static_cast<std::size_t>(parse_int(path, value));
      else if (key == "related_levels") cfg.al.related_levels = static_cast<std::size_t>(parse_int(path, value));
      else if (key == "det_min_proposals") cfg.al.det_min_proposals = static_cast<int>(parse_int(path, value));
      else if (key == "det_max_identical") cfg.al.det_max_identical = static_cast<int>(parse_int(path, value));
      else if (key == "votes") cfg.al.votes = static_cast<int>(parse_int(path, value));
      else if (key == "vote_threshold") cfg.al.vote_threshold = static_cast<int>(parse_int(path, value));
      else if (key == "annotator_error") cfg.al.annotator_error = parse_double(path, value);
      else if (key == "cluster_count") cfg.al.cluster_count = static_cast<std::size_t>(parse_int(path, value));
      else if (key == "margin_multiplier") cfg.al.margin_multiplier = parse_double(path, value);
      else if (key == "temperature") cfg.al.temperature = parse_double(path, value);
      else if (key == "seed") cfg.al.seed = static_cast<std::uint64_t>(parse_int(path, value));
      else throw ConfigError(path, "unknown key");
    } else {
      throw ConfigError("<top>", "key outside any section at line " +
                                     std::to_string(lineno));
    }
  }
  if (!saw_out) throw ConfigError("run.out", "missing");
  if (!saw_strategies || cfg.strategies.empty())
    throw ConfigError("run.strategies", "missing or empty");
  if (!saw_spec) throw ConfigError("pool.spec", "missing");
  if (!saw_taxonomy) throw ConfigError("pool.taxonomy", "missing");
  if (cfg.repeat < 1) throw ConfigError("run.repeat", "must be >= 1");
  if (cfg.eval_per_class < 1) throw ConfigError("pool.eval_per_class", "must be >= 1");
  return cfg;
}

PoolSpec load_pool_spec(std::istream& in) {
  nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
  if (j.is_discarded() || !j.is_object())
    throw ParseError(1, "pool spec is not a JSON object");
  PoolSpec spec;
  try {
    spec.feature_dim = j.at("feature_dim").get<std::size_t>();
    spec.seed = j.value("seed", std::uint64_t{0});
    spec.covariate_scale = j.value("covariate_scale", 4.0);
    spec.noise_range = j.value("noise_range", 10.0);
    const auto& counts = j.at("counts");
    spec.counts.id_n = counts.value("id", std::size_t{0});
    spec.counts.noisy_n = counts.value("noisy", std::size_t{0});
    spec.counts.covariate_n = counts.value("covariate", std::size_t{0});
    spec.counts.semantic_n = counts.value("semantic", std::size_t{0});
    auto read_classes = [](const nlohmann::json& arr) {
      std::vector<ClassSpec> out;
      for (const auto& cj : arr) {
        ClassSpec c;
        c.id = cj.at("id").get<std::string>();
        c.mean = cj.at("mean").get<std::vector<double>>();
        c.sigma = cj.value("sigma", 1.0);
        out.push_back(std::move(c));
      }
      return out;
    };
    spec.classes = read_classes(j.at("classes"));
    if (j.contains("outside_classes"))
      spec.outside_classes = read_classes(j["outside_classes"]);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(1, std::string("pool spec: ") + e.what());
  }
  return spec;
}

EvalSet make_eval_set(const PoolSpec& spec, int per_class) {
  EvalSet eval;
  for (std::size_t ci = 0; ci < spec.classes.size(); ++ci) {
    const ClassSpec& cls = spec.classes[ci];
    for (int j = 0; j < per_class; ++j) {
      std::vector<double> f(spec.feature_dim);
      for (std::size_t t = 0; t < spec.feature_dim; ++t)
        f[t] = cls.mean[t] +
               cls.sigma * rng::gaussian(spec.seed, rng::kEval, ci,
                                         static_cast<std::uint64_t>(j), 0, t);
      eval.emplace_back(std::move(f), cls.id);
    }
  }
  return eval;
}

PoolState build_cold_pool(const PoolSpec& spec, const ALConfig& cfg,
                          std::size_t quota) {
  PoolState pool = make_pool_state(generate_pool(spec), spec);
  auto vote_valid = [&cfg](const Sample& s) {
    return annotate({s}, cfg, 0).accepted.size() == 1;
  };
  cold_start(pool, vote_valid, quota);
  return pool;
}

Comparison run_experiment(const RunConfig& cfg) {
  LabelSystem sys = [&] {
    auto in = open_or_throw(cfg.taxonomy_path, "taxonomy");
    return LabelSystem::load(in);
  }();
  const PoolSpec base_spec = [&] {
    auto in = open_or_throw(cfg.pool_spec_path, "pool spec");
    return load_pool_spec(in);
  }();

  struct CellAcc {
    double total_valid = 0;
    double final_accuracy = 0;
  };
  std::map<std::string, std::map<std::string, CellAcc>> acc;

  for (int i = 0; i < cfg.repeat; ++i) {
    PoolSpec spec = base_spec;
    spec.seed = base_spec.seed + static_cast<std::uint64_t>(i);
    ALConfig base_al = cfg.al;
    base_al.seed = cfg.al.seed + static_cast<std::uint64_t>(i);

    const PoolState cold = build_cold_pool(spec, base_al);
    const EvalSet eval = make_eval_set(spec, cfg.eval_per_class);

    for (Strategy strategy : cfg.strategies) {
      for (const bool rectify : {false, true}) {
        ALConfig al = base_al;
        al.strategy = strategy;
        al.rectify = rectify;
        PoolState pool = cold;
        const std::vector<RoundReport> reports = run_loop(al, sys, pool, eval);

        const std::string cell =
            std::string(strategy_name(strategy)) + (rectify ? "_on" : "_off");
        const fs::path run_dir =
            fs::path(cfg.out_dir) / "runs" / cell / ("seed_" + std::to_string(i));
        fs::create_directories(run_dir);
        {
          std::ofstream csv(run_dir / "rounds.csv");
          write_reports_csv(reports, csv);
        }
        for (const RoundReport& r : reports) {
          std::ofstream rj(run_dir / ("round_" + std::to_string(r.round) + ".json"));
          rj << round_report_json(r);
        }

        double total_valid = 0;
        for (const RoundReport& r : reports)
          total_valid += static_cast<double>(r.valid_count);
        CellAcc& a = acc[strategy_name(strategy)][rectify ? "on" : "off"];
        a.total_valid += total_valid;
        a.final_accuracy += reports.back().eval_accuracy;
      }
    }
  }

  Comparison comparison;
  for (const auto& [strategy, by_rect] : acc) {
    for (const auto& [rect, a] : by_rect) {
      comparison[strategy][rect] = CellStats{
          a.total_valid / cfg.repeat, a.final_accuracy / cfg.repeat};
    }
  }

  fs::create_directories(cfg.out_dir);
  std::ofstream out(fs::path(cfg.out_dir) / "comparison.json");
  out << comparison_json(comparison, cfg);
  return comparison;
}

std::string comparison_json(const Comparison& comparison, const RunConfig& cfg) {
  nlohmann::json j;
  nlohmann::json cells;
  for (const auto& [strategy, by_rect] : comparison) {
    for (const auto& [rect, stats] : by_rect) {
      cells[strategy][rect] = {{"mean_total_valid", stats.mean_total_valid},
                               {"mean_final_accuracy", stats.mean_final_accuracy}};
    }
  }
  j["cells"] = std::move(cells);
  j["run"] = {{"rounds", cfg.al.rounds},
              {"batch", cfg.al.batch},
              {"repeat", cfg.repeat},
              {"seed", cfg.al.seed},
              {"eval_per_class", cfg.eval_per_class}};
  return j.dump(2) + "\n";
}

std::string render_comparison_table(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text, nullptr, false);
  if (j.is_discarded() || !j.contains("cells"))
    throw ParseError(1, "not a comparison JSON payload");
  std::ostringstream out;
  out << std::left << std::setw(15) << "strategy" << std::setw(9) << "rectify"
      << std::right << std::setw(12) << "mean_valid" << std::setw(16)
      << "mean_final_acc" << '\n';
  for (const auto& [strategy, by_rect] : j["cells"].items()) {
    for (const auto& [rect, stats] : by_rect.items()) {
      out << std::left << std::setw(15) << strategy << std::setw(9) << rect
          << std::right << std::setw(12) << std::fixed << std::setprecision(1)
          << stats.at("mean_total_valid").get<double>() << std::setw(16)
          << std::setprecision(4)
          << stats.at("mean_final_accuracy").get<double>() << '\n';
    }
  }
  return out.str();
}

IntegrationReport run_taxonomy_build(const std::string& base_path,
                                     const std::string& external_path,
                                     const std::string& embeddings_path,
                                     double min_sim,
                                     const std::string& out_dir) {
  auto base_in = open_or_throw(base_path, "taxonomy");
  LabelSystem sys = LabelSystem::load(base_in);

  auto ext_in = open_or_throw(external_path, "external concepts");
  const std::vector<ExternalConcept> batch = load_external_concepts(ext_in);

  EmbeddingTable table;
  if (!embeddings_path.empty()) {
    auto emb_in = open_or_throw(embeddings_path, "embedding table");
    table = load_embeddings(emb_in);
  }

  const IntegrationReport report = integrate(sys, batch, table, min_sim);

  fs::create_directories(out_dir);
  {
    std::ofstream out(fs::path(out_dir) / "taxonomy.txt");
    sys.save(out);
  }
  {
    std::ofstream out(fs::path(out_dir) / "integration_report.json");
    out << to_json_string(report);
  }
  return report;
}

std::size_t run_dedup(const std::string& crawled_path,
                      const std::string& downstream_path,
                      const std::string& out_path) {
  auto crawled_in = open_or_throw(crawled_path, "crawled hash list");
  const auto crawled = load_hash_list(crawled_in);
  auto downstream_in = open_or_throw(downstream_path, "downstream hash list");
  std::unordered_set<DHash64> downstream;
  for (const auto& [_, h] : load_hash_list(downstream_in)) downstream.insert(h);

  const FilterResult res = overlap_filter(crawled, downstream);
  std::ofstream out(out_path);
  if (!out) throw Error("cannot write " + out_path);
  for (SampleId id : res.kept) out << id << '\n';
  return res.discarded;
}

}  // namespace curator
