#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "triclass.hpp"

namespace fs = std::filesystem;
using namespace triclass;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::vector<Task> tasks_from(const std::string& spec) {
  ExperimentConfig c;
  c.tasks = spec;
  return c.task_list();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

Corpus load_or_throw(const std::string& path, bool labeled, bool strict, const std::string& split) {
  LoadOptions lo;
  lo.labeled = labeled;
  lo.strict = strict;
  lo.split = split;
  return load_dataset(path, lo).corpus;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Three-task text classification: chi2 cosine KNN (s2) and a stacked ensemble (s1)."};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Load a dataset, report dropped rows and corpus statistics");
  std::string ingest_input;
  std::string ingest_output;
  std::string ingest_report;
  bool ingest_strict = false;
  bool ingest_unlabeled = false;
  ingest->add_option("--input", ingest_input, "dataset file (.tsv or .csv)")->required()->check(CLI::ExistingFile);
  ingest->add_option("--output", ingest_output, "write the cleaned dataset here");
  ingest->add_option("--report", ingest_report, "write the drop report (JSON) here");
  ingest->add_flag("--strict", ingest_strict, "fail on malformed rows and unknown labels");
  ingest->add_flag("--unlabeled", ingest_unlabeled, "the file has no label columns");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Grid-search KNN (features x K) on a dev split");
  std::string sw_train;
  std::string sw_dev;
  std::string sw_output;
  std::string sw_tasks = "aggression,gender,communal";
  ExperimentConfig sw_cfg;
  sweep->add_option("--train", sw_train)->required()->check(CLI::ExistingFile);
  sweep->add_option("--dev", sw_dev)->required()->check(CLI::ExistingFile);
  sweep->add_option("--output", sw_output, "directory for <task>.sweep.tsv/json")->required();
  sweep->add_option("--tasks", sw_tasks);
  sweep->add_option("--unit", sw_cfg.unit);
  sweep->add_option("--pool", sw_cfg.pool);
  sweep->add_option("--k_values", sw_cfg.k_values);
  sweep->add_option("--sweep_min", sw_cfg.sweep_min);
  sweep->add_option("--sweep_max", sw_cfg.sweep_max);
  sweep->add_option("--sweep_step", sw_cfg.sweep_step);
  sweep->add_option("--threads", sw_cfg.threads);

  // train
  auto* train = app.add_subcommand("train", "Train s1 or s2 on all three tasks and save the model");
  std::string tr_train;
  std::string tr_dev;
  std::string tr_output;
  std::string tr_system = "s2";
  std::uint64_t tr_seed = 0;
  ExperimentConfig tr_cfg;
  train->add_option("--train", tr_train)->required()->check(CLI::ExistingFile);
  train->add_option("--dev", tr_dev, "needed with --sweep")->check(CLI::ExistingFile);
  train->add_option("--output", tr_output, "model file (JSON)")->required();
  train->add_option("--system", tr_system)->check(CLI::IsMember({"s1", "s2"}));
  train->add_option("--seed", tr_seed)->required();
  train->add_option("--unit", tr_cfg.unit);
  train->add_option("--pool", tr_cfg.pool);
  train->add_option("--features", tr_cfg.features);
  train->add_option("--k", tr_cfg.k);
  train->add_flag("--sweep", tr_cfg.sweep, "choose features and K per task on --dev");
  train->add_option("--k_values", tr_cfg.k_values);
  train->add_option("--sweep_min", tr_cfg.sweep_min);
  train->add_option("--sweep_max", tr_cfg.sweep_max);
  train->add_option("--sweep_step", tr_cfg.sweep_step);
  train->add_option("--s1_features", tr_cfg.s1_features);
  train->add_option("--folds", tr_cfg.folds);
  train->add_option("--threads", tr_cfg.threads);
  train->add_flag("--strict", tr_cfg.strict);

  // predict
  auto* predict = app.add_subcommand("predict", "Label a dataset with a saved model");
  std::string pr_model;
  std::string pr_input;
  std::string pr_output;
  std::size_t pr_threads = 0;
  predict->add_option("--model", pr_model)->required()->check(CLI::ExistingFile);
  predict->add_option("--input", pr_input)->required()->check(CLI::ExistingFile);
  predict->add_option("--output", pr_output, "predictions TSV")->required();
  predict->add_option("--threads", pr_threads);

  // score
  auto* score = app.add_subcommand("score", "Score a predictions TSV against gold labels");
  std::string sc_gold;
  std::string sc_pred;
  std::string sc_json;
  score->add_option("--gold", sc_gold)->required()->check(CLI::ExistingFile);
  score->add_option("--pred", sc_pred)->required()->check(CLI::ExistingFile);
  score->add_option("--json", sc_json, "also write the report as JSON");

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic labeled train/dev/test files");
  std::string sy_output;
  std::size_t sy_train = 3000;
  std::size_t sy_dev = 1000;
  std::size_t sy_test = 0;
  std::string sy_format = "tsv";
  SyntheticSpec sy_spec;
  synth->add_option("--output", sy_output, "directory")->required();
  synth->add_option("--train", sy_train);
  synth->add_option("--dev", sy_dev);
  synth->add_option("--test", sy_test);
  synth->add_option("--seed", sy_spec.seed)->required();
  synth->add_option("--noise", sy_spec.noise)->check(CLI::Range(0.0, 0.999999));
  synth->add_option("--signal", sy_spec.signal)->check(CLI::Range(0.0, 1.0));
  synth->add_option("--class_words", sy_spec.class_words);
  synth->add_option("--background_words", sy_spec.background_words);
  synth->add_option("--min_tokens", sy_spec.min_tokens);
  synth->add_option("--max_tokens", sy_spec.max_tokens);
  synth->add_option("--format", sy_format)->check(CLI::IsMember({"tsv", "csv"}));

  // report
  auto* report = app.add_subcommand("report", "Render saved report JSON files as tables");
  std::vector<std::string> rp_inputs;
  report->add_option("inputs", rp_inputs, "report JSON files or run directories")->required();

  // run
  auto* run_cmd = app.add_subcommand("run", "Run a whole experiment from a config file");
  std::string run_config;
  run_cmd->add_option("--config", run_config, "sectioned key = value file")->check(CLI::ExistingFile);
  std::map<std::string, std::string> overrides;
  for (const auto& key : ExperimentConfig::keys()) {
    run_cmd->add_option_function<std::string>(
        std::string("--") + key.name, [&overrides, name = std::string(key.name)](const std::string& v) { overrides[name] = v; },
        key.help);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*ingest) {
      LoadOptions lo;
      lo.labeled = !ingest_unlabeled;
      lo.strict = ingest_strict;
      const LoadResult r = load_dataset(ingest_input, lo);
      if (!ingest_output.empty()) save_dataset(r.corpus, ingest_output);
      if (!ingest_report.empty()) write_drop_report(r.report, ingest_report);
      const CorpusStats s = corpus_stats(r.corpus);
      nlohmann::json out{{"input", ingest_input},
                         {"instances", s.instances},
                         {"tokens", s.tokens},
                         {"chars", s.chars},
                         {"drops", r.report.to_json()}};
      std::cout << out.dump(2) << '\n';
    } else if (*sweep) {
      const Corpus tr = load_or_throw(sw_train, true, false, "train");
      const Corpus dv = load_or_throw(sw_dev, true, false, "dev");
      const auto options = sw_cfg.sweep_options();
      const FeatureStatistics stats(tr, sw_cfg.pool, sw_cfg.feature_unit());
      fs::create_directories(sw_output);
      for (Task t : tasks_from(sw_tasks)) {
        const SweepGrid grid = knn_sweep(tr, dv, t, stats, options);
        std::ofstream tsv(fs::path(sw_output) / (std::string(task_name(t)) + ".sweep.tsv"), std::ios::binary);
        write_sweep_tsv(grid, tsv);
        write_text(fs::path(sw_output) / (std::string(task_name(t)) + ".sweep.json"), sweep_summary(grid).dump(2) + "\n");
        std::cout << task_name(t) << "\tfeatures=" << grid.best.features << "\tk=" << grid.best.k
                  << "\taccuracy=" << grid.best.accuracy() << '\n';
      }
    } else if (*train) {
      tr_cfg.train = tr_train;
      tr_cfg.dev = tr_dev;
      tr_cfg.seed = tr_seed;
      tr_cfg.systems = tr_system;
      tr_cfg.validate();
      const Corpus tr = load_or_throw(tr_train, true, tr_cfg.strict, "train");
      std::optional<Corpus> dv;
      if (!tr_dev.empty()) dv = load_or_throw(tr_dev, true, tr_cfg.strict, "dev");
      const TrainResult result =
          train_system(parse_system(tr_system), tr, dv ? &*dv : nullptr, train_options(tr_cfg, &std::cerr));
      result.model.save(tr_output);
    } else if (*predict) {
      const SystemModel model = SystemModel::load(pr_model);
      const Corpus corpus = load_or_throw(pr_input, false, false, "input");
      const PredictionSet preds = model.predict(corpus, pr_threads);
      std::ofstream out(pr_output, std::ios::binary);
      if (!out) throw std::runtime_error("cannot write " + pr_output);
      write_predictions(preds, out);
    } else if (*score) {
      const Corpus gold = load_or_throw(sc_gold, true, false, "gold");
      const PredictionSet preds = read_predictions(read_file(sc_pred), sc_pred);
      const EvalReport rep = make_report(preds, gold);
      std::cout << render_report(rep, sc_pred);
      if (!sc_json.empty()) write_text(sc_json, rep.to_json().dump(2) + "\n");
    } else if (*synth) {
      fs::create_directories(sy_output);
      const std::vector<std::pair<std::string, std::size_t>> splits{{"train", sy_train}, {"dev", sy_dev}, {"test", sy_test}};
      nlohmann::json manifest{{"spec", sy_spec.to_json()}, {"splits", nlohmann::json::object()}};
      for (std::size_t i = 0; i < splits.size(); ++i) {
        if (splits[i].second == 0) continue;
        SyntheticSpec spec = sy_spec;
        spec.instances = splits[i].second;
        spec.seed = derive_seed(sy_spec.seed, i);
        spec.id_prefix = splits[i].first;
        spec.split = splits[i].first;
        const fs::path path = fs::path(sy_output) / (splits[i].first + "." + sy_format);
        save_dataset(generate_synthetic(spec), path.string());
        manifest["splits"][splits[i].first] = {{"path", path.filename().string()}, {"instances", spec.instances}, {"seed", spec.seed}};
        std::cout << path.string() << '\n';
      }
      write_text(fs::path(sy_output) / "synthetic.json", manifest.dump(2) + "\n");
    } else if (*report) {
      std::vector<fs::path> files;
      for (const auto& in : rp_inputs) {
        if (fs::is_directory(in)) {
          std::vector<fs::path> found;
          for (const auto& e : fs::recursive_directory_iterator(in)) {
            if (e.is_regular_file() && e.path().filename().string().ends_with(".report.json")) found.push_back(e.path());
          }
          std::sort(found.begin(), found.end());
          files.insert(files.end(), found.begin(), found.end());
        } else {
          files.emplace_back(in);
        }
      }
      if (files.empty()) throw ConfigError("no report files found");
      std::cout << "report\tinstance_f1\toverall_micro_f1\taggression\tgender\tcommunal\n";
      for (const auto& f : files) {
        const EvalReport r = EvalReport::from_json(nlohmann::json::parse(read_file(f.string())));
        std::cout << f.string() << '\t' << detail::fixed(r.instance_f1, 3) << '\t' << detail::fixed(r.overall_micro_f1, 3);
        for (Task t : kAllTasks) std::cout << '\t' << detail::fixed(r.task(t).micro_f1, 3);
        std::cout << '\n';
      }
    } else if (*run_cmd) {
      ExperimentConfig cfg = run_config.empty() ? ExperimentConfig{} : ExperimentConfig::load(run_config);
      for (const auto& [k, v] : overrides) cfg.set(k, v);
      const RunSummary s = run(cfg, std::cerr);
      for (const auto& e : s.entries) {
        std::cout << system_name(e.system) << '\t' << e.split << '\t' << e.predictions_path;
        if (e.report) std::cout << "\toverall_micro_f1=" << detail::fixed(e.report->overall_micro_f1);
        std::cout << '\n';
      }
      std::cout << s.manifest_path << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}
