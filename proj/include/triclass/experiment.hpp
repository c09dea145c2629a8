#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "triclass/corpus.hpp"
#include "triclass/eval.hpp"
#include "triclass/features.hpp"
#include "triclass/knn.hpp"
#include "triclass/learners/learner.hpp"
#include "triclass/parallel.hpp"
#include "triclass/stacking.hpp"
#include "triclass/vsm.hpp"

namespace triclass {

inline constexpr std::string_view kVersion = "1.0.0";
inline constexpr int kSystemFormatVersion = 1;

/// Bad configuration or usage; the CLI maps it to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class System : std::uint8_t { s1, s2 };

inline std::string_view system_name(System s) { return s == System::s1 ? "s1" : "s2"; }

inline System parse_system(std::string_view name) {
  if (name == "s1") return System::s1;
  if (name == "s2") return System::s2;
  throw ConfigError("unknown system '" + std::string(name) + "' (expected s1 or s2)");
}

inline std::uint64_t fnv1a(std::string_view data) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// --------------------------------------------------------------------------
// Configuration

namespace detail {

inline std::string trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return std::string(s);
}

inline std::size_t parse_count(const std::string& key, std::string_view v) {
  std::size_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(key + ": expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return out;
}

inline bool parse_bool(const std::string& key, std::string_view v) {
  if (v == "true" || v == "yes" || v == "1") return true;
  if (v == "false" || v == "no" || v == "0") return false;
  throw ConfigError(key + ": expected true or false, got '" + std::string(v) + "'");
}

inline std::vector<std::size_t> parse_count_list(const std::string& key, std::string_view v) {
  std::vector<std::size_t> out;
  std::size_t start = 0;
  while (start <= v.size()) {
    const auto comma = v.find(',', start);
    const auto end = comma == std::string_view::npos ? v.size() : comma;
    out.push_back(parse_count(key, trim(v.substr(start, end - start))));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace detail

struct ExperimentConfig {
  // [data]
  std::string train;
  std::string dev;
  std::string test;
  bool strict = false;
  // [experiment]
  std::string systems = "s1,s2";
  std::string tasks = "aggression,gender,communal";
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;
  std::string output = "triclass-run";
  // [s2]
  std::string unit = "token";
  std::size_t features = 30000;
  std::size_t k = 1;
  std::size_t pool = FeatureStatistics::kDefaultPool;
  bool sweep = false;
  std::string k_values = "1,2,3,4,5,10,15,20,25,50";
  std::size_t sweep_min = 500;
  std::size_t sweep_max = 30000;
  std::size_t sweep_step = 500;
  // [s1]
  std::size_t s1_features = RowEncoder::kDefaultFeatures;
  std::size_t folds = 5;

  struct Key {
    const char* section;
    const char* name;
    const char* help;
    std::function<void(ExperimentConfig&, const std::string&)> set;
    std::function<std::string(const ExperimentConfig&)> get;
  };

  static const std::vector<Key>& keys() {
    using C = ExperimentConfig;
    auto str = [](std::string C::*m) {
      return std::pair{std::function<void(C&, const std::string&)>([m](C& c, const std::string& v) { c.*m = v; }),
                       std::function<std::string(const C&)>([m](const C& c) { return c.*m; })};
    };
    auto count = [](const char* key, std::size_t C::*m) {
      return std::pair{std::function<void(C&, const std::string&)>(
                           [m, key](C& c, const std::string& v) { c.*m = detail::parse_count(key, v); }),
                       std::function<std::string(const C&)>([m](const C& c) { return std::to_string(c.*m); })};
    };
    auto flag = [](const char* key, bool C::*m) {
      return std::pair{std::function<void(C&, const std::string&)>(
                           [m, key](C& c, const std::string& v) { c.*m = detail::parse_bool(key, v); }),
                       std::function<std::string(const C&)>([m](const C& c) { return std::string(c.*m ? "true" : "false"); })};
    };
    auto make = [](const char* section, const char* name, const char* help, auto accessors) {
      return Key{section, name, help, std::move(accessors.first), std::move(accessors.second)};
    };
    static const std::vector<Key> table = {
        make("data", "train", "labeled training file (.tsv or .csv)", str(&C::train)),
        make("data", "dev", "labeled development file", str(&C::dev)),
        make("data", "test", "test file, labeled or not", str(&C::test)),
        make("data", "strict", "fail on malformed rows and unknown labels", flag("strict", &C::strict)),
        make("experiment", "systems", "comma list of s1, s2", str(&C::systems)),
        make("experiment", "tasks", "comma list of aggression, gender, communal", str(&C::tasks)),
        make("experiment", "seed", "experiment seed (required)",
             std::pair{std::function<void(C&, const std::string&)>(
                           [](C& c, const std::string& v) { c.seed = detail::parse_count("seed", v); }),
                       std::function<std::string(const C&)>(
                           [](const C& c) { return c.seed ? std::to_string(*c.seed) : std::string(); })}),
        make("experiment", "threads", "worker threads, 0 = all cores", count("threads", &C::threads)),
        make("experiment", "output", "output directory", str(&C::output)),
        make("s2", "unit", "feature unit: token or char_ngram", str(&C::unit)),
        make("s2", "features", "feature count when not sweeping", count("features", &C::features)),
        make("s2", "k", "neighbors when not sweeping", count("k", &C::k)),
        make("s2", "pool", "candidate features ranked by chi2", count("pool", &C::pool)),
        make("s2", "sweep", "pick (features, k) per task on the dev split", flag("sweep", &C::sweep)),
        make("s2", "k_values", "comma list of k values to sweep", str(&C::k_values)),
        make("s2", "sweep_min", "smallest swept feature count", count("sweep_min", &C::sweep_min)),
        make("s2", "sweep_max", "largest swept feature count", count("sweep_max", &C::sweep_max)),
        make("s2", "sweep_step", "feature count step", count("sweep_step", &C::sweep_step)),
        make("s1", "s1_features", "chi2 features per task for the base learners", count("s1_features", &C::s1_features)),
        make("s1", "folds", "cross-validation folds for the meta features", count("folds", &C::folds)),
    };
    return table;
  }

  static const Key* find_key(std::string_view name) {
    for (const auto& k : keys()) {
      if (name == k.name) return &k;
    }
    return nullptr;
  }

  void set(const std::string& name, const std::string& value) {
    const Key* k = find_key(name);
    if (!k) throw ConfigError("unknown config key '" + name + "'");
    k->set(*this, value);
  }

  /// Sectioned `key = value` text; `#` starts a comment line.
  static ExperimentConfig parse(std::string_view text, const std::string& source = "config") {
    ExperimentConfig c;
    std::string section;
    std::vector<std::string> seen;
    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    std::string line;
    while (std::getline(in, line)) {
      ++line_no;
      const std::string t = detail::trim(line);
      const std::string where = source + ":" + std::to_string(line_no);
      if (t.empty() || t[0] == '#' || t[0] == ';') continue;
      if (t.front() == '[') {
        if (t.back() != ']') throw ConfigError(where + ": malformed section header");
        section = detail::trim(std::string_view(t).substr(1, t.size() - 2));
        continue;
      }
      const auto eq = t.find('=');
      if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
      const std::string key = detail::trim(std::string_view(t).substr(0, eq));
      const std::string value = detail::trim(std::string_view(t).substr(eq + 1));
      const Key* k = find_key(key);
      if (!k) throw ConfigError(where + ": unknown key '" + key + "'");
      if (section != k->section) {
        throw ConfigError(where + ": key '" + key + "' belongs in section [" + k->section + "]");
      }
      if (std::find(seen.begin(), seen.end(), key) != seen.end()) {
        throw ConfigError(where + ": duplicate key '" + key + "'");
      }
      seen.push_back(key);
      k->set(c, value);
    }
    return c;
  }

  static ExperimentConfig load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse(ss.str(), path);
  }

  /// Every key in a fixed order; parse(to_text()) reproduces the config.
  std::string to_text() const {
    std::ostringstream out;
    std::string section;
    for (const auto& k : keys()) {
      if (k.section != section) {
        if (!section.empty()) out << '\n';
        section = k.section;
        out << '[' << section << "]\n";
      }
      const std::string v = k.get(*this);
      if (!v.empty()) out << k.name << " = " << v << '\n';
    }
    return out.str();
  }

  std::vector<System> system_list() const {
    std::vector<System> out;
    std::stringstream ss(systems);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const System s = parse_system(detail::trim(item));
      if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
    }
    if (out.empty()) throw ConfigError("systems: nothing selected");
    std::sort(out.begin(), out.end());
    return out;
  }

  std::vector<Task> task_list() const {
    std::vector<Task> out;
    std::stringstream ss(tasks);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const auto t = parse_task(detail::trim(item));
      if (!t) throw ConfigError("tasks: unknown task '" + item + "'");
      if (std::find(out.begin(), out.end(), *t) == out.end()) out.push_back(*t);
    }
    if (out.empty()) throw ConfigError("tasks: nothing selected");
    std::sort(out.begin(), out.end());
    return out;
  }

  FeatureUnit feature_unit() const {
    try {
      return parse_unit(unit);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(e.what());
    }
  }

  SweepOptions sweep_options() const {
    SweepOptions o;
    o.k_values = detail::parse_count_list("k_values", k_values);
    if (sweep_step == 0 || sweep_min == 0 || sweep_min > sweep_max) throw ConfigError("bad sweep feature range");
    o.feature_counts = feature_count_range(sweep_min, sweep_max, sweep_step);
    o.threads = threads;
    return o;
  }

  /// Checks everything that can be checked before touching data.
  void validate() const {
    if (!seed) throw ConfigError("seed is required");
    if (train.empty()) throw ConfigError("train path is required");
    for (const auto* p : {&train, &dev, &test}) {
      if (!p->empty() && !std::filesystem::exists(*p)) throw ConfigError("input file not found: " + *p);
    }
    if (output.empty()) throw ConfigError("output directory is required");
    system_list();
    task_list();
    feature_unit();
    if (features == 0) throw ConfigError("features must be at least 1");
    if (k == 0) throw ConfigError("k must be at least 1");
    if (pool == 0) throw ConfigError("pool must be at least 1");
    if (s1_features == 0) throw ConfigError("s1_features must be at least 1");
    if (folds < 2) throw ConfigError("folds must be at least 2");
    if (sweep) {
      if (dev.empty()) throw ConfigError("sweep needs a dev split");
      const auto o = sweep_options();
      if (o.k_values.empty() || std::count(o.k_values.begin(), o.k_values.end(), 0)) {
        throw ConfigError("k_values must be positive");
      }
    }
  }
};

// --------------------------------------------------------------------------
// Trained systems

/// S1 for one task: the row encoder plus the stacked ensemble.
struct StackedTask {
  RowEncoder encoder;
  StackModel stack;
};

/// One trained system covering some tasks.
class SystemModel {
 public:
  SystemModel() = default;
  explicit SystemModel(System system) : system_(system) {}

  System system() const { return system_; }
  const std::vector<Task>& tasks() const { return tasks_; }

  void add(Task t, KnnModel m) {
    check_add(t, System::s2);
    knn_.push_back(std::move(m));
  }
  void add(Task t, StackedTask m) {
    check_add(t, System::s1);
    stacked_.push_back(std::move(m));
  }

  const KnnModel& knn(std::size_t i) const { return knn_.at(i); }
  const StackedTask& stacked(std::size_t i) const { return stacked_.at(i); }

  /// Predicted class index per instance for task slot i.
  std::vector<int> predict_task(std::size_t i, const Corpus& corpus, std::size_t threads) const {
    std::vector<int> out(corpus.size());
    if (system_ == System::s2) {
      const KnnModel& m = knn_[i];
      parallel_for(corpus.size(), threads, [&](std::size_t d) { out[d] = m.predict_text(corpus.instances[d].text); });
    } else {
      const auto& st = stacked_[i];
      out = predict_stacked(st.stack, st.encoder.encode(corpus)).labels;
    }
    return out;
  }

  /// Needs all three tasks.
  PredictionSet predict(const Corpus& corpus, std::size_t threads) const {
    if (tasks_.size() != kAllTasks.size()) throw std::invalid_argument("predict: model does not cover all three tasks");
    std::vector<LabelTriple> triples(corpus.size());
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      const auto y = predict_task(i, corpus, threads);
      for (std::size_t d = 0; d < y.size(); ++d) triples[d].set(tasks_[i], y[d]);
    }
    PredictionSet p;
    for (std::size_t d = 0; d < corpus.size(); ++d) p.add(corpus.instances[d].id, triples[d]);
    return p;
  }

  nlohmann::json to_json() const {
    nlohmann::json tasks = nlohmann::json::array();
    for (std::size_t i = 0; i < tasks_.size(); ++i) {
      nlohmann::json entry{{"task", task_name(tasks_[i])}};
      if (system_ == System::s2) {
        entry["knn"] = knn_[i].to_json();
      } else {
        entry["encoder"] = stacked_[i].encoder.to_json();
        entry["stack"] = stacked_[i].stack.to_json();
      }
      tasks.push_back(std::move(entry));
    }
    return {{"format", "triclass-system"},
            {"format_version", kSystemFormatVersion},
            {"system", system_name(system_)},
            {"tasks", std::move(tasks)}};
  }

  static SystemModel from_json(const nlohmann::json& j) {
    if (j.at("format") != "triclass-system") throw std::runtime_error("not a triclass system model");
    if (j.at("format_version").get<int>() != kSystemFormatVersion) {
      throw std::runtime_error("system model format version mismatch");
    }
    SystemModel m(parse_system(j.at("system").get<std::string>()));
    for (const auto& e : j.at("tasks")) {
      const Task t = task_from_name(e.at("task").get<std::string>());
      if (m.system_ == System::s2) {
        m.add(t, KnnModel::from_json(e.at("knn")));
      } else {
        m.add(t, StackedTask{RowEncoder::from_json(e.at("encoder")), StackModel::from_json(e.at("stack"))});
      }
    }
    return m;
  }

  void save(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write model: " + path);
    out << to_json().dump() << '\n';
  }
  static SystemModel load(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read model: " + path);
    return from_json(nlohmann::json::parse(in));
  }

 private:
  void check_add(Task t, System expected) {
    if (system_ != expected) throw std::invalid_argument("model kind does not match the system");
    if (std::find(tasks_.begin(), tasks_.end(), t) != tasks_.end()) throw std::invalid_argument("task added twice");
    tasks_.push_back(t);
  }

  System system_ = System::s2;
  std::vector<Task> tasks_;
  std::vector<KnnModel> knn_;
  std::vector<StackedTask> stacked_;
};

struct TrainOptions {
  std::vector<Task> tasks{kAllTasks.begin(), kAllTasks.end()};
  std::uint64_t seed = 1;
  std::size_t threads = 0;
  FeatureUnit unit = FeatureUnit::token;
  std::size_t pool = FeatureStatistics::kDefaultPool;
  // s2
  std::size_t features = 30000;
  std::size_t k = 1;
  std::optional<SweepOptions> sweep;  // needs a dev corpus
  // s1
  std::size_t s1_features = RowEncoder::kDefaultFeatures;
  std::size_t folds = 5;
  std::ostream* log = nullptr;
};

struct TrainResult {
  SystemModel model;
  std::vector<SweepGrid> sweeps;  // one per task when sweeping
};

inline TrainResult train_s2(const Corpus& train, const Corpus* dev, const TrainOptions& o) {
  TrainResult r{SystemModel(System::s2), {}};
  const FeatureStatistics stats(train, o.pool, o.unit);
  for (Task t : o.tasks) {
    std::size_t n = o.features;
    std::size_t k = o.k;
    if (o.sweep) {
      if (!dev) throw std::invalid_argument("sweep needs a dev corpus");
      SweepGrid grid = knn_sweep(train, *dev, t, stats, *o.sweep);
      n = grid.best.features;
      k = grid.best.k;
      if (o.log) {
        *o.log << "s2 " << task_name(t) << ": best features=" << n << " k=" << k
               << " dev accuracy=" << grid.best.accuracy() << '\n';
      }
      r.sweeps.push_back(std::move(grid));
    }
    if (k > train.size()) throw std::invalid_argument("k exceeds the training set size");
    r.model.add(t, knn_fit(train, t, select_features(stats, t, n), k));
  }
  return r;
}

inline TrainResult train_s1(const Corpus& train, const TrainOptions& o) {
  TrainResult r{SystemModel(System::s1), {}};
  const FeatureStatistics stats(train, o.pool, o.unit);
  const SurfaceScaler scaler = SurfaceScaler::fit(train);
  const auto bases = default_base_specs(o.seed);
  for (Task t : o.tasks) {
    RowEncoder encoder(select_features(stats, t, o.s1_features), scaler);
    const FeatureMatrix x = encoder.encode(train);
    const auto y = train.labels_for(t);
    StackOptions so;
    so.folds = o.folds;
    so.seed = o.seed;
    so.threads = o.threads;
    so.warnings = o.log;
    StackModel stack = fit_stacked(bases, x, y, so);
    if (o.log) *o.log << "s1 " << task_name(t) << ": trained " << stack.bases.size() << " base learners, " << stack.folds << " folds\n";
    r.model.add(t, StackedTask{std::move(encoder), std::move(stack)});
  }
  return r;
}

inline TrainResult train_system(System s, const Corpus& train, const Corpus* dev, const TrainOptions& o) {
  if (!train.labeled) throw std::invalid_argument("training corpus must be labeled");
  if (train.empty()) throw std::invalid_argument("training corpus is empty");
  return s == System::s1 ? train_s1(train, o) : train_s2(train, dev, o);
}

// --------------------------------------------------------------------------
// run

/// True when the file's header names all three label columns.
inline bool has_label_columns(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::string header;
  std::getline(in, header);
  const auto records = parse_delimited(header, delimiter_for(path));
  if (records.empty()) return false;
  std::size_t found = 0;
  for (const auto& col : records[0]) {
    const std::string c = detail::lower_trimmed(col);
    for (Task t : kAllTasks) found += c == task_name(t);
  }
  return found == kAllTasks.size();
}

struct RunSummary {
  struct Entry {
    System system;
    std::string split;
    std::optional<EvalReport> report;
    std::string predictions_path;
  };
  std::vector<Entry> entries;
  std::string manifest_path;
};

inline std::uint64_t file_hash(const std::string& path) { return fnv1a(read_file(path)); }

inline TrainOptions train_options(const ExperimentConfig& c, std::ostream* log) {
  TrainOptions o;
  o.tasks = c.task_list();
  o.seed = *c.seed;
  o.threads = c.threads;
  o.unit = c.feature_unit();
  o.pool = c.pool;
  o.features = c.features;
  o.k = c.k;
  if (c.sweep) o.sweep = c.sweep_options();
  o.s1_features = c.s1_features;
  o.folds = c.folds;
  o.log = log;
  return o;
}

/// Runs an experiment end to end and writes every artifact under
/// config.output, including manifest.json and the effective config.
inline RunSummary run(const ExperimentConfig& config, std::ostream& log = std::cerr) {
  config.validate();
  namespace fs = std::filesystem;
  const fs::path out(config.output);
  fs::create_directories(out);
  nlohmann::json artifacts = nlohmann::json::array();
  auto record = [&](const fs::path& p) { artifacts.push_back(fs::relative(p, out).generic_string()); };

  auto load = [&](const std::string& path, const std::string& split, bool labeled) {
    LoadOptions lo;
    lo.labeled = labeled;
    lo.strict = config.strict;
    lo.split = split;
    lo.warnings = &log;
    LoadResult r = load_dataset(path, lo);
    const fs::path drops = out / (split + ".drops.json");
    write_drop_report(r.report, drops.string());
    record(drops);
    log << split << ": " << r.corpus.size() << " instances kept, " << r.report.dropped << " dropped\n";
    return std::move(r.corpus);
  };
  const Corpus train = load(config.train, "train", true);
  if (train.empty()) throw DataError("training split has no usable rows");
  std::optional<Corpus> dev;
  std::optional<Corpus> test;
  if (!config.dev.empty()) dev = load(config.dev, "dev", true);
  if (!config.test.empty()) test = load(config.test, "test", has_label_columns(config.test));

  const TrainOptions opts = train_options(config, &log);
  const bool all_tasks = opts.tasks.size() == kAllTasks.size();
  RunSummary summary;
  for (System s : config.system_list()) {
    const fs::path dir = out / system_name(s);
    fs::create_directories(dir);
    TrainResult tr = train_system(s, train, dev ? &*dev : nullptr, opts);
    for (const auto& grid : tr.sweeps) {
      const fs::path tsv = dir / (std::string(task_name(grid.task)) + ".sweep.tsv");
      const fs::path js = dir / (std::string(task_name(grid.task)) + ".sweep.json");
      {
        std::ofstream so(tsv, std::ios::binary);
        write_sweep_tsv(grid, so);
      }
      std::ofstream(js, std::ios::binary) << sweep_summary(grid).dump(2) << '\n';
      record(tsv);
      record(js);
    }
    const fs::path model_path = dir / "model.json";
    tr.model.save(model_path.string());
    record(model_path);
    if (!all_tasks) continue;
    for (const Corpus* c : {dev ? &*dev : nullptr, test ? &*test : nullptr}) {
      if (!c) continue;
      const PredictionSet preds = tr.model.predict(*c, config.threads);
      const fs::path pred_path = dir / (c->split + ".predictions.tsv");
      {
        std::ofstream po(pred_path, std::ios::binary);
        write_predictions(preds, po);
      }
      record(pred_path);
      RunSummary::Entry entry{s, c->split, std::nullopt, pred_path.string()};
      if (c->labeled) {
        const EvalReport rep = make_report(preds, *c);
        const fs::path rj = dir / (c->split + ".report.json");
        const fs::path rt = dir / (c->split + ".report.txt");
        std::ofstream(rj, std::ios::binary) << rep.to_json().dump(2) << '\n';
        std::ofstream(rt, std::ios::binary) << render_report(rep, std::string(system_name(s)) + " on " + c->split);
        record(rj);
        record(rt);
        log << system_name(s) << " " << c->split << ": overall micro-F1 " << rep.overall_micro_f1 << '\n';
        entry.report = rep;
      }
      summary.entries.push_back(std::move(entry));
    }
  }

  const std::string config_text = config.to_text();
  const fs::path config_path = out / "config.ini";
  std::ofstream(config_path, std::ios::binary) << config_text;
  nlohmann::json inputs = nlohmann::json::object();
  for (const auto& [name, path] : {std::pair{"train", &config.train}, {"dev", &config.dev}, {"test", &config.test}}) {
    if (!path->empty()) inputs[name] = {{"path", *path}, {"fnv1a", hex64(file_hash(*path))}};
  }
  const nlohmann::json manifest{{"tool", "triclass"},
                                {"version", kVersion},
                                {"system_format_version", kSystemFormatVersion},
                                {"config_hash", hex64(fnv1a(config_text))},
                                {"config", config_text},
                                {"config_file", "config.ini"},
                                {"seed", *config.seed},
                                {"inputs", std::move(inputs)},
                                {"artifacts", std::move(artifacts)}};
  const fs::path manifest_path = out / "manifest.json";
  std::ofstream(manifest_path, std::ios::binary) << manifest.dump(2) << '\n';
  summary.manifest_path = manifest_path.string();
  return summary;
}

}  // namespace triclass
