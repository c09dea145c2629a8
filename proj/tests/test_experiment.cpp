#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "triclass/experiment.hpp"
#include "triclass/synthetic.hpp"

using namespace triclass;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / "triclass_experiment_tests" / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Small synthetic train/dev pair on disk.
struct SmallData {
  fs::path dir;
  std::string train;
  std::string dev;
};

SmallData small_data(const std::string& name) {
  SmallData d{scratch(name), "", ""};
  SyntheticSpec s;
  s.instances = 240;
  s.seed = 5;
  s.split = "train";
  s.id_prefix = "tr";
  d.train = (d.dir / "train.tsv").string();
  save_dataset(generate_synthetic(s), d.train);
  s.instances = 80;
  s.seed = 6;
  s.split = "dev";
  s.id_prefix = "dv";
  d.dev = (d.dir / "dev.tsv").string();
  save_dataset(generate_synthetic(s), d.dev);
  return d;
}

ExperimentConfig small_config(const SmallData& d, const std::string& out) {
  ExperimentConfig c;
  c.train = d.train;
  c.dev = d.dev;
  c.seed = 4;
  c.threads = 1;
  c.output = (d.dir / out).string();
  c.s1_features = 100;
  c.folds = 3;
  return c;
}

int cli(const std::string& args) {
  const std::string cmd = std::string(TRICLASS_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

}  // namespace

TEST(Config, ParsesSectionsAndComments) {
  const auto c = ExperimentConfig::parse(
      "# experiment\n[data]\ntrain = a.tsv\nstrict = true\n\n[experiment]\nseed = 12\nsystems = s2\n"
      "[s2]\nfeatures = 500\nk_values = 1, 3\n[s1]\nfolds = 4\n");
  EXPECT_EQ(c.train, "a.tsv");
  EXPECT_TRUE(c.strict);
  EXPECT_EQ(c.seed, 12u);
  EXPECT_EQ(c.system_list(), std::vector<System>{System::s2});
  EXPECT_EQ(c.features, 500u);
  EXPECT_EQ(c.sweep_options().k_values, (std::vector<std::size_t>{1, 3}));
  EXPECT_EQ(c.folds, 4u);
  EXPECT_EQ(c.k, 1u);
}

TEST(Config, RejectsBadInput) {
  EXPECT_THROW(ExperimentConfig::parse("[data]\ntrain = a\ntrain = b\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("[s2]\ntrain = a\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("[data]\nbanana = 1\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("[data\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("[s2]\nfeatures = many\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("[s2]\nfeatures\n"), ConfigError);
  EXPECT_THROW(ExperimentConfig::parse("[data]\nstrict = perhaps\n"), ConfigError);
  ExperimentConfig c;
  EXPECT_THROW(c.set("nope", "1"), ConfigError);
}

TEST(Config, TextRoundTripAndOverrides) {
  ExperimentConfig c;
  c.train = "x.tsv";
  c.seed = 3;
  c.sweep = true;
  c.set("k_values", "1,5");
  c.set("features", "1234");
  const auto back = ExperimentConfig::parse(c.to_text());
  EXPECT_EQ(back.to_text(), c.to_text());
  EXPECT_EQ(back.features, 1234u);
  EXPECT_EQ(back.seed, 3u);
}

TEST(Config, ValidateRequiresSeedAndExistingPaths) {
  const auto d = small_data("validate");
  ExperimentConfig c;
  c.train = d.train;
  EXPECT_THROW(c.validate(), ConfigError);
  c.seed = 1;
  EXPECT_NO_THROW(c.validate());
  c.dev = (d.dir / "missing.tsv").string();
  EXPECT_THROW(c.validate(), ConfigError);
  c.dev.clear();
  c.sweep = true;
  EXPECT_THROW(c.validate(), ConfigError);
  c.sweep = false;
  c.tasks = "gender,humor";
  EXPECT_THROW(c.validate(), ConfigError);
  c.tasks = "gender";
  c.unit = "syllable";
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Run, ByteIdenticalAcrossRunsAndThreadCounts) {
  const auto d = small_data("determinism");
  std::ostringstream log;
  auto a = small_config(d, "a");
  auto b = small_config(d, "b");
  b.threads = 4;
  run(a, log);
  run(b, log);
  for (const char* sys : {"s1", "s2"}) {
    const auto pa = slurp(fs::path(a.output) / sys / "dev.predictions.tsv");
    ASSERT_FALSE(pa.empty());
    EXPECT_EQ(pa, slurp(fs::path(b.output) / sys / "dev.predictions.tsv")) << sys;
    EXPECT_EQ(slurp(fs::path(a.output) / sys / "model.json"), slurp(fs::path(b.output) / sys / "model.json")) << sys;
  }
}

TEST(Run, WritesManifestAndReports) {
  const auto d = small_data("manifest");
  std::ostringstream log;
  auto c = small_config(d, "out");
  c.systems = "s2";
  c.sweep = true;
  c.sweep_min = 50;
  c.sweep_max = 150;
  c.sweep_step = 50;
  c.k_values = "1,3";
  const auto summary = run(c, log);
  ASSERT_EQ(summary.entries.size(), 1u);
  ASSERT_TRUE(summary.entries[0].report.has_value());
  const auto manifest = nlohmann::json::parse(slurp(summary.manifest_path));
  EXPECT_EQ(manifest.at("version"), std::string(kVersion));
  EXPECT_EQ(manifest.at("config_hash"), hex64(fnv1a(slurp(fs::path(c.output) / "config.ini"))));
  EXPECT_EQ(manifest.at("inputs").at("train").at("fnv1a"), hex64(fnv1a(slurp(d.train))));
  for (const auto& artifact : manifest.at("artifacts")) {
    EXPECT_TRUE(fs::exists(fs::path(c.output) / artifact.get<std::string>())) << artifact;
  }
  EXPECT_TRUE(fs::exists(fs::path(c.output) / "s2" / "gender.sweep.tsv"));
  // The saved config reproduces the run's settings.
  const auto again = ExperimentConfig::load((fs::path(c.output) / "config.ini").string());
  EXPECT_EQ(again.to_text(), c.to_text());
  const auto rep = EvalReport::from_json(nlohmann::json::parse(slurp(fs::path(c.output) / "s2" / "dev.report.json")));
  EXPECT_EQ(rep, *summary.entries[0].report);
}

TEST(Run, TasksAreTrainedIndependently) {
  const auto d = small_data("independence");
  LoadOptions lo;
  const Corpus train = load_dataset(d.train, lo).corpus;
  TrainOptions all;
  all.threads = 1;
  all.s1_features = 80;
  all.folds = 3;
  TrainOptions one = all;
  one.tasks = {Task::gender};
  for (System s : {System::s1, System::s2}) {
    const auto full = train_system(s, train, nullptr, all).model.to_json();
    const auto single = train_system(s, train, nullptr, one).model.to_json();
    EXPECT_EQ(full.at("tasks").at(1), single.at("tasks").at(0)) << system_name(s);
  }
}

TEST(SystemModel, SaveLoadPredictsTheSame) {
  const auto d = small_data("saveload");
  LoadOptions lo;
  const Corpus train = load_dataset(d.train, lo).corpus;
  const Corpus dev = load_dataset(d.dev, lo).corpus;
  TrainOptions o;
  o.threads = 1;
  o.s1_features = 60;
  o.folds = 2;
  for (System s : {System::s1, System::s2}) {
    const auto model = train_system(s, train, nullptr, o).model;
    const auto path = (d.dir / (std::string(system_name(s)) + ".json")).string();
    model.save(path);
    EXPECT_EQ(SystemModel::load(path).predict(dev, 1), model.predict(dev, 1));
  }
}

TEST(Cli, ExitCodes) {
  const auto d = small_data("cli");
  const std::string out = (d.dir / "run").string();
  EXPECT_EQ(cli("--help"), 0);
  EXPECT_EQ(cli(""), 2);
  EXPECT_EQ(cli("frobnicate"), 2);
  EXPECT_EQ(cli("run --seed 1 --train " + (d.dir / "absent.tsv").string() + " --output " + out), 2);
  EXPECT_EQ(cli("run --train " + d.train + " --output " + out), 2);
  EXPECT_EQ(cli("run --seed 1 --train " + d.train + " --dev " + d.dev + " --systems s2 --output " + out), 0);
  EXPECT_TRUE(fs::exists(fs::path(out) / "s2" / "dev.predictions.tsv"));
  EXPECT_EQ(cli("score --gold " + d.dev + " --pred " + (fs::path(out) / "s2" / "dev.predictions.tsv").string()), 0);
  // Predictions for the wrong split: ids do not match.
  EXPECT_EQ(cli("score --gold " + d.train + " --pred " + (fs::path(out) / "s2" / "dev.predictions.tsv").string()), 1);
  EXPECT_EQ(cli("synth --output " + (d.dir / "syn").string() + " --train 30 --dev 10 --seed 2"), 0);
  EXPECT_TRUE(fs::exists(d.dir / "syn" / "synthetic.json"));
  EXPECT_EQ(cli("synth --output " + (d.dir / "syn").string()), 2);
  EXPECT_EQ(cli("report " + out), 0);
}
