#pragma once

#include <algorithm>
#include <array>
#include <cstdio>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "triclass/corpus.hpp"
#include "triclass/delimited.hpp"
#include "triclass/labels.hpp"

namespace triclass {

/// One predicted triple per instance id.
struct PredictionSet {
  std::vector<std::string> ids;
  std::vector<LabelTriple> labels;

  std::size_t size() const { return ids.size(); }
  void add(std::string id, LabelTriple t) {
    ids.push_back(std::move(id));
    labels.push_back(t);
  }
  friend bool operator==(const PredictionSet&, const PredictionSet&) = default;
};

/// Header: id, aggression, gender, communal.
inline void write_predictions(const PredictionSet& p, std::ostream& out) {
  Record header{"id"};
  for (Task t : kAllTasks) header.emplace_back(task_name(t));
  write_record(out, header, '\t');
  for (std::size_t i = 0; i < p.size(); ++i) {
    Record rec{p.ids[i]};
    for (Task t : kAllTasks) rec.emplace_back(label_name(t, p.labels[i].get(t)));
    write_record(out, rec, '\t');
  }
}

inline PredictionSet read_predictions(std::string_view data, const std::string& source = "predictions") {
  const auto records = parse_delimited(data, '\t');
  if (records.empty()) throw DataError(source + ": missing header row");
  const auto& header = records[0];
  if (header.size() != 4 || header[0] != "id") throw DataError(source + ": expected header id/aggression/gender/communal");
  for (Task t : kAllTasks) {
    if (header[1 + static_cast<std::size_t>(t)] != task_name(t)) {
      throw DataError(source + ": expected header id/aggression/gender/communal");
    }
  }
  PredictionSet p;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    if (rec.size() == 1 && rec[0].empty()) continue;
    if (rec.size() != 4) throw DataError(source + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) + " fields");
    LabelTriple t;
    for (Task task : kAllTasks) {
      const auto v = parse_label(task, rec[1 + static_cast<std::size_t>(task)]);
      if (!v) throw DataError(source + ": row " + std::to_string(r) + ": bad " + std::string(task_name(task)) + " label");
      t.set(task, *v);
    }
    p.add(rec[0], t);
  }
  return p;
}

/// Gold triples reordered to match the prediction ids. Throws unless the two
/// id sets are identical and duplicate-free.
inline std::vector<LabelTriple> align_gold(const PredictionSet& preds, const Corpus& gold) {
  if (!gold.labeled) throw std::invalid_argument("gold corpus is unlabeled");
  std::unordered_map<std::string, std::size_t> where;
  for (std::size_t i = 0; i < gold.size(); ++i) where.emplace(gold.instances[i].id, i);
  if (preds.size() != gold.size()) {
    throw std::invalid_argument("id mismatch: " + std::to_string(preds.size()) + " predictions for " +
                                std::to_string(gold.size()) + " gold instances");
  }
  std::vector<LabelTriple> out;
  out.reserve(preds.size());
  std::vector<bool> used(gold.size(), false);
  for (const auto& id : preds.ids) {
    auto it = where.find(id);
    if (it == where.end()) throw std::invalid_argument("id mismatch: '" + id + "' not in gold");
    if (used[it->second]) throw std::invalid_argument("id mismatch: '" + id + "' predicted twice");
    used[it->second] = true;
    out.push_back(*gold.instances[it->second].labels);
  }
  return out;
}

// --------------------------------------------------------------------------
// Metrics over aligned triples

namespace detail {
inline void check_aligned(std::span<const LabelTriple> pred, std::span<const LabelTriple> gold) {
  if (pred.size() != gold.size()) throw std::invalid_argument("id mismatch: prediction and gold sizes differ");
  if (pred.empty()) throw std::invalid_argument("no instances to score");
}
}  // namespace detail

/// rows = gold class, columns = predicted class.
using ConfusionMatrix = std::vector<std::vector<std::size_t>>;

inline ConfusionMatrix confusion(std::span<const LabelTriple> pred, std::span<const LabelTriple> gold, Task task) {
  detail::check_aligned(pred, gold);
  const std::size_t k = class_count(task);
  ConfusionMatrix m(k, std::vector<std::size_t>(k, 0));
  for (std::size_t i = 0; i < pred.size(); ++i) {
    ++m[static_cast<std::size_t>(gold[i].get(task))][static_cast<std::size_t>(pred[i].get(task))];
  }
  return m;
}

inline double task_accuracy(std::span<const LabelTriple> pred, std::span<const LabelTriple> gold, Task task) {
  detail::check_aligned(pred, gold);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) correct += pred[i].get(task) == gold[i].get(task);
  return static_cast<double>(correct) / static_cast<double>(pred.size());
}

/// Micro-averaged F1 from class-pooled TP/FP/FN.
inline double task_micro_f1(std::span<const LabelTriple> pred, std::span<const LabelTriple> gold, Task task) {
  const auto m = confusion(pred, gold, task);
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  for (std::size_t c = 0; c < m.size(); ++c) {
    for (std::size_t p = 0; p < m.size(); ++p) {
      if (c == p) {
        tp += m[c][p];
      } else {
        fp += m[c][p];  // false positive for class p
        fn += m[c][p];  // false negative for class c
      }
    }
  }
  const double denom = static_cast<double>(2 * tp + fp + fn);
  return denom == 0.0 ? 0.0 : static_cast<double>(2 * tp) / denom;
}

/// Micro average over all (instance, task) decisions.
inline double overall_micro_f1(std::span<const LabelTriple> pred, std::span<const LabelTriple> gold) {
  detail::check_aligned(pred, gold);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    for (Task t : kAllTasks) correct += pred[i].get(t) == gold[i].get(t);
  }
  return static_cast<double>(correct) / static_cast<double>(pred.size() * kAllTasks.size());
}

/// Fraction of instances whose whole triple is right.
inline double instance_f1(std::span<const LabelTriple> pred, std::span<const LabelTriple> gold) {
  detail::check_aligned(pred, gold);
  std::size_t exact = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) exact += pred[i] == gold[i];
  return static_cast<double>(exact) / static_cast<double>(pred.size());
}

/// Combines per-task accuracies with equal task counts.
inline double overall_from_task_scores(std::span<const double> scores) {
  double s = 0.0;
  for (double v : scores) s += v;
  return s / static_cast<double>(scores.size());
}

// --------------------------------------------------------------------------
// Report

inline constexpr const char* kInstanceF1Definition = "fraction of instances whose full label triple is exactly right";
inline constexpr const char* kOverallMicroF1Definition = "micro average over all (instance, task) decisions";

struct TaskReport {
  double accuracy = 0.0;
  double micro_f1 = 0.0;
  ConfusionMatrix confusion;
  friend bool operator==(const TaskReport&, const TaskReport&) = default;
};

struct EvalReport {
  std::size_t instances = 0;
  double instance_f1 = 0.0;
  double overall_micro_f1 = 0.0;
  std::array<TaskReport, 3> tasks;

  const TaskReport& task(Task t) const { return tasks[static_cast<std::size_t>(t)]; }

  nlohmann::json to_json() const {
    nlohmann::json j{{"instances", instances},
                     {"instance_f1", instance_f1},
                     {"overall_micro_f1", overall_micro_f1},
                     {"definitions", {{"instance_f1", kInstanceF1Definition},
                                      {"overall_micro_f1", kOverallMicroF1Definition}}}};
    for (Task t : kAllTasks) {
      const auto& r = task(t);
      const auto names = class_names(t);
      j["tasks"][std::string(task_name(t))] = {{"accuracy", r.accuracy},
                                               {"micro_f1", r.micro_f1},
                                               {"classes", std::vector<std::string>(names.begin(), names.end())},
                                               {"confusion", r.confusion}};
    }
    return j;
  }

  static EvalReport from_json(const nlohmann::json& j) {
    EvalReport r;
    r.instances = j.at("instances").get<std::size_t>();
    r.instance_f1 = j.at("instance_f1").get<double>();
    r.overall_micro_f1 = j.at("overall_micro_f1").get<double>();
    for (Task t : kAllTasks) {
      const auto& tj = j.at("tasks").at(std::string(task_name(t)));
      auto& tr = r.tasks[static_cast<std::size_t>(t)];
      tr.accuracy = tj.at("accuracy").get<double>();
      tr.micro_f1 = tj.at("micro_f1").get<double>();
      tr.confusion = tj.at("confusion").get<ConfusionMatrix>();
    }
    return r;
  }

  friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

inline EvalReport make_report(std::span<const LabelTriple> pred, std::span<const LabelTriple> gold) {
  EvalReport r;
  r.instances = pred.size();
  r.instance_f1 = instance_f1(pred, gold);
  r.overall_micro_f1 = overall_micro_f1(pred, gold);
  for (Task t : kAllTasks) {
    auto& tr = r.tasks[static_cast<std::size_t>(t)];
    tr.accuracy = task_accuracy(pred, gold, t);
    tr.micro_f1 = task_micro_f1(pred, gold, t);
    tr.confusion = confusion(pred, gold, t);
  }
  return r;
}

inline EvalReport make_report(const PredictionSet& preds, const Corpus& gold) {
  const auto aligned = align_gold(preds, gold);
  return make_report(preds.labels, aligned);
}

namespace detail {
inline std::string fixed(double v, int digits = 4) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}
}  // namespace detail

/// Aligned plain-text table plus confusion matrices.
inline std::string render_report(const EvalReport& r, const std::string& title = "") {
  std::ostringstream out;
  if (!title.empty()) out << title << '\n';
  out << "instances          " << r.instances << '\n';
  out << "Instance F1        " << detail::fixed(r.instance_f1) << "   (" << kInstanceF1Definition << ")\n";
  out << "Overall micro-F1   " << detail::fixed(r.overall_micro_f1) << "   (" << kOverallMicroF1Definition << ")\n";
  out << '\n' << "task         accuracy  micro-F1\n";
  for (Task t : kAllTasks) {
    std::string name(task_name(t));
    name.resize(13, ' ');
    out << name << detail::fixed(r.task(t).accuracy) << "    " << detail::fixed(r.task(t).micro_f1) << '\n';
  }
  for (Task t : kAllTasks) {
    const auto names = class_names(t);
    out << '\n' << task_name(t) << " confusion (rows gold, columns predicted)\n";
    out << "      ";
    for (const auto& n : names) {
      std::string cell(n);
      cell.insert(0, 7 - std::min<std::size_t>(cell.size(), 7), ' ');
      out << cell;
    }
    out << '\n';
    for (std::size_t g = 0; g < names.size(); ++g) {
      std::string row(names[g]);
      row.resize(6, ' ');
      out << row;
      for (std::size_t p = 0; p < names.size(); ++p) {
        std::string cell = std::to_string(r.task(t).confusion[g][p]);
        cell.insert(0, 7 - std::min<std::size_t>(cell.size(), 7), ' ');
        out << cell;
      }
      out << '\n';
    }
  }
  return out.str();
}

}  // namespace triclass
