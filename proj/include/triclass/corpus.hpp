#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "triclass/delimited.hpp"
#include "triclass/labels.hpp"
#include "triclass/text.hpp"

namespace triclass {

/// Raised for unreadable or structurally invalid dataset files.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Instance {
  std::string id;
  std::string text;
  std::optional<LabelTriple> labels;

  friend bool operator==(const Instance&, const Instance&) = default;
};

struct Corpus {
  std::string split;
  std::vector<Instance> instances;
  bool labeled = false;

  std::size_t size() const { return instances.size(); }
  bool empty() const { return instances.empty(); }

  std::vector<int> labels_for(Task task) const {
    if (!labeled) throw std::invalid_argument("corpus '" + split + "' is unlabeled");
    std::vector<int> y;
    y.reserve(instances.size());
    for (const auto& inst : instances) y.push_back(inst.labels->get(task));
    return y;
  }

  friend bool operator==(const Corpus&, const Corpus&) = default;
};

/// Why rows were dropped during ingestion.
struct DropReport {
  std::size_t data_rows = 0;
  std::size_t dropped = 0;
  std::map<std::string, std::size_t> reasons;

  void drop(const std::string& reason) {
    ++dropped;
    ++reasons[reason];
  }

  nlohmann::json to_json() const {
    return {{"dropped", dropped}, {"data_rows", data_rows}, {"reasons", reasons}};
  }
};

struct LoadOptions {
  bool labeled = true;
  /// Strict mode turns unknown labels and malformed rows into errors.
  bool strict = false;
  /// Split name; defaults to the file stem.
  std::string split;
  std::ostream* warnings = &std::cerr;
};

struct LoadResult {
  Corpus corpus;
  DropReport report;
};

namespace detail {

inline std::string lower_trimmed(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

inline bool blank_record(const Record& r) { return r.size() == 1 && r[0].empty(); }

}  // namespace detail

/// Empty, whitespace-only, or the literal NaN marker.
inline bool is_missing_text(std::string_view text) {
  std::size_t pos = 0;
  bool all_space = true;
  while (pos < text.size()) {
    if (!unicode::is_space(unicode::next_scalar(text, pos))) {
      all_space = false;
      break;
    }
  }
  if (all_space) return true;
  const std::string t = detail::lower_trimmed(text);
  return t == "nan";
}

inline LoadResult load_dataset(const std::string& path, const LoadOptions& options = {}) {
  if (!std::filesystem::exists(path)) throw DataError("dataset file not found: " + path);
  std::vector<Record> records;
  try {
    records = parse_delimited(read_file(path), delimiter_for(path));
  } catch (const std::runtime_error& e) {
    throw DataError(path + ": " + e.what());
  }
  while (!records.empty() && detail::blank_record(records.back())) records.pop_back();
  if (records.empty()) throw DataError(path + ": missing header row");

  std::map<std::string, std::size_t> columns;
  for (std::size_t i = 0; i < records[0].size(); ++i) {
    columns.emplace(detail::lower_trimmed(records[0][i]), i);
  }
  auto column = [&](const char* name) -> std::size_t {
    auto it = columns.find(name);
    if (it == columns.end()) throw DataError(path + ": missing required column '" + name + "'");
    return it->second;
  };
  const std::size_t id_col = column("id");
  const std::size_t text_col = column("text");
  std::array<std::size_t, 3> label_cols{};
  if (options.labeled) {
    for (Task t : kAllTasks) label_cols[static_cast<std::size_t>(t)] = column(task_name(t).data());
  }
  std::size_t needed = std::max(id_col, text_col);
  if (options.labeled) needed = std::max(needed, *std::max_element(label_cols.begin(), label_cols.end()));

  LoadResult result;
  result.corpus.labeled = options.labeled;
  result.corpus.split =
      options.split.empty() ? std::filesystem::path(path).stem().string() : options.split;
  std::unordered_set<std::string> seen;
  auto warn = [&](std::size_t row, const std::string& msg) {
    if (options.warnings) *options.warnings << path << ": row " << row << ": " << msg << '\n';
  };

  for (std::size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    if (detail::blank_record(rec)) continue;
    ++result.report.data_rows;
    if (rec.size() <= needed) {
      if (options.strict) {
        throw DataError(path + ": row " + std::to_string(r) + " has " + std::to_string(rec.size()) +
                        " fields");
      }
      result.report.drop("malformed_row");
      continue;
    }
    Instance inst{rec[id_col], rec[text_col], std::nullopt};
    if (detail::lower_trimmed(inst.id).empty()) {
      result.report.drop("empty_id");
      continue;
    }
    if (is_missing_text(inst.text)) {
      result.report.drop("nan_text");
      continue;
    }
    if (options.labeled) {
      LabelTriple triple;
      bool ok = true;
      for (Task t : kAllTasks) {
        const std::string& raw = rec[label_cols[static_cast<std::size_t>(t)]];
        auto label = parse_label(t, raw);
        if (!label) {
          if (options.strict) {
            throw DataError(path + ": row " + std::to_string(r) + ": unknown " +
                            std::string(task_name(t)) + " label '" + raw + "'");
          }
          warn(r, "unknown " + std::string(task_name(t)) + " label '" + raw + "'");
          ok = false;
          break;
        }
        triple.set(t, *label);
      }
      if (!ok) {
        result.report.drop("bad_label");
        continue;
      }
      inst.labels = triple;
    }
    if (!seen.insert(inst.id).second) {
      warn(r, "duplicate id '" + inst.id + "', keeping first occurrence");
      result.report.drop("duplicate_id");
      continue;
    }
    result.corpus.instances.push_back(std::move(inst));
  }
  return result;
}

/// Writes the corpus in the same layout load_dataset reads.
inline void save_dataset(const Corpus& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write dataset: " + path);
  const char delim = delimiter_for(path);
  Record header{"id", "text"};
  if (corpus.labeled) {
    for (Task t : kAllTasks) header.emplace_back(task_name(t));
  }
  write_record(out, header, delim);
  for (const auto& inst : corpus.instances) {
    Record rec{inst.id, inst.text};
    if (corpus.labeled) {
      if (!inst.labels) throw std::invalid_argument("labeled corpus has an unlabeled instance");
      for (Task t : kAllTasks) rec.emplace_back(label_name(t, inst.labels->get(t)));
    }
    write_record(out, rec, delim);
  }
}

inline void write_drop_report(const DropReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write drop report: " + path);
  out << report.to_json().dump(2) << '\n';
}

struct CorpusStats {
  std::size_t instances = 0;
  std::size_t tokens = 0;
  std::size_t chars = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

inline CorpusStats corpus_stats(const Corpus& corpus) {
  CorpusStats s;
  s.instances = corpus.size();
  for (const auto& inst : corpus.instances) {
    s.tokens += tokenize(inst.text).size();
    s.chars += unicode::scalar_count(inst.text);
  }
  return s;
}

}  // namespace triclass
