#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace triclass {

/// The three labeling tasks, each with a closed class set.
enum class Task : std::uint8_t { aggression = 0, gender = 1, communal = 2 };

inline constexpr std::array<Task, 3> kAllTasks{Task::aggression, Task::gender, Task::communal};

namespace detail {
inline constexpr std::array<std::string_view, 3> kAggressionClasses{"OAG", "CAG", "NAG"};
inline constexpr std::array<std::string_view, 2> kGenderClasses{"GEN", "NGEN"};
inline constexpr std::array<std::string_view, 2> kCommunalClasses{"COM", "NCOM"};
}  // namespace detail

inline std::span<const std::string_view> class_names(Task task) {
  switch (task) {
    case Task::aggression: return detail::kAggressionClasses;
    case Task::gender: return detail::kGenderClasses;
    case Task::communal: return detail::kCommunalClasses;
  }
  throw std::invalid_argument("unknown task");
}

inline std::size_t class_count(Task task) { return class_names(task).size(); }

inline std::string_view task_name(Task task) {
  switch (task) {
    case Task::aggression: return "aggression";
    case Task::gender: return "gender";
    case Task::communal: return "communal";
  }
  throw std::invalid_argument("unknown task");
}

inline std::optional<Task> parse_task(std::string_view name) {
  for (Task t : kAllTasks) {
    if (task_name(t) == name) return t;
  }
  return std::nullopt;
}

inline Task task_from_name(std::string_view name) {
  if (auto t = parse_task(name)) return *t;
  throw std::invalid_argument("unknown task id: " + std::string(name));
}

/// Trimmed, ASCII-uppercased lookup in the task's class set.
inline std::optional<int> parse_label(Task task, std::string_view raw) {
  while (!raw.empty() && (raw.front() == ' ' || raw.front() == '\t')) raw.remove_prefix(1);
  while (!raw.empty() && (raw.back() == ' ' || raw.back() == '\t')) raw.remove_suffix(1);
  std::string upper(raw);
  for (char& c : upper) {
    if (c >= 'a' && c <= 'z') c = static_cast<char>(c - 'a' + 'A');
  }
  const auto names = class_names(task);
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == upper) return static_cast<int>(i);
  }
  return std::nullopt;
}

inline std::string_view label_name(Task task, int label) {
  const auto names = class_names(task);
  if (label < 0 || static_cast<std::size_t>(label) >= names.size()) {
    throw std::out_of_range("label index out of range");
  }
  return names[static_cast<std::size_t>(label)];
}

/// One class index per task.
struct LabelTriple {
  std::array<std::uint8_t, 3> classes{};

  static LabelTriple of(int aggression, int gender, int communal) {
    LabelTriple t;
    t.set(Task::aggression, aggression);
    t.set(Task::gender, gender);
    t.set(Task::communal, communal);
    return t;
  }

  int get(Task task) const { return classes[static_cast<std::size_t>(task)]; }

  void set(Task task, int label) {
    if (label < 0 || static_cast<std::size_t>(label) >= class_count(task)) {
      throw std::out_of_range("label index out of range for task");
    }
    classes[static_cast<std::size_t>(task)] = static_cast<std::uint8_t>(label);
  }

  friend bool operator==(const LabelTriple&, const LabelTriple&) = default;
};

}  // namespace triclass
