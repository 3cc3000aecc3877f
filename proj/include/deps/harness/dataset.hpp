#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "deps/model.hpp"

namespace deps {

/// Normalized response log: header `task_id,worker_id,label`, one row per
/// response. `tsv` is the same layout with tab separators.
enum class DatasetFormat { csv, tsv };

struct DatasetDescriptor {
  std::string name;
  std::string path;
  std::size_t n_tasks = 0;
  std::int64_t responses_total = 0;
  std::vector<int> per_task_counts;
};

struct Dataset {
  DatasetDescriptor descriptor;
  ProblemInstance instance;           // replay mode
  std::vector<std::string> task_keys;  // original task id per dense index
};

/// Reads a response log into a replay instance.
///
/// Task keys are numbered densely in order of first appearance. Worker keys
/// that are all nonnegative integers are kept as is, otherwise numbered
/// densely too. With a seed, every task's pool is shuffled (the reveal
/// order); without one, file order is kept. The budget cap defaults to half
/// the responses; a nonnegative `budget_cap` may lower it.
Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     std::optional<std::uint64_t> shuffle_seed, std::int64_t budget_cap = -1);

Dataset parse_dataset(std::istream& in, DatasetFormat format, std::optional<std::uint64_t> shuffle_seed,
                      std::int64_t budget_cap = -1, std::string name = "dataset");

/// Copy with every pool independently reshuffled.
ProblemInstance reshuffle_pools(const ProblemInstance& problem, std::uint64_t seed);

/// Writes a replay instance in the normalized CSV layout, tasks in index
/// order, each pool in reveal order.
void write_dataset_csv(std::ostream& os, const ProblemInstance& problem);

/// Gold labels: header `task_id,true_label`.
std::vector<std::pair<std::string, Label>> load_gold_labels(const std::filesystem::path& path);
std::vector<std::pair<std::string, Label>> parse_gold_labels(std::istream& in);

}  // namespace deps
