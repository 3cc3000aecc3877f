#include "deps/harness/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_map>

#include "deps/error.hpp"
#include "deps/rng.hpp"

namespace deps {

namespace {

std::string trim(std::string s) {
  const auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(trim(field));
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::optional<long long> parse_nonneg_int(const std::string& s) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc{} || ptr != end || v < 0) return std::nullopt;
  return v;
}

Label parse_label(const std::string& s, std::size_t line) {
  if (s == "0") return Label::zero;
  if (s == "1") return Label::one;
  throw ValidationError("non-binary label '" + s + "' (line " + std::to_string(line) + ")");
}

struct RawRow {
  std::string task;
  std::string worker;
  Label label;
  std::size_t line;
};

}  // namespace

Dataset parse_dataset(std::istream& in, DatasetFormat format, std::optional<std::uint64_t> shuffle_seed,
                      std::int64_t budget_cap, std::string name) {
  const char sep = format == DatasetFormat::csv ? ',' : '\t';
  std::string line;
  std::size_t line_no = 0;

  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    header = split(line, sep);
    break;
  }
  if (header.empty()) throw ValidationError("dataset is empty");
  if (header != std::vector<std::string>{"task_id", "worker_id", "label"}) {
    throw ParseError("expected header task_id,worker_id,label", line_no);
  }

  std::vector<RawRow> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, sep);
    if (fields.size() != 3 || fields[0].empty() || fields[1].empty() || fields[2].empty()) {
      throw ParseError("expected 3 fields task_id,worker_id,label", line_no);
    }
    rows.push_back({fields[0], fields[1], parse_label(fields[2], line_no), line_no});
  }
  if (rows.empty()) throw ValidationError("dataset has no responses");

  const bool numeric_workers =
      std::all_of(rows.begin(), rows.end(), [](const RawRow& r) { return parse_nonneg_int(r.worker).has_value(); });

  std::unordered_map<std::string, int> task_index;
  std::unordered_map<std::string, int> worker_index;
  std::vector<std::string> task_keys;
  std::vector<ResponsePool> pools;
  std::set<std::pair<int, int>> seen;
  for (const auto& r : rows) {
    auto [tit, new_task] = task_index.try_emplace(r.task, static_cast<int>(task_keys.size()));
    if (new_task) {
      task_keys.push_back(r.task);
      pools.emplace_back();
    }
    int worker = 0;
    if (numeric_workers) {
      const long long w = *parse_nonneg_int(r.worker);
      if (w > std::numeric_limits<int>::max()) throw ParseError("worker id out of range", r.line);
      worker = static_cast<int>(w);
    } else {
      worker = worker_index.try_emplace(r.worker, static_cast<int>(worker_index.size())).first->second;
    }
    if (!seen.emplace(tit->second, worker).second) {
      throw ValidationError("worker '" + r.worker + "' answers task '" + r.task + "' twice (line " +
                            std::to_string(r.line) + ")");
    }
    pools[tit->second].push_back({tit->second, worker, r.label});
  }

  if (shuffle_seed) {
    Rng rng(*shuffle_seed);
    for (auto& p : pools) rng.shuffle(std::span<ResponseRecord>(p));
  }

  Dataset out;
  out.task_keys = std::move(task_keys);
  out.descriptor.name = std::move(name);
  out.descriptor.n_tasks = pools.size();
  out.descriptor.responses_total = static_cast<std::int64_t>(rows.size());
  for (const auto& p : pools) out.descriptor.per_task_counts.push_back(static_cast<int>(p.size()));

  const std::int64_t default_cap = out.descriptor.responses_total / 2;
  if (budget_cap > default_cap) {
    throw ConfigError("budget cap may only lower the default of half the responses (" + std::to_string(default_cap) +
                      ")");
  }
  out.instance = ProblemInstance::from_pools(std::move(pools), budget_cap < 0 ? default_cap : budget_cap);
  return out;
}

Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                     std::optional<std::uint64_t> shuffle_seed, std::int64_t budget_cap) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open dataset " + path.string());
  Dataset d = parse_dataset(in, format, shuffle_seed, budget_cap, path.stem().string());
  d.descriptor.path = path.string();
  return d;
}

ProblemInstance reshuffle_pools(const ProblemInstance& problem, std::uint64_t seed) {
  if (problem.mode != ProblemInstance::Mode::replay) throw ContractError("only replay instances have pools");
  ProblemInstance out = problem;
  Rng rng(seed);
  for (auto& p : out.pools) rng.shuffle(std::span<ResponseRecord>(p));
  return out;
}

void write_dataset_csv(std::ostream& os, const ProblemInstance& problem) {
  if (problem.mode != ProblemInstance::Mode::replay) throw ContractError("only replay instances can be exported");
  os << "task_id,worker_id,label\n";
  for (std::size_t i = 0; i < problem.pools.size(); ++i) {
    for (const auto& r : problem.pools[i]) os << i << ',' << r.worker_id << ',' << to_int(r.label) << '\n';
  }
}

std::vector<std::pair<std::string, Label>> parse_gold_labels(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<std::pair<std::string, Label>> out;
  std::set<std::string> seen;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    auto fields = split(line, ',');
    if (!header_seen) {
      if (fields != std::vector<std::string>{"task_id", "true_label"}) {
        throw ParseError("expected header task_id,true_label", line_no);
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 2 || fields[0].empty()) throw ParseError("expected 2 fields task_id,true_label", line_no);
    if (!seen.insert(fields[0]).second) {
      throw ValidationError("gold task '" + fields[0] + "' listed twice (line " + std::to_string(line_no) + ")");
    }
    out.emplace_back(fields[0], parse_label(fields[1], line_no));
  }
  if (out.empty()) throw ValidationError("gold-standard file has no tasks");
  return out;
}

std::vector<std::pair<std::string, Label>> load_gold_labels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open gold-standard file " + path.string());
  return parse_gold_labels(in);
}

}  // namespace deps
