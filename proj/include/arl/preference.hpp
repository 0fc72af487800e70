#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "arl/argumentation.hpp"
#include "arl/env.hpp"
#include "arl/trajectory.hpp"

namespace arl {

enum class LabelSource { Human, Synthetic, Generalised };

std::string_view source_name(LabelSource s);
LabelSource source_from_name(std::string_view name);

struct PreferenceRecord {
  int winner = 0;
  int loser = 0;
  LabelSource source = LabelSource::Synthetic;
  std::optional<int> query_id;
  std::string timestamp;  // empty for derived (synthetic, generalised) records
  bool tied = false;
};

/// {"winner","loser","source","tied"} plus "query_id" and "ts" when set.
nlohmann::json record_to_json(const PreferenceRecord& r);
PreferenceRecord record_from_json(const nlohmann::json& j);

/// Current UTC time, ISO 8601 with milliseconds.
std::string utc_timestamp();

/// Winner has the larger undiscounted true return; equal returns go to the lower id
/// with the tie flag set.
PreferenceRecord synthetic_pair_label(const MazeEnv& env, const Trajectory& t1, const Trajectory& t2);

/// Up to n distinct attacking pairs, uniformly without replacement; all pairs when fewer exist.
std::vector<IdPair> sample_queries(const Aaf& aaf, int n, Rng& rng);

enum class Ordering { First, Second };

struct Comparison {
  Ordering order = Ordering::First;
  bool tied = false;
};

class QueryBudget {
 public:
  explicit QueryBudget(int max_queries) : max_(max_queries) {}
  /// Throws BudgetExhausted when no queries remain.
  void consume();
  int used() const { return used_; }
  int max_queries() const { return max_; }
  int remaining() const { return max_ - used_; }

 private:
  int max_;
  int used_ = 0;
};

/// Counting wrapper around a pairwise comparison over items (extension indices).
/// compare(i, j) == First means i ranks above j.
class Comparator {
 public:
  using Fn = std::function<Comparison(int, int)>;

  explicit Comparator(Fn fn, QueryBudget* budget = nullptr) : fn_(std::move(fn)), budget_(budget) {}

  Comparison operator()(int i, int j);
  long comparison_count() const { return count_; }
  long tie_count() const { return ties_; }

 private:
  Fn fn_;
  QueryBudget* budget_;
  long count_ = 0;
  long ties_ = 0;
};

/// Orders by the summed true return of each extension's members, larger first;
/// equal sums put the lower extension index first.
Comparison synthetic_extension_compare(const MazeEnv& env, const TrajectoryStore& store,
                                       const PreferredExtension& p_i, const PreferredExtension& p_j);

/// Same ordering as synthetic_extension_compare, with member returns precomputed
/// (returns[id] is the true return of trajectory id).
Comparison return_sum_compare(const std::vector<double>& returns, const PreferredExtension& p_i,
                              const PreferredExtension& p_j);

/// Orders by preference counts between members; equal counts put the lower index first.
Comparison count_extension_compare(const std::vector<PreferenceRecord>& labels,
                                   const PreferredExtension& p_i, const PreferredExtension& p_j);

struct SortResult {
  std::vector<int> order;  // best first
  long comparisons = 0;
  /// False when the comparator's budget ran out; `order` then holds the sorted
  /// prefix followed by the items never inserted.
  bool valid = true;
};

/// Binary insertion sort, at most sum_{i=2..n} ceil(log2 i) comparisons.
SortResult binary_insertion_sort(const std::vector<int>& items, Comparator& cmp);

/// sum_{i=2..n} ceil(log2 i).
long insertion_comparison_bound(long n);

/// One generalised record per attacking pair (a, b) with a lifted above b.
/// Pairs lifted in both directions are dropped.
std::vector<PreferenceRecord> build_generalised_dataset(const Aaf& aaf, const std::vector<IdPair>& lifted);

enum class Choice { Left, Right, Skip };

std::string_view choice_name(Choice c);
Choice choice_from_name(std::string_view name);

/// Answers one query about the (left, right) trajectory pair.
using PairLabeler = std::function<Choice(int left, int right)>;

/// Synthetic oracle as a labeler: prefers the larger true return.
PairLabeler synthetic_labeler(const MazeEnv& env, const TrajectoryStore& store);

/// Comparator that spends one labeler query per extension comparison, on an
/// attacking pair drawn from the two extensions' symmetric difference. Every
/// answer is appended to `answers`; skips fall back to the lower-index tie rule.
Comparator::Fn live_extension_compare(const Aaf& aaf, const std::vector<PreferredExtension>& extensions,
                                      PairLabeler labeler, Rng& rng,
                                      std::vector<PreferenceRecord>& answers);

/// One line of the append-only label log.
struct LabelLogEntry {
  int query_id = 0;
  int left = 0;
  int right = 0;
  Choice choice = Choice::Skip;
  LabelSource source = LabelSource::Human;
  std::string ts;

  nlohmann::json to_json() const;
  static LabelLogEntry from_json(const nlohmann::json& j);
  /// Preference implied by the entry, none for skips.
  std::optional<PreferenceRecord> record() const;
};

/// Append-only JSONL label log; writes are serialised.
class LabelLog {
 public:
  LabelLog() = default;
  explicit LabelLog(std::filesystem::path path);

  void append(const LabelLogEntry& entry);
  const std::filesystem::path& path() const { return path_; }

  static std::vector<LabelLogEntry> read(const std::filesystem::path& path);

 private:
  std::filesystem::path path_;
  std::mutex mutex_;
};

/// Preferences implied by the non-skip entries, in log order.
std::vector<PreferenceRecord> records_from_log(const std::vector<LabelLogEntry>& entries);

}  // namespace arl
