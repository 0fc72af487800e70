#include "arl/preference.hpp"

#include <algorithm>
#include <bit>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "arl/error.hpp"

namespace arl {

std::string_view source_name(LabelSource s) {
  switch (s) {
    case LabelSource::Human:
      return "human";
    case LabelSource::Synthetic:
      return "synthetic";
    case LabelSource::Generalised:
      return "generalised";
  }
  return "?";
}

LabelSource source_from_name(std::string_view name) {
  if (name == "human") return LabelSource::Human;
  if (name == "synthetic") return LabelSource::Synthetic;
  if (name == "generalised") return LabelSource::Generalised;
  throw Error("unknown label source '" + std::string(name) + "'");
}

std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t secs = std::chrono::system_clock::to_time_t(now);
  const auto millis =
      std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&secs, &tm);
  std::ostringstream out;
  out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%S") << '.' << std::setw(3) << std::setfill('0') << millis
      << 'Z';
  return out.str();
}

nlohmann::json record_to_json(const PreferenceRecord& r) {
  nlohmann::json j{{"winner", r.winner}, {"loser", r.loser}, {"source", std::string(source_name(r.source))},
                   {"tied", r.tied}};
  if (r.query_id) j["query_id"] = *r.query_id;
  if (!r.timestamp.empty()) j["ts"] = r.timestamp;
  return j;
}

PreferenceRecord record_from_json(const nlohmann::json& j) {
  PreferenceRecord r;
  r.winner = j.at("winner").get<int>();
  r.loser = j.at("loser").get<int>();
  r.source = source_from_name(j.at("source").get<std::string>());
  r.tied = j.value("tied", false);
  if (j.contains("query_id")) r.query_id = j.at("query_id").get<int>();
  r.timestamp = j.value("ts", std::string{});
  return r;
}

PreferenceRecord synthetic_pair_label(const MazeEnv& env, const Trajectory& t1, const Trajectory& t2) {
  if (t1.id == t2.id) throw Error("cannot label a trajectory against itself");
  const double r1 = true_return(env, t1);
  const double r2 = true_return(env, t2);
  PreferenceRecord rec;
  rec.source = LabelSource::Synthetic;
  if (r1 == r2) {
    rec.tied = true;
    rec.winner = std::min(t1.id, t2.id);
    rec.loser = std::max(t1.id, t2.id);
  } else if (r1 > r2) {
    rec.winner = t1.id;
    rec.loser = t2.id;
  } else {
    rec.winner = t2.id;
    rec.loser = t1.id;
  }
  return rec;
}

std::vector<IdPair> sample_queries(const Aaf& aaf, int n, Rng& rng) {
  if (n < 0) throw Error("query count must be non-negative");
  const auto& attacks = aaf.attacks();
  if (static_cast<std::size_t>(n) >= attacks.size()) return attacks;
  std::vector<IdPair> out;
  out.reserve(static_cast<std::size_t>(n));
  std::sample(attacks.begin(), attacks.end(), std::back_inserter(out), n, rng);
  // std::sample keeps source order; shuffle so the query sequence is random too.
  std::shuffle(out.begin(), out.end(), rng);
  return out;
}

void QueryBudget::consume() {
  if (used_ >= max_) throw BudgetExhausted("query budget of " + std::to_string(max_) + " exhausted");
  ++used_;
}

Comparison Comparator::operator()(int i, int j) {
  if (budget_) budget_->consume();
  ++count_;
  const Comparison c = fn_(i, j);
  if (c.tied) ++ties_;
  return c;
}

namespace {

Comparison by_index(int i, int j) { return {i < j ? Ordering::First : Ordering::Second, true}; }

double member_sum(const std::vector<double>& returns, const PreferredExtension& p) {
  double s = 0.0;
  for (int id : p.members) s += returns.at(static_cast<std::size_t>(id));
  return s;
}

}  // namespace

Comparison return_sum_compare(const std::vector<double>& returns, const PreferredExtension& p_i,
                              const PreferredExtension& p_j) {
  if (p_i.index == p_j.index) throw Error("cannot compare an extension with itself");
  const double si = member_sum(returns, p_i);
  const double sj = member_sum(returns, p_j);
  if (si > sj) return {Ordering::First, false};
  if (sj > si) return {Ordering::Second, false};
  return by_index(p_i.index, p_j.index);
}

Comparison synthetic_extension_compare(const MazeEnv& env, const TrajectoryStore& store,
                                       const PreferredExtension& p_i, const PreferredExtension& p_j) {
  std::vector<double> returns(store.size(), 0.0);
  for (const auto* p : {&p_i, &p_j})
    for (int id : p->members) returns[static_cast<std::size_t>(id)] = true_return(env, store.at(id));
  return return_sum_compare(returns, p_i, p_j);
}

Comparison count_extension_compare(const std::vector<PreferenceRecord>& labels,
                                   const PreferredExtension& p_i, const PreferredExtension& p_j) {
  if (p_i.index == p_j.index) throw Error("cannot compare an extension with itself");
  long ij = 0;
  long ji = 0;
  for (const auto& r : labels) {
    if (p_i.contains(r.winner) && p_j.contains(r.loser)) ++ij;
    if (p_j.contains(r.winner) && p_i.contains(r.loser)) ++ji;
  }
  if (ij > ji) return {Ordering::First, false};
  if (ji > ij) return {Ordering::Second, false};
  return by_index(p_i.index, p_j.index);
}

long insertion_comparison_bound(long n) {
  long total = 0;
  for (long i = 2; i <= n; ++i) total += std::bit_width(static_cast<unsigned long>(i - 1));
  return total;
}

SortResult binary_insertion_sort(const std::vector<int>& items, Comparator& cmp) {
  SortResult result;
  const long before = cmp.comparison_count();
  std::size_t inserted = 0;
  try {
    for (; inserted < items.size(); ++inserted) {
      const int x = items[inserted];
      std::size_t lo = 0;
      std::size_t hi = result.order.size();
      while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (cmp(x, result.order[mid]).order == Ordering::First)
          hi = mid;
        else
          lo = mid + 1;
      }
      result.order.insert(result.order.begin() + static_cast<std::ptrdiff_t>(lo), x);
    }
  } catch (const BudgetExhausted&) {
    result.valid = false;
    result.order.insert(result.order.end(), items.begin() + static_cast<std::ptrdiff_t>(inserted), items.end());
  }
  result.comparisons = cmp.comparison_count() - before;
  return result;
}

std::vector<PreferenceRecord> build_generalised_dataset(const Aaf& aaf, const std::vector<IdPair>& lifted) {
  const std::set<IdPair> lifted_set(lifted.begin(), lifted.end());
  std::vector<PreferenceRecord> out;
  for (const auto& [a, b] : lifted_set) {
    if (a == b || lifted_set.count({b, a})) continue;
    if (!aaf.attacks(a, b)) continue;
    PreferenceRecord r;
    r.winner = a;
    r.loser = b;
    r.source = LabelSource::Generalised;
    out.push_back(r);
  }
  return out;
}

std::string_view choice_name(Choice c) {
  switch (c) {
    case Choice::Left:
      return "left";
    case Choice::Right:
      return "right";
    case Choice::Skip:
      return "skip";
  }
  return "?";
}

Choice choice_from_name(std::string_view name) {
  if (name == "left") return Choice::Left;
  if (name == "right") return Choice::Right;
  if (name == "skip") return Choice::Skip;
  throw Error("unknown choice '" + std::string(name) + "'");
}

PairLabeler synthetic_labeler(const MazeEnv& env, const TrajectoryStore& store) {
  return [&env, &store](int left, int right) {
    const auto rec = synthetic_pair_label(env, store.at(left), store.at(right));
    return rec.winner == left ? Choice::Left : Choice::Right;
  };
}

Comparator::Fn live_extension_compare(const Aaf& aaf, const std::vector<PreferredExtension>& extensions,
                                      PairLabeler labeler, Rng& rng,
                                      std::vector<PreferenceRecord>& answers) {
  return [&aaf, &extensions, labeler = std::move(labeler), &rng, &answers](int i, int j) -> Comparison {
    const auto& p_i = extensions.at(static_cast<std::size_t>(i));
    const auto& p_j = extensions.at(static_cast<std::size_t>(j));
    std::vector<IdPair> candidates;
    for (int a : p_i.members) {
      if (p_j.contains(a)) continue;
      for (int b : p_j.members)
        if (!p_i.contains(b) && aaf.attacks(a, b)) candidates.emplace_back(a, b);
    }
    if (candidates.empty()) return by_index(i, j);
    std::uniform_int_distribution<std::size_t> pick(0, candidates.size() - 1);
    const auto [a, b] = candidates[pick(rng)];
    const Choice c = labeler(a, b);
    if (c == Choice::Skip) return by_index(i, j);
    PreferenceRecord r;
    r.winner = c == Choice::Left ? a : b;
    r.loser = c == Choice::Left ? b : a;
    r.source = LabelSource::Human;
    r.timestamp = utc_timestamp();
    answers.push_back(r);
    return {c == Choice::Left ? Ordering::First : Ordering::Second, false};
  };
}

nlohmann::json LabelLogEntry::to_json() const {
  return {{"query_id", query_id}, {"left", left},  {"right", right}, {"choice", std::string(choice_name(choice))},
          {"source", std::string(source_name(source))}, {"ts", ts}};
}

LabelLogEntry LabelLogEntry::from_json(const nlohmann::json& j) {
  LabelLogEntry e;
  e.query_id = j.at("query_id").get<int>();
  e.left = j.at("left").get<int>();
  e.right = j.at("right").get<int>();
  e.choice = choice_from_name(j.at("choice").get<std::string>());
  e.source = source_from_name(j.at("source").get<std::string>());
  e.ts = j.value("ts", std::string{});
  return e;
}

std::optional<PreferenceRecord> LabelLogEntry::record() const {
  if (choice == Choice::Skip) return std::nullopt;
  PreferenceRecord r;
  r.winner = choice == Choice::Left ? left : right;
  r.loser = choice == Choice::Left ? right : left;
  r.source = source;
  r.query_id = query_id;
  r.timestamp = ts;
  return r;
}

LabelLog::LabelLog(std::filesystem::path path) : path_(std::move(path)) {}

void LabelLog::append(const LabelLogEntry& entry) {
  if (path_.empty()) return;
  std::lock_guard lock(mutex_);
  std::ofstream out(path_, std::ios::app);
  if (!out) throw Error("cannot append to " + path_.string());
  out << entry.to_json().dump() << '\n';
  out.flush();
}

std::vector<LabelLogEntry> LabelLog::read(const std::filesystem::path& path) {
  std::vector<LabelLogEntry> out;
  std::ifstream in(path);
  if (!in) return out;
  std::string line;
  while (std::getline(in, line))
    if (!line.empty()) out.push_back(LabelLogEntry::from_json(nlohmann::json::parse(line)));
  return out;
}

std::vector<PreferenceRecord> records_from_log(const std::vector<LabelLogEntry>& entries) {
  std::vector<PreferenceRecord> out;
  for (const auto& e : entries)
    if (auto r = e.record()) out.push_back(*r);
  return out;
}

}  // namespace arl
