#include "arl/kernels/maximal_sets.hpp"

#include <algorithm>
#include <atomic>

#include "arl/error.hpp"

namespace arl::kernels {

namespace {

ConflictGraph complement(const ConflictGraph& conflicts) {
  const std::size_t n = conflicts.size();
  ConflictGraph compat(n, Bitset(n));
  for (std::size_t v = 0; v < n; ++v) {
    Bitset all(n);
    all.set_all();
    compat[v] = all.without(conflicts[v]);
    compat[v].reset(v);
  }
  return compat;
}

class CliqueEnumerator {
 public:
  CliqueEnumerator(const ConflictGraph& compat, std::size_t cap, std::atomic<std::size_t>& found,
                   std::atomic<bool>& overflow)
      : compat_(compat), cap_(cap), found_(found), overflow_(overflow) {}

  void expand(std::vector<int>& clique, const Bitset& candidates, const Bitset& excluded) {
    if (overflow_.load(std::memory_order_relaxed)) return;
    if (!candidates.any() && !excluded.any()) {
      if (found_.fetch_add(1, std::memory_order_relaxed) + 1 > cap_) {
        overflow_.store(true, std::memory_order_relaxed);
        return;
      }
      std::vector<int> members(clique);
      std::sort(members.begin(), members.end());
      results.push_back(std::move(members));
      return;
    }
    const std::size_t pivot = choose_pivot(candidates, excluded);
    Bitset remaining = candidates;
    Bitset done = excluded;
    candidates.without(compat_[pivot]).for_each([&](std::size_t v) {
      clique.push_back(static_cast<int>(v));
      expand(clique, remaining & compat_[v], done & compat_[v]);
      clique.pop_back();
      remaining.reset(v);
      done.set(v);
    });
  }

  std::size_t choose_pivot(const Bitset& candidates, const Bitset& excluded) const {
    std::size_t best = 0;
    std::size_t best_count = 0;
    bool first = true;
    (candidates | excluded).for_each([&](std::size_t u) {
      const std::size_t c = candidates.count_and(compat_[u]);
      if (first || c > best_count) {
        best = u;
        best_count = c;
        first = false;
      }
    });
    return best;
  }

  std::vector<std::vector<int>> results;

 private:
  const ConflictGraph& compat_;
  std::size_t cap_;
  std::atomic<std::size_t>& found_;
  std::atomic<bool>& overflow_;
};

void finish(std::vector<std::vector<int>>& sets, bool overflow, std::size_t cap) {
  if (overflow || sets.size() > cap) throw ExtensionCapExceeded(cap);
  std::sort(sets.begin(), sets.end());
}

}  // namespace

namespace serial {

std::vector<std::vector<int>> maximal_independent_sets(const ConflictGraph& conflicts,
                                                       std::size_t cap) {
  const std::size_t n = conflicts.size();
  const ConflictGraph compat = complement(conflicts);
  std::atomic<std::size_t> found{0};
  std::atomic<bool> overflow{false};
  CliqueEnumerator e(compat, cap, found, overflow);
  Bitset all(n);
  all.set_all();
  std::vector<int> clique;
  e.expand(clique, all, Bitset(n));
  finish(e.results, overflow.load(), cap);
  return std::move(e.results);
}

}  // namespace serial

namespace parallel {

std::vector<std::vector<int>> maximal_independent_sets(const ConflictGraph& conflicts,
                                                       std::size_t cap) {
  const std::size_t n = conflicts.size();
  if (n == 0) return {{}};
  const ConflictGraph compat = complement(conflicts);
  std::atomic<std::size_t> found{0};
  std::atomic<bool> overflow{false};

  Bitset all(n);
  all.set_all();
  const Bitset none(n);
  const std::size_t pivot = CliqueEnumerator(compat, cap, found, overflow).choose_pivot(all, none);

  // Unroll the first level so each branch gets its own candidate/excluded sets.
  std::vector<int> branch_vertices;
  all.without(compat[pivot]).for_each([&](std::size_t v) { branch_vertices.push_back(static_cast<int>(v)); });
  const auto branches = static_cast<std::ptrdiff_t>(branch_vertices.size());
  std::vector<Bitset> branch_candidates(branch_vertices.size());
  std::vector<Bitset> branch_excluded(branch_vertices.size());
  {
    Bitset remaining = all;
    Bitset done(n);
    for (std::size_t k = 0; k < branch_vertices.size(); ++k) {
      const auto v = static_cast<std::size_t>(branch_vertices[k]);
      branch_candidates[k] = remaining & compat[v];
      branch_excluded[k] = done & compat[v];
      remaining.reset(v);
      done.set(v);
    }
  }

  std::vector<std::vector<std::vector<int>>> per_branch(branch_vertices.size());
#pragma omp parallel for schedule(dynamic, 1)
  for (std::ptrdiff_t k = 0; k < branches; ++k) {
    CliqueEnumerator e(compat, cap, found, overflow);
    std::vector<int> clique{branch_vertices[k]};
    e.expand(clique, branch_candidates[k], branch_excluded[k]);
    per_branch[k] = std::move(e.results);
  }

  std::vector<std::vector<int>> sets;
  for (auto& b : per_branch)
    for (auto& s : b) sets.push_back(std::move(s));
  finish(sets, overflow.load(), cap);
  return sets;
}

}  // namespace parallel

}  // namespace arl::kernels
