#include "arl/argumentation.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <string>

#include "arl/error.hpp"
#include "arl/kernels/attack.hpp"
#include "arl/kernels/maximal_sets.hpp"

namespace arl {

Aaf::Aaf(std::vector<int> arguments, std::vector<IdPair> attacks) : arguments_(std::move(arguments)) {
  std::sort(arguments_.begin(), arguments_.end());
  if (std::adjacent_find(arguments_.begin(), arguments_.end()) != arguments_.end())
    throw Error("duplicate argument id");
  const std::size_t n = arguments_.size();
  matrix_.assign(n * n, 0);
  for (auto [a, b] : attacks) {
    if (a == b) throw Error("self-attack on argument " + std::to_string(a));
    if (!has_argument(a) || !has_argument(b))
      throw Error("attack (" + std::to_string(a) + "," + std::to_string(b) + ") names an unknown argument");
    if (a > b) std::swap(a, b);
    const std::size_t i = index_of(a);
    const std::size_t j = index_of(b);
    if (matrix_[i * n + j]) continue;
    matrix_[i * n + j] = 1;
    matrix_[j * n + i] = 1;
    attacks_.emplace_back(a, b);
  }
  std::sort(attacks_.begin(), attacks_.end());
}

bool Aaf::has_argument(int id) const {
  return std::binary_search(arguments_.begin(), arguments_.end(), id);
}

std::size_t Aaf::index_of(int id) const {
  const auto it = std::lower_bound(arguments_.begin(), arguments_.end(), id);
  if (it == arguments_.end() || *it != id) throw Error("unknown argument id " + std::to_string(id));
  return static_cast<std::size_t>(it - arguments_.begin());
}

bool Aaf::attacks(int a, int b) const {
  if (!has_argument(a) || !has_argument(b)) return false;
  return matrix_[index_of(a) * arguments_.size() + index_of(b)] != 0;
}

std::vector<IdPair> Aaf::directed_attacks() const {
  std::vector<IdPair> out;
  out.reserve(2 * attacks_.size());
  for (auto [a, b] : attacks_) {
    out.emplace_back(a, b);
    out.emplace_back(b, a);
  }
  std::sort(out.begin(), out.end());
  return out;
}

nlohmann::json Aaf::to_json() const {
  nlohmann::json attacks = nlohmann::json::array();
  for (auto [a, b] : attacks_) attacks.push_back({a, b});
  return {{"arguments", arguments_}, {"attacks", attacks}};
}

Aaf Aaf::from_json(const nlohmann::json& j) {
  std::vector<IdPair> attacks;
  for (const auto& p : j.at("attacks")) attacks.emplace_back(p.at(0).get<int>(), p.at(1).get<int>());
  return Aaf(j.at("arguments").get<std::vector<int>>(), std::move(attacks));
}

bool trajectories_attack(const Trajectory& t1, const Trajectory& t2, double delta) {
  if (t1.length() != t2.length())
    throw Error("attacks are only defined between trajectories of equal length");
  if (!(delta > 0.0)) throw Error("delta must be positive");
  return kernels::stepwise_exceeds(t1, t2, delta);
}

Aaf build_aaf(const TrajectoryStore& store, double delta) {
  if (store.size() < 2) throw Error("an AAF needs at least two trajectories");
  if (!(delta > 0.0)) throw Error("delta must be positive");
  const auto matrix = kernels::parallel::attack_matrix(store.all(), delta);
  const std::size_t n = store.size();
  std::vector<int> ids(n);
  std::vector<IdPair> attacks;
  for (std::size_t i = 0; i < n; ++i) {
    ids[i] = store.all()[i].id;
    for (std::size_t j = i + 1; j < n; ++j)
      if (matrix[i * n + j]) attacks.emplace_back(store.all()[i].id, store.all()[j].id);
  }
  return Aaf(std::move(ids), std::move(attacks));
}

bool PreferredExtension::contains(int id) const {
  return std::binary_search(members.begin(), members.end(), id);
}

std::vector<PreferredExtension> preferred_extensions(const Aaf& aaf, std::size_t cap) {
  const auto& args = aaf.arguments();
  const std::size_t n = args.size();
  kernels::ConflictGraph conflicts(n, Bitset(n));
  for (auto [a, b] : aaf.attacks()) {
    const std::size_t i = aaf.index_of(a);
    const std::size_t j = aaf.index_of(b);
    conflicts[i].set(j);
    conflicts[j].set(i);
  }
  // Argument ids are sorted, so index order is id order and the kernel's
  // lexicographic output is already lexicographic by id.
  const auto sets = kernels::parallel::maximal_independent_sets(conflicts, cap);
  std::vector<PreferredExtension> out;
  out.reserve(sets.size());
  for (const auto& s : sets) {
    PreferredExtension e;
    e.index = static_cast<int>(out.size());
    for (int idx : s) e.members.push_back(args[static_cast<std::size_t>(idx)]);
    out.push_back(std::move(e));
  }
  return out;
}

nlohmann::json extensions_to_json(const std::vector<PreferredExtension>& extensions) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& e : extensions) out.push_back(e.members);
  return out;
}

std::vector<PreferredExtension> extensions_from_json(const nlohmann::json& j) {
  std::vector<PreferredExtension> out;
  for (const auto& m : j) {
    PreferredExtension e;
    e.members = m.get<std::vector<int>>();
    std::sort(e.members.begin(), e.members.end());
    e.index = static_cast<int>(out.size());
    out.push_back(std::move(e));
  }
  return out;
}

std::vector<IdPair> lift_preferences(const std::vector<PreferredExtension>& extensions,
                                     const ExtensionOrder& order) {
  const std::size_t m = extensions.size();
  if (order.size() != m) throw Error("extension order must rank every extension exactly once");
  std::vector<std::size_t> rank(m, m);
  for (std::size_t pos = 0; pos < m; ++pos) {
    const int e = order[pos];
    if (e < 0 || static_cast<std::size_t>(e) >= m || rank[e] != m)
      throw Error("extension order is not a permutation of the extensions");
    rank[e] = pos;
  }

  // Since the order is total, some extension of t1 beats every extension of t2
  // exactly when t1's best-ranked extension beats t2's best-ranked extension.
  std::vector<std::pair<int, std::size_t>> best;  // (id, best rank)
  {
    std::vector<int> ids;
    for (const auto& e : extensions) ids.insert(ids.end(), e.members.begin(), e.members.end());
    std::sort(ids.begin(), ids.end());
    ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
    best.reserve(ids.size());
    for (int id : ids) best.emplace_back(id, m);
    for (std::size_t k = 0; k < m; ++k) {
      for (int id : extensions[k].members) {
        auto it = std::lower_bound(best.begin(), best.end(), std::make_pair(id, std::size_t{0}),
                                   [](const auto& l, const auto& r) { return l.first < r.first; });
        it->second = std::min(it->second, rank[k]);
      }
    }
  }

  std::vector<IdPair> pairs;
  for (const auto& [a, ra] : best)
    for (const auto& [b, rb] : best)
      if (ra < rb) pairs.emplace_back(a, b);
  std::sort(pairs.begin(), pairs.end());
  return pairs;
}

std::vector<IdPair> reduce_paf(const Paf& paf) {
  std::set<IdPair> prefers(paf.prefers.begin(), paf.prefers.end());
  for (const auto& [a, b] : prefers) {
    if (a == b) throw Error("preference relation must be irreflexive (" + std::to_string(a) + ")");
    if (prefers.count({b, a}))
      throw Error("preference relation must be asymmetric (" + std::to_string(a) + "," +
                  std::to_string(b) + ")");
  }
  std::vector<IdPair> reduced;
  for (const auto& [attacker, target] : paf.base.directed_attacks())
    if (!prefers.count({target, attacker})) reduced.emplace_back(attacker, target);
  return reduced;
}

}  // namespace arl
