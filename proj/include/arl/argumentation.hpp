#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "arl/trajectory.hpp"

namespace arl {

using IdPair = std::pair<int, int>;

/// Symmetric, irreflexive abstract argumentation framework over integer argument ids.
/// Attacks are stored once per unordered pair as (i, j) with i < j.
class Aaf {
 public:
  Aaf() = default;
  /// Throws on self-attacks or attacks that mention unknown arguments.
  Aaf(std::vector<int> arguments, std::vector<IdPair> attacks);

  const std::vector<int>& arguments() const { return arguments_; }
  const std::vector<IdPair>& attacks() const { return attacks_; }
  std::size_t undirected_attack_count() const { return attacks_.size(); }
  std::size_t directed_attack_count() const { return 2 * attacks_.size(); }

  bool has_argument(int id) const;
  bool attacks(int a, int b) const;
  /// Both orientations of every attack, sorted.
  std::vector<IdPair> directed_attacks() const;

  std::size_t index_of(int id) const;

  nlohmann::json to_json() const;
  static Aaf from_json(const nlohmann::json& j);

 private:
  std::vector<int> arguments_;
  std::vector<IdPair> attacks_;
  std::vector<std::uint8_t> matrix_;  // row-major over argument indices
};

/// True iff some step index has the two states more than `delta` apart.
/// Throws if the trajectories differ in length.
bool trajectories_attack(const Trajectory& t1, const Trajectory& t2, double delta);

/// Uses the parallel attack-matrix kernel.
Aaf build_aaf(const TrajectoryStore& store, double delta);

struct PreferredExtension {
  std::vector<int> members;  // sorted ids
  int index = 0;

  bool contains(int id) const;
};

inline constexpr std::size_t kDefaultExtensionCap = 10'000;

/// Maximal conflict-free sets, ordered lexicographically by member list.
/// Throws ExtensionCapExceeded when more than `cap` exist.
std::vector<PreferredExtension> preferred_extensions(const Aaf& aaf,
                                                     std::size_t cap = kDefaultExtensionCap);

nlohmann::json extensions_to_json(const std::vector<PreferredExtension>& extensions);
std::vector<PreferredExtension> extensions_from_json(const nlohmann::json& j);

/// Extension indices, best first.
using ExtensionOrder = std::vector<int>;

/// (t1, t2) is included iff some extension holding t1 ranks above every extension
/// holding t2. Returns sorted ordered pairs, never (t, t).
std::vector<IdPair> lift_preferences(const std::vector<PreferredExtension>& extensions,
                                     const ExtensionOrder& order);

struct Paf {
  Aaf base;
  std::vector<IdPair> prefers;  // (a, b) means a is preferred to b
};

/// Directed attacks (b, a) of the base framework minus those with a preferred to b.
/// Throws if the preference relation is reflexive or not asymmetric.
std::vector<IdPair> reduce_paf(const Paf& paf);

}  // namespace arl
