#pragma once

#include <cstddef>
#include <cstdint>
#include <deque>
#include <map>
#include <optional>

#include "stoneage/types.hpp"

namespace stoneage {

namespace detail {

inline constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Counter-based coin source. The outcome drawn by node `id` in round `r` is a pure function of
/// (seed, id, r), so no node's draws depend on how many draws other nodes have made.
class SeededCoins {
 public:
  explicit SeededCoins(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  std::size_t draw(NodeId id, Round round, std::size_t faces) const {
    std::uint64_t key = detail::splitmix64(seed_ ^ detail::splitmix64((std::uint64_t{id} << 32) | round));
    // Rejection keeps the draw unbiased for faces that are not powers of two.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % faces;
    while (key >= limit) key = detail::splitmix64(key);
    return static_cast<std::size_t>(key % faces);
  }

 private:
  std::uint64_t seed_;
};

/// Per-node scripted outcomes, consumed in order. Nodes without a script (or with an exhausted
/// one) fall back to a seeded source when given, otherwise drawing is an error.
class ScriptedCoins {
 public:
  ScriptedCoins() = default;
  ScriptedCoins(std::map<NodeId, std::deque<std::size_t>> script, std::optional<std::uint64_t> fallback_seed = {})
      : script_(std::move(script)) {
    if (fallback_seed) fallback_.emplace(*fallback_seed);
  }

  void push(NodeId id, std::size_t outcome) { script_[id].push_back(outcome); }

  std::size_t draw(NodeId id, Round round, std::size_t faces) {
    auto it = script_.find(id);
    if (it != script_.end() && !it->second.empty()) {
      const std::size_t v = it->second.front();
      it->second.pop_front();
      if (v >= faces) throw Error("scripted outcome out of range");
      return v;
    }
    if (fallback_) return fallback_->draw(id, round, faces);
    throw Error("coin script exhausted for node " + std::to_string(id));
  }

 private:
  std::map<NodeId, std::deque<std::size_t>> script_;
  std::optional<SeededCoins> fallback_;
};

/// Replays outcomes keyed by (node, round), e.g. recovered from a recorded trace.
class FixedCoins {
 public:
  void set(NodeId id, Round round, std::size_t outcome) { table_[{id, round}] = outcome; }

  std::size_t draw(NodeId id, Round round, std::size_t faces) const {
    auto it = table_.find({id, round});
    if (it == table_.end()) throw Error("no recorded outcome for node " + std::to_string(id) +
                                        " in round " + std::to_string(round));
    if (it->second >= faces) throw Error("recorded outcome out of range");
    return it->second;
  }

 private:
  std::map<std::pair<NodeId, Round>, std::size_t> table_;
};

}  // namespace stoneage
