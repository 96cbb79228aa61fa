#pragma once

#include <algorithm>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "steadytrunc/model.hpp"

namespace steadytrunc {

struct StateVecHash {
  std::size_t operator()(const StateVec& v) const {
    std::uint64_t h = 0x9e3779b97f4a7c15ull;
    for (long long x : v) {
      std::uint64_t z = static_cast<std::uint64_t>(x) + h;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      h = z ^ (z >> 31);
    }
    return static_cast<std::size_t>(h);
  }
};

// Bijective map between micro-states and dense indices for a fixed
// truncation set. Iteration order is lexicographic and deterministic.
class StateIndex {
 public:
  StateIndex() = default;
  explicit StateIndex(std::vector<StateVec> states) : states_(std::move(states)) {
    std::sort(states_.begin(), states_.end());
    states_.erase(std::unique(states_.begin(), states_.end()), states_.end());
    index_.reserve(states_.size());
    for (std::size_t i = 0; i < states_.size(); ++i)
      index_.emplace(states_[i], static_cast<int>(i));
  }

  int size() const { return static_cast<int>(states_.size()); }
  const StateVec& state(int i) const { return states_[i]; }
  const std::vector<StateVec>& states() const { return states_; }

  int find(const StateVec& s) const {
    auto it = index_.find(s);
    return it == index_.end() ? -1 : it->second;
  }
  bool contains(const StateVec& s) const { return index_.count(s) > 0; }

  // Axis-aligned box [lo, hi] inclusive, all species.
  static StateIndex box(const StateVec& lo, const StateVec& hi) {
    std::vector<StateVec> states;
    StateVec cur = lo;
    const int n = static_cast<int>(lo.size());
    while (true) {
      states.push_back(cur);
      int a = n - 1;
      while (a >= 0 && ++cur[a] > hi[a]) {
        cur[a] = lo[a];
        --a;
      }
      if (a < 0) break;
    }
    return StateIndex(std::move(states));
  }

 private:
  std::vector<StateVec> states_;
  std::unordered_map<StateVec, int, StateVecHash> index_;
};

}  // namespace steadytrunc
