// Copyright 2026 The POWR Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <vector>

#include "powr/env/types.hpp"

namespace powr {

/// Slippery frozen-lake grid. Actions: 0 left, 1 down, 2 right, 3 up.
/// On a slippery lake the intended move and the two perpendicular moves
/// each happen with probability 1/3; moves into the border leave the agent
/// in place. Reaching G pays 1 and ends the episode, falling into H ends it
/// with 0.
class FrozenLake final : public Environment {
 public:
  static std::vector<std::string> default_map() {
    return {"SFFF", "FHFH", "FFFH", "HFFG"};
  }

  explicit FrozenLake(std::vector<std::string> map = default_map(),
                      bool slippery = true, int max_episode_steps = 100,
                      double gamma = 0.99)
      : map_(std::move(map)), slippery_(slippery) {
    rows_ = static_cast<int>(map_.size());
    cols_ = rows_ > 0 ? static_cast<int>(map_[0].size()) : 0;
    for (const auto& row : map_) {
      if (static_cast<int>(row.size()) != cols_) {
        throw ArgumentError("FrozenLake: ragged map");
      }
    }
    start_ = -1;
    for (int s = 0; s < rows_ * cols_; ++s) {
      if (tile(s) == 'S') start_ = s;
    }
    if (start_ < 0) throw ArgumentError("FrozenLake: map has no start tile");
    spec_.id = rows_ == 4 && cols_ == 4 ? "gridworld4" : "gridworld";
    spec_.state = StateDescriptor::finite(rows_ * cols_);
    spec_.action_count = 4;
    spec_.max_episode_steps = max_episode_steps;
    spec_.gamma = gamma;
    spec_.reward_threshold = 0.8;
    spec_.reward_shift = 0.0;
    spec_.validate();
  }

  const EnvSpec& spec() const override { return spec_; }

  State reset(std::uint64_t /*seed*/) const override {
    return discrete_state(start_);
  }

  StepResult step(const State& x, int action, CounterRng& rng) const override {
    check_action(action);
    const int s = check_discrete_state(x);
    if (is_terminal(s)) return {discrete_state(s), 0.0, true};
    int direction = action;
    if (slippery_) direction = (action + 3 + static_cast<int>(rng.below(3))) % 4;
    return landing(s, direction);
  }

  std::vector<Outcome> outcomes(int s, int action) const override {
    check_action(action);
    if (is_terminal(s)) return {{s, 1.0, 0.0, true}};
    std::vector<Outcome> out;
    auto add = [&](int direction, double p) {
      const auto r = landing(s, direction);
      const int next = static_cast<int>(r.next(0));
      for (auto& o : out) {
        if (o.next_state == next) {
          o.probability += p;
          return;
        }
      }
      out.push_back({next, p, r.reward, r.done});
    };
    if (slippery_) {
      for (int k = 0; k < 3; ++k) add((action + 3 + k) % 4, 1.0 / 3.0);
    } else {
      add(action, 1.0);
    }
    return out;
  }

  Eigen::VectorXd start_distribution() const override {
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(rows_ * cols_);
    nu(start_) = 1.0;
    return nu;
  }

  bool is_terminal(int s) const override {
    const char c = tile(s);
    return c == 'H' || c == 'G';
  }

  char tile(int s) const {
    return map_[static_cast<std::size_t>(s / cols_)][static_cast<std::size_t>(s % cols_)];
  }

 private:
  StepResult landing(int s, int direction) const {
    int r = s / cols_;
    int c = s % cols_;
    switch (direction) {
      case 0: c = std::max(c - 1, 0); break;
      case 1: r = std::min(r + 1, rows_ - 1); break;
      case 2: c = std::min(c + 1, cols_ - 1); break;
      default: r = std::max(r - 1, 0); break;
    }
    const int next = r * cols_ + c;
    const char t = tile(next);
    return {discrete_state(next), t == 'G' ? 1.0 : 0.0, t == 'G' || t == 'H'};
  }

  std::vector<std::string> map_;
  bool slippery_;
  int rows_ = 0;
  int cols_ = 0;
  int start_ = 0;
  EnvSpec spec_;
};

}  // namespace powr
