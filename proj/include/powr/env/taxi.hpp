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

#include <array>
#include <string>
#include <vector>

#include "powr/env/types.hpp"

namespace powr {

/// 5x5 taxi domain with 500 states encoded as
///   ((row * 5 + col) * 5 + passenger) * 4 + destination,
/// passenger in {0..3} (waiting at a landmark) or 4 (in the taxi).
/// Actions: 0 south, 1 north, 2 east, 3 west, 4 pickup, 5 dropoff.
/// Rewards: -1 per step, -10 for an illegal pickup/dropoff, +20 for a
/// delivery, which ends the episode.
class Taxi final : public Environment {
 public:
  static constexpr int kStates = 500;
  static constexpr std::array<std::array<int, 2>, 4> kLandmarks{
      {{0, 0}, {0, 4}, {4, 0}, {4, 3}}};

  explicit Taxi(int max_episode_steps = 200, double gamma = 0.99) {
    spec_.id = "taxi";
    spec_.state = StateDescriptor::finite(kStates);
    spec_.action_count = 6;
    spec_.max_episode_steps = max_episode_steps;
    spec_.gamma = gamma;
    spec_.reward_threshold = 6.0;
    spec_.reward_shift = 10.0;
    spec_.validate();
  }

  static int encode(int row, int col, int passenger, int destination) {
    return ((row * 5 + col) * 5 + passenger) * 4 + destination;
  }

  struct Decoded {
    int row, col, passenger, destination;
  };

  static Decoded decode(int s) {
    Decoded d{};
    d.destination = s % 4;
    s /= 4;
    d.passenger = s % 5;
    s /= 5;
    d.col = s % 5;
    d.row = s / 5;
    return d;
  }

  const EnvSpec& spec() const override { return spec_; }

  State reset(std::uint64_t seed) const override {
    CounterRng rng(seed, 0x7461786952ULL);
    const auto starts = start_states();
    return discrete_state(starts[rng.below(starts.size())]);
  }

  StepResult step(const State& x, int action, CounterRng& /*rng*/) const override {
    check_action(action);
    const int s = check_discrete_state(x);
    const auto o = transition(s, action);
    return {discrete_state(o.next_state), o.reward, o.done};
  }

  std::vector<Outcome> outcomes(int s, int action) const override {
    check_action(action);
    return {transition(s, action)};
  }

  Eigen::VectorXd start_distribution() const override {
    Eigen::VectorXd nu = Eigen::VectorXd::Zero(kStates);
    const auto starts = start_states();
    for (int s : starts) nu(s) = 1.0 / static_cast<double>(starts.size());
    return nu;
  }

  /// Passenger already delivered: only reachable by the final dropoff.
  bool is_terminal(int s) const override {
    const auto d = decode(s);
    return d.passenger == d.destination;
  }

  static std::vector<int> start_states() {
    std::vector<int> out;
    for (int s = 0; s < kStates; ++s) {
      const auto d = decode(s);
      if (d.passenger < 4 && d.passenger != d.destination) out.push_back(s);
    }
    return out;
  }

 private:
  // Walls between columns, from the standard map:
  //   |R: | : :G|
  //   | : | : : |
  //   | : : : : |
  //   | | : | : |
  //   |Y| : |B: |
  static bool wall_east(int row, int col) {
    static const char* kMap[5] = {"|R: | : :G|", "| : | : : |", "| : : : : |",
                                  "| | : | : |", "|Y| : |B: |"};
    return kMap[row][2 * col + 2] == '|';
  }

  Outcome transition(int s, int action) const {
    if (is_terminal(s)) return {s, 1.0, 0.0, true};
    auto d = decode(s);
    double reward = -1.0;
    bool done = false;
    const int here = landmark_at(d.row, d.col);
    switch (action) {
      case 0: d.row = std::min(d.row + 1, 4); break;
      case 1: d.row = std::max(d.row - 1, 0); break;
      case 2:
        if (!wall_east(d.row, d.col)) d.col = std::min(d.col + 1, 4);
        break;
      case 3:
        if (d.col > 0 && !wall_east(d.row, d.col - 1)) d.col -= 1;
        break;
      case 4:
        if (d.passenger < 4 && here == d.passenger) {
          d.passenger = 4;
        } else {
          reward = -10.0;
        }
        break;
      default:
        if (d.passenger == 4 && here == d.destination) {
          d.passenger = d.destination;
          reward = 20.0;
          done = true;
        } else if (d.passenger == 4 && here >= 0) {
          d.passenger = here;
        } else {
          reward = -10.0;
        }
        break;
    }
    return {encode(d.row, d.col, d.passenger, d.destination), 1.0, reward, done};
  }

  static int landmark_at(int row, int col) {
    for (int i = 0; i < 4; ++i) {
      if (kLandmarks[static_cast<std::size_t>(i)][0] == row &&
          kLandmarks[static_cast<std::size_t>(i)][1] == col) {
        return i;
      }
    }
    return -1;
  }

  EnvSpec spec_;
};

}  // namespace powr
