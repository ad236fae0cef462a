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

#include <algorithm>
#include <cmath>

#include "powr/env/types.hpp"

namespace powr {

/// Under-powered car in a valley. State (position, velocity); actions
/// 0 push left, 1 no push, 2 push right; reward -1 per step until the
/// position reaches 0.5.
class MountainCar final : public Environment {
 public:
  static constexpr double kMinPosition = -1.2;
  static constexpr double kMaxPosition = 0.6;
  static constexpr double kMaxSpeed = 0.07;
  static constexpr double kGoalPosition = 0.5;
  static constexpr double kForce = 0.001;
  static constexpr double kGravity = 0.0025;

  explicit MountainCar(int max_episode_steps = 200, double gamma = 0.99) {
    Eigen::VectorXd lo(2), hi(2);
    lo << kMinPosition, -kMaxSpeed;
    hi << kMaxPosition, kMaxSpeed;
    spec_.id = "mountaincar";
    spec_.state = StateDescriptor::box(lo, hi);
    spec_.action_count = 3;
    spec_.max_episode_steps = max_episode_steps;
    spec_.gamma = gamma;
    spec_.reward_threshold = -110.0;
    spec_.reward_shift = 1.0;
    spec_.validate();
  }

  const EnvSpec& spec() const override { return spec_; }

  State reset(std::uint64_t seed) const override {
    CounterRng rng(seed, 0x6d636172ULL);
    State s(2);
    s << rng.uniform(-0.6, -0.4), 0.0;
    return s;
  }

  StepResult step(const State& x, int action, CounterRng& /*rng*/) const override {
    check_action(action);
    if (!spec_.state.contains(x)) throw ArgumentError("mountaincar: invalid state");
    double position = x(0);
    double velocity = x(1);
    velocity += (action - 1) * kForce + std::cos(3.0 * position) * (-kGravity);
    velocity = std::clamp(velocity, -kMaxSpeed, kMaxSpeed);
    position += velocity;
    position = std::clamp(position, kMinPosition, kMaxPosition);
    if (position == kMinPosition && velocity < 0.0) velocity = 0.0;
    State next(2);
    next << position, velocity;
    return {next, -1.0, position >= kGoalPosition && velocity >= 0.0};
  }

 private:
  EnvSpec spec_;
};

}  // namespace powr
