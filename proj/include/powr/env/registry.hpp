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

#include <memory>
#include <optional>
#include <string>

#include "powr/env/frozen_lake.hpp"
#include "powr/env/mountain_car.hpp"
#include "powr/env/taxi.hpp"
#include "powr/env/types.hpp"

namespace powr {

struct EnvOptions {
  std::optional<int> max_episode_steps;
  std::optional<double> gamma;
};

/// Known ids: gridworld4, taxi, mountaincar.
inline std::unique_ptr<Environment> make_env(const std::string& id,
                                             const EnvOptions& opts = {}) {
  if (id == "gridworld4") {
    return std::make_unique<FrozenLake>(FrozenLake::default_map(), true,
                                        opts.max_episode_steps.value_or(100),
                                        opts.gamma.value_or(0.99));
  }
  if (id == "taxi") {
    return std::make_unique<Taxi>(opts.max_episode_steps.value_or(200),
                                  opts.gamma.value_or(0.99));
  }
  if (id == "mountaincar") {
    return std::make_unique<MountainCar>(opts.max_episode_steps.value_or(200),
                                         opts.gamma.value_or(0.99));
  }
  throw ArgumentError("unknown environment '" + id +
                      "' (expected gridworld4, taxi or mountaincar)");
}

}  // namespace powr
