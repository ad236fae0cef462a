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

#include "powr/env/dataset_io.hpp"
#include "powr/env/frozen_lake.hpp"
#include "powr/env/mountain_car.hpp"
#include "powr/env/registry.hpp"
#include "powr/env/rollout.hpp"
#include "powr/env/tabular_env.hpp"
#include "powr/env/taxi.hpp"
#include "powr/env/types.hpp"
