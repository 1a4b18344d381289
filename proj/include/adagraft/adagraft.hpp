// Copyright 2026 The AdaGraft Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ADAGRAFT_ADAGRAFT_HPP
#define ADAGRAFT_ADAGRAFT_HPP

#include "adagraft/core.hpp"
#include "adagraft/error.hpp"
#include "adagraft/graft.hpp"
#include "adagraft/harness.hpp"
#include "adagraft/optim.hpp"
#include "adagraft/problems.hpp"
#include "adagraft/rng.hpp"
#include "adagraft/schedules.hpp"
#include "adagraft/telemetry.hpp"
#include "adagraft/version.hpp"

#endif  // ADAGRAFT_ADAGRAFT_HPP
