// Copyright 2026 The pmcal Authors
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

// Umbrella header.

#ifndef PMCAL_PMCAL_HPP_
#define PMCAL_PMCAL_HPP_

#include "pmcal/boost.hpp"
#include "pmcal/core.hpp"
#include "pmcal/csv.hpp"
#include "pmcal/error.hpp"
#include "pmcal/metrics.hpp"
#include "pmcal/pipeline.hpp"
#include "pmcal/plots.hpp"
#include "pmcal/random.hpp"
#include "pmcal/sim.hpp"
#include "pmcal/theory.hpp"
#include "pmcal/version.hpp"

#endif  // PMCAL_PMCAL_HPP_
