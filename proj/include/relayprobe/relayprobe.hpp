/*
   Copyright 2026 The relayprobe Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#pragma once

#include "relayprobe/channel.hpp"
#include "relayprobe/errors.hpp"
#include "relayprobe/experiments.hpp"
#include "relayprobe/random.hpp"
#include "relayprobe/scenario.hpp"
#include "relayprobe/sedist.hpp"
#include "relayprobe/simulator.hpp"
#include "relayprobe/solver.hpp"
#include "relayprobe/stats.hpp"
