// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vemo/synth/maneuver.hpp"
#include "vemo/synth/single_track.hpp"
