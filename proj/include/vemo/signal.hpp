// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vemo/signal/butterworth.hpp"
#include "vemo/signal/scaling.hpp"
#include "vemo/signal/welch.hpp"
#include "vemo/signal/zero_phase.hpp"
