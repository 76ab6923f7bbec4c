// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vemo/eval/io.hpp"
#include "vemo/eval/metrics.hpp"
#include "vemo/eval/report.hpp"
#include "vemo/eval/sweep.hpp"
