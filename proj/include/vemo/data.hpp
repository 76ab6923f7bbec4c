// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vemo/data/cache.hpp"
#include "vemo/data/csv.hpp"
#include "vemo/data/run.hpp"
#include "vemo/data/windows.hpp"
