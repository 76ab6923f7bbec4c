// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vemo/train/adam.hpp"
#include "vemo/train/fit.hpp"
