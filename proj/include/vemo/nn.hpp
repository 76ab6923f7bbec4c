// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "vemo/nn/activations.hpp"
#include "vemo/nn/checkpoint.hpp"
#include "vemo/nn/gru.hpp"
#include "vemo/nn/vemo.hpp"
