/*
 * Copyright (c) 2026
 *
 * SPDX-License-Identifier: GPL-2.0-only
 */

#pragma once

#include <string_view>

#include "mmtc/aggregation.hpp"
#include "mmtc/config.hpp"
#include "mmtc/csv.hpp"
#include "mmtc/domain.hpp"
#include "mmtc/geometry.hpp"
#include "mmtc/metrics.hpp"
#include "mmtc/parallel.hpp"
#include "mmtc/quadrature.hpp"
#include "mmtc/relaying.hpp"
#include "mmtc/rng.hpp"
#include "mmtc/simulator.hpp"
#include "mmtc/specfun.hpp"

namespace mmtc {

inline constexpr std::string_view kVersion = "1.0.0";

}  // namespace mmtc
