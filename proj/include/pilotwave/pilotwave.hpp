// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

/// @file pilotwave.hpp
/// @brief Umbrella header for the simulator library.

#pragma once

#include <pilotwave/core.hpp>
#include <pilotwave/permutation.hpp>
#include <pilotwave/wavefunctions.hpp>
#include <pilotwave/guidance.hpp>
#include <pilotwave/exchange.hpp>
#include <pilotwave/integrator.hpp>
#include <pilotwave/configspace.hpp>
#include <pilotwave/ensemble.hpp>
