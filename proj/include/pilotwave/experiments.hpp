// Copyright 2026 The pilotwave Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <pilotwave/experiments/catalogue.hpp>
#include <pilotwave/experiments/checks.hpp>
#include <pilotwave/experiments/runner.hpp>
#include <pilotwave/experiments/scenario.hpp>
#include <pilotwave/experiments/svg.hpp>
