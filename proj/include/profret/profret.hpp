// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 profret Contributors

#pragma once

#include "profret/bench.hpp"
#include "profret/context.hpp"
#include "profret/corpus.hpp"
#include "profret/encoder.hpp"
#include "profret/error.hpp"
#include "profret/evaluation.hpp"
#include "profret/index.hpp"
#include "profret/training.hpp"
