// Copyright 2026 The PIGen-SQD Authors
// SPDX-License-Identifier: Apache-2.0

/**
 * @file pigen.hpp
 * @brief Umbrella header for the PIGen-SQD engine.
 */

#pragma once

#include "pigen/config.hpp"
#include "pigen/error.hpp"
#include "pigen/fermion.hpp"
#include "pigen/hamiltonian.hpp"
#include "pigen/integrals.hpp"
#include "pigen/pipeline.hpp"
#include "pigen/random.hpp"
#include "pigen/rbm.hpp"
#include "pigen/recovery.hpp"
#include "pigen/report.hpp"
#include "pigen/sampler.hpp"
#include "pigen/selector.hpp"
