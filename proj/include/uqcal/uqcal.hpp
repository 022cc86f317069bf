#pragma once

// Umbrella header: eligibility-set calibration from output-only data via
// KS-ball sampled linear programs, with failure-probability bounds and
// Kiefer-Wolfowitz design descent on top of the resulting weight polytopes.

#include "uqcal/cli.hpp"
#include "uqcal/config.hpp"
#include "uqcal/csv.hpp"
#include "uqcal/design.hpp"
#include "uqcal/eligibility.hpp"
#include "uqcal/empirical.hpp"
#include "uqcal/errors.hpp"
#include "uqcal/external_model.hpp"
#include "uqcal/linprog.hpp"
#include "uqcal/matrix.hpp"
#include "uqcal/model.hpp"
#include "uqcal/parallel.hpp"
#include "uqcal/reliability.hpp"
#include "uqcal/rng.hpp"
#include "uqcal/summary.hpp"
#include "uqcal/version.hpp"
