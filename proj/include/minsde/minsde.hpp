#pragma once

// Monte Carlo machinery for the law of the running minimum of a drifted
// Brownian path on [0,1]: seeded path generation with exact bridge-minimum
// refinement, Girsanov reweighting of Brownian paths, three independent
// estimators of the minimum's density, and desk-scale Cameron-Martin
// calculus (directional derivatives, divergences, integration by parts,
// perimeter bounds).

#include "minsde/version.hpp"
#include "minsde/rng.hpp"
#include "minsde/grid.hpp"
#include "minsde/quadrature.hpp"
#include "minsde/drift.hpp"
#include "minsde/stats.hpp"
#include "minsde/parallel.hpp"
#include "minsde/path.hpp"
#include "minsde/girsanov.hpp"
#include "minsde/sampler.hpp"
#include "minsde/minlaw.hpp"
#include "minsde/malliavin.hpp"
#include "minsde/csv.hpp"
#include "minsde/sha256.hpp"
#include "minsde/config.hpp"
#include "minsde/manifest.hpp"
#include "minsde/runner.hpp"
