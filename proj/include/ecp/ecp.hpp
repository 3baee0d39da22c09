#pragma once

// Empirical copula processes: models, empirical and multiplier processes,
// limit-field simulation, smoothness diagnostics, and the Monte Carlo
// experiment harness.

#include "ecp/copula/archimedean.hpp"
#include "ecp/copula/counterexamples.hpp"
#include "ecp/copula/extreme_value.hpp"
#include "ecp/copula/factory.hpp"
#include "ecp/copula/gaussian.hpp"
#include "ecp/copula/independence.hpp"
#include "ecp/copula/model.hpp"
#include "ecp/copula/tail_dependence.hpp"
#include "ecp/csv.hpp"
#include "ecp/diagnostics.hpp"
#include "ecp/empirical_process.hpp"
#include "ecp/experiment.hpp"
#include "ecp/grid.hpp"
#include "ecp/limit_process.hpp"
#include "ecp/multiplier.hpp"
#include "ecp/normal.hpp"
#include "ecp/rng.hpp"
#include "ecp/sample.hpp"
#include "ecp/stats.hpp"
