#pragma once

#include "bfp/distributions.hpp"
#include "bfp/emep.hpp"
#include "bfp/errors.hpp"
#include "bfp/heuristics.hpp"
#include "bfp/io.hpp"
#include "bfp/matrixkit.hpp"
#include "bfp/mltests.hpp"
#include "bfp/montecarlo.hpp"
#include "bfp/solvers.hpp"
#include "bfp/stats_core.hpp"
