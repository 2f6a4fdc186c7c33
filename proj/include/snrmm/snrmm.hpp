#pragma once

#include "snrmm/bayes.hpp"
#include "snrmm/error.hpp"
#include "snrmm/estimators.hpp"
#include "snrmm/experiments.hpp"
#include "snrmm/gaussian.hpp"
#include "snrmm/minimax.hpp"
#include "snrmm/parallel.hpp"
#include "snrmm/regime.hpp"
#include "snrmm/risk.hpp"
#include "snrmm/tuning.hpp"
