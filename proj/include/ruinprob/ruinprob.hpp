#pragma once

#include "ruinprob/analysis.hpp"
#include "ruinprob/bvp.hpp"
#include "ruinprob/curve.hpp"
#include "ruinprob/error.hpp"
#include "ruinprob/exact.hpp"
#include "ruinprob/model.hpp"
#include "ruinprob/montecarlo.hpp"
#include "ruinprob/odecore.hpp"
#include "ruinprob/specfun.hpp"
#include "ruinprob/version.hpp"
