#pragma once

#include "ruinprob/specfun/bessel.hpp"
#include "ruinprob/specfun/cumulative_integral.hpp"
#include "ruinprob/specfun/gamma.hpp"
#include "ruinprob/specfun/kummer.hpp"
#include "ruinprob/specfun/quadrature.hpp"
