#pragma once

#include "parafreq/backgrounds.hpp"
#include "parafreq/error.hpp"
#include "parafreq/evolve.hpp"
#include "parafreq/experiment.hpp"
#include "parafreq/frequency.hpp"
#include "parafreq/kernel.hpp"
#include "parafreq/ouspec.hpp"
#include "parafreq/polynomial.hpp"
#include "parafreq/quadrature.hpp"
#include "parafreq/quadrature_rules.hpp"
#include "parafreq/simpson.hpp"
#include "parafreq/spectral.hpp"
