// Umbrella header: the whole library in one include.

#pragma once

#include "ncw/lanchester_core.hpp"
#include "ncw/dynamics.hpp"
#include "ncw/strategy.hpp"
#include "ncw/verification.hpp"
#include "ncw/scenario_io.hpp"
