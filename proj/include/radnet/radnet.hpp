#pragma once

// Radial flow network toolkit: simulation of monotone-flow networks
// (power, gas, water), operational-tree learning from nodal potential
// statistics, injection estimation, and numerical verification oracles.

#include "radnet/errors.hpp"
#include "radnet/estimate.hpp"
#include "radnet/experiment.hpp"
#include "radnet/flow.hpp"
#include "radnet/generate.hpp"
#include "radnet/io.hpp"
#include "radnet/learn.hpp"
#include "radnet/matrix.hpp"
#include "radnet/network.hpp"
#include "radnet/oracles.hpp"
#include "radnet/parallel.hpp"
#include "radnet/rng.hpp"
#include "radnet/simulate.hpp"
#include "radnet/verify.hpp"
