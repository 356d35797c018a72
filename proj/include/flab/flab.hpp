#pragma once

#include "flab/core.hpp"
#include "flab/algebra.hpp"
#include "flab/lattice.hpp"
#include "flab/combinatorics.hpp"
#include "flab/states.hpp"
#include "flab/fluctuations.hpp"
#include "flab/gaussian.hpp"
#include "flab/cluster.hpp"
#include "flab/io.hpp"
#include "flab/experiments.hpp"
