#pragma once

// Umbrella header for the kdx spatial-index library.

#include "kdx/bench.hpp"
#include "kdx/io.hpp"
#include "kdx/neighbors.hpp"
#include "kdx/oracle.hpp"
#include "kdx/point.hpp"
#include "kdx/rng.hpp"
#include "kdx/search.hpp"
#include "kdx/selection.hpp"
#include "kdx/theory.hpp"
#include "kdx/tree.hpp"
