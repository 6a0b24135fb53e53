#pragma once

#include "error.hpp"
#include "interval.hpp"
#include "normal.hpp"
#include "quadrature.hpp"
#include "measures.hpp"
#include "cantor.hpp"
#include "lattice.hpp"
#include "piecewise_linear.hpp"
#include "solver.hpp"
#include "oracle.hpp"
#include "svg.hpp"
#include "pipeline.hpp"
#include "philox.hpp"
#include "montecarlo.hpp"
#include "hermite.hpp"
#include "acceptance.hpp"
#include "cli.hpp"
