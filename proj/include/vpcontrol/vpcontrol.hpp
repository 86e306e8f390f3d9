#pragma once

#include "vpcontrol/grid.hpp"
#include "vpcontrol/equilibria.hpp"
#include "vpcontrol/control_field.hpp"
#include "vpcontrol/metrics.hpp"
#include "vpcontrol/poisson.hpp"
#include "vpcontrol/solver.hpp"
#include "vpcontrol/quadrature.hpp"
#include "vpcontrol/dispersion.hpp"
#include "vpcontrol/objectives.hpp"
#include "vpcontrol/parallel.hpp"
#include "vpcontrol/optimize.hpp"
#include "vpcontrol/landscape.hpp"
#include "vpcontrol/io.hpp"
