#pragma once

#include "qkdrate/oracles/fock.hpp"
#include "qkdrate/oracles/grid_search.hpp"
#include "qkdrate/oracles/quadrature.hpp"
