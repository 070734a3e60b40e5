/**
 * @file fsi.hpp
 * @brief Umbrella header.
 */
#pragma once

#include "params.hpp"
#include "mesh.hpp"
#include "quadrature.hpp"
#include "fem.hpp"
#include "linsolve.hpp"
#include "ale.hpp"
#include "energy.hpp"
#include "scheme.hpp"
#include "io.hpp"
#include "bench.hpp"
