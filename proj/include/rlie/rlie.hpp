#pragma once

/**
 * @file rlie.hpp
 * @brief Umbrella header.
 */

#include "rlie/algebra.hpp"
#include "rlie/classify.hpp"
#include "rlie/dual.hpp"
#include "rlie/expr.hpp"
#include "rlie/fixtures.hpp"
#include "rlie/integrability.hpp"
#include "rlie/liegroup.hpp"
#include "rlie/ode.hpp"
#include "rlie/oracle.hpp"
#include "rlie/quadrature.hpp"
#include "rlie/reductions.hpp"
#include "rlie/riccati.hpp"
#include "rlie/solvers.hpp"
#include "rlie/special.hpp"
#include "rlie/trace.hpp"
