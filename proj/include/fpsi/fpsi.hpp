#pragma once
// Umbrella header for the flow-plate interaction library.

#include "fpsi/ambient.hpp"
#include "fpsi/config.hpp"
#include "fpsi/driver.hpp"
#include "fpsi/geometry.hpp"
#include "fpsi/hspace.hpp"
#include "fpsi/integrator.hpp"
#include "fpsi/io.hpp"
#include "fpsi/krylov.hpp"
#include "fpsi/operators.hpp"
#include "fpsi/plate.hpp"
#include "fpsi/quadrature.hpp"
#include "fpsi/resolvent.hpp"
#include "fpsi/stationary.hpp"
#include "fpsi/transport.hpp"
#include "fpsi/util.hpp"
#include "fpsi/vonkarman.hpp"
