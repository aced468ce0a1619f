#pragma once

#include "orbit_bergman/common.hpp"
#include "orbit_bergman/moebius.hpp"
#include "orbit_bergman/fuchsian.hpp"
#include "orbit_bergman/quadrature.hpp"
#include "orbit_bergman/bergman.hpp"
#include "orbit_bergman/modular.hpp"
#include "orbit_bergman/poincare.hpp"
#include "orbit_bergman/dimension.hpp"
#include "orbit_bergman/zero_lab.hpp"
#include "orbit_bergman/io.hpp"
#include "orbit_bergman/acceptance.hpp"
#include "orbit_bergman/harness.hpp"
