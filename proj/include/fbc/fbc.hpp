#pragma once

// Umbrella header for the free-boundary control library.

#include "fbc/adjoint_solver.hpp"
#include "fbc/carleman_weights.hpp"
#include "fbc/cli_runner.hpp"
#include "fbc/config.hpp"
#include "fbc/core.hpp"
#include "fbc/domain_transform.hpp"
#include "fbc/forward_solver.hpp"
#include "fbc/free_boundary.hpp"
#include "fbc/hum_control.hpp"
#include "fbc/io.hpp"
