#pragma once

// Everything except the command-line layer (nlwave/cli.hpp, which needs nlohmann/json).

#include "nlwave/config.hpp"
#include "nlwave/expression.hpp"
#include "nlwave/forms.hpp"
#include "nlwave/kernel.hpp"
#include "nlwave/nonlinearity.hpp"
#include "nlwave/nonlocal_solver.hpp"
#include "nlwave/propagator.hpp"
#include "nlwave/quadrature.hpp"
#include "nlwave/scenarios.hpp"
#include "nlwave/spectral_space.hpp"
#include "nlwave/types.hpp"
#include "nlwave/voc_solver.hpp"
