/// Umbrella header for the pe3d library.
#pragma once

#include "pe3d/field.hpp"
#include "pe3d/vertical_modes.hpp"
#include "pe3d/modal_state.hpp"
#include "pe3d/nonlinear_terms.hpp"
#include "pe3d/zero_mode_solver.hpp"
#include "pe3d/baroclinic_solver.hpp"
#include "pe3d/boundary.hpp"
#include "pe3d/nesting.hpp"
#include "pe3d/io.hpp"
