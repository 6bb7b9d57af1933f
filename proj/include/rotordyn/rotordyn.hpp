#pragma once

// Umbrella header for the rotordyn toolkit.

#include "rotordyn/classical_rotor.hpp"
#include "rotordyn/errors.hpp"
#include "rotordyn/evolution.hpp"
#include "rotordyn/output.hpp"
#include "rotordyn/rotor_basis.hpp"
#include "rotordyn/scenario.hpp"
#include "rotordyn/scenario_config.hpp"
#include "rotordyn/specfun.hpp"
#include "rotordyn/spectrum.hpp"
#include "rotordyn/wigner_tomography.hpp"
