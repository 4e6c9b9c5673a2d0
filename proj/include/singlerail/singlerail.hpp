// Umbrella header for the single-rail qubit conversion toolkit.

#pragma once

#include "singlerail/conversion.hpp"
#include "singlerail/fock.hpp"
#include "singlerail/json_io.hpp"
#include "singlerail/qubit.hpp"
#include "singlerail/solver.hpp"
