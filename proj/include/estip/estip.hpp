#pragma once

#include "estip/datum.hpp"
#include "estip/energy.hpp"
#include "estip/error.hpp"
#include "estip/halftone.hpp"
#include "estip/io.hpp"
#include "estip/kernels.hpp"
#include "estip/meanfield.hpp"
#include "estip/particles.hpp"
#include "estip/presets.hpp"
