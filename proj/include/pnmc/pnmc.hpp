#pragma once

#include "pnmc/errors.hpp"
#include "pnmc/minkowski.hpp"
#include "pnmc/fields.hpp"
#include "pnmc/natural_systems.hpp"
#include "pnmc/goursat.hpp"
#include "pnmc/jet.hpp"
#include "pnmc/immersion.hpp"
#include "pnmc/frame_integration.hpp"
#include "pnmc/surface_analysis.hpp"
#include "pnmc/canonical_params.hpp"
#include "pnmc/fixtures.hpp"
#include "pnmc/io.hpp"
