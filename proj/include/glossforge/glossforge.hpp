#pragma once

#include "glossforge/config.hpp"
#include "glossforge/errors.hpp"
#include "glossforge/evaluation.hpp"
#include "glossforge/fabrication.hpp"
#include "glossforge/geometry.hpp"
#include "glossforge/gloss.hpp"
#include "glossforge/io.hpp"
#include "glossforge/masking.hpp"
#include "glossforge/optics.hpp"
#include "glossforge/pipeline.hpp"
#include "glossforge/raster.hpp"
#include "glossforge/simulator.hpp"
#include "glossforge/stitching.hpp"
