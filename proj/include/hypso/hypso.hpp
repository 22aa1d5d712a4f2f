#pragma once

#include "hypso/color.hpp"
#include "hypso/error.hpp"
#include "hypso/grid.hpp"
#include "hypso/harmony.hpp"
#include "hypso/image.hpp"
#include "hypso/optimizer.hpp"
#include "hypso/pipeline.hpp"
#include "hypso/random.hpp"
#include "hypso/raster_io.hpp"
#include "hypso/scoring.hpp"
#include "hypso/serialize.hpp"
#include "hypso/service.hpp"
#include "hypso/terrain.hpp"
#include "hypso/version.hpp"
