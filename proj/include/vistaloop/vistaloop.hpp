#pragma once

// Umbrella header for the full pipeline.

#include "vistaloop/common.hpp"
#include "vistaloop/vocab.hpp"
#include "vistaloop/geometry.hpp"
#include "vistaloop/image.hpp"
#include "vistaloop/scenario.hpp"
#include "vistaloop/features.hpp"
#include "vistaloop/encoder.hpp"
#include "vistaloop/projection.hpp"
#include "vistaloop/raster.hpp"
#include "vistaloop/assembly.hpp"
#include "vistaloop/signature.hpp"
#include "vistaloop/generator.hpp"
#include "vistaloop/evaluator.hpp"
#include "vistaloop/refiner.hpp"
#include "vistaloop/loop.hpp"
#include "vistaloop/metrics.hpp"
#include "vistaloop/json_io.hpp"
#include "vistaloop/threading.hpp"
