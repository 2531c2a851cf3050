#pragma once

// Convenience umbrella for the whole library.

#include "quadflow/corners.hpp"
#include "quadflow/flow_filter.hpp"
#include "quadflow/flow_provider.hpp"
#include "quadflow/flow_reversal.hpp"
#include "quadflow/horn_schunck.hpp"
#include "quadflow/image.hpp"
#include "quadflow/image_io.hpp"
#include "quadflow/metrics.hpp"
#include "quadflow/parallel.hpp"
#include "quadflow/quadratic_motion.hpp"
#include "quadflow/scene.hpp"
#include "quadflow/synthesis.hpp"
#include "quadflow/tracking.hpp"
#include "quadflow/warp.hpp"
