#pragma once

#include "blindsynth/core/blindness_type.hpp"
#include "blindsynth/core/depth.hpp"
#include "blindsynth/core/error.hpp"
#include "blindsynth/core/filters.hpp"
#include "blindsynth/core/grid.hpp"
#include "blindsynth/core/png_io.hpp"
#include "blindsynth/core/random.hpp"
#include "blindsynth/core/resize.hpp"
#include "blindsynth/defocus.hpp"
#include "blindsynth/flow.hpp"
#include "blindsynth/guided_filter.hpp"
#include "blindsynth/haze.hpp"
#include "blindsynth/metrics.hpp"
#include "blindsynth/motion.hpp"
#include "blindsynth/pipeline/config.hpp"
#include "blindsynth/pipeline/dataset.hpp"
#include "blindsynth/pipeline/evaluate.hpp"
#include "blindsynth/pipeline/manifest.hpp"
#include "blindsynth/synthetic.hpp"
