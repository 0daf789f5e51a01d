#pragma once

#include "cursal/core/blur.hpp"
#include "cursal/core/foveation.hpp"
#include "cursal/core/metrics.hpp"
#include "cursal/core/random.hpp"
#include "cursal/core/raster.hpp"
#include "cursal/core/subsample.hpp"
#include "cursal/core/types.hpp"
#include "cursal/error.hpp"
#include "cursal/io/catalog.hpp"
#include "cursal/io/frame_store.hpp"
#include "cursal/io/motion_file.hpp"
#include "cursal/io/params_file.hpp"
#include "cursal/io/trace_format.hpp"
#include "cursal/postprocess/motion.hpp"
#include "cursal/postprocess/propagate.hpp"
#include "cursal/postprocess/transform.hpp"
#include "cursal/service/collection_service.hpp"
#include "cursal/service/http_api.hpp"
