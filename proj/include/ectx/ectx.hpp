#pragma once

// Umbrella header for the elastic-context agent runtime.

#include "ectx/backend.hpp"
#include "ectx/bench.hpp"
#include "ectx/config.hpp"
#include "ectx/episode.hpp"
#include "ectx/history.hpp"
#include "ectx/http_backend.hpp"
#include "ectx/http_tools.hpp"
#include "ectx/meta_ops.hpp"
#include "ectx/metrics.hpp"
#include "ectx/mock_tools.hpp"
#include "ectx/render.hpp"
#include "ectx/replay.hpp"
#include "ectx/scripted_backend.hpp"
#include "ectx/sft.hpp"
#include "ectx/structured_output.hpp"
#include "ectx/tokens.hpp"
#include "ectx/tools.hpp"
#include "ectx/trajectory.hpp"
