#pragma once

// Everything except the WebSocket transport (sewmimic/sandbox/server.hpp,
// which needs OpenSSL).

#include "sewmimic/capsule.hpp"
#include "sewmimic/error.hpp"
#include "sewmimic/geometry.hpp"
#include "sewmimic/metrics.hpp"
#include "sewmimic/model_io.hpp"
#include "sewmimic/oracle.hpp"
#include "sewmimic/params_io.hpp"
#include "sewmimic/replay.hpp"
#include "sewmimic/report.hpp"
#include "sewmimic/retarget.hpp"
#include "sewmimic/robot_model.hpp"
#include "sewmimic/safety_filter.hpp"
#include "sewmimic/sandbox/session.hpp"
#include "sewmimic/subproblems.hpp"
#include "sewmimic/sync.hpp"
#include "sewmimic/synth.hpp"
#include "sewmimic/trajectory.hpp"
#include "sewmimic/wire.hpp"
