#pragma once

#include "gridrel/adoption.hpp"
#include "gridrel/config.hpp"
#include "gridrel/distributions.hpp"
#include "gridrel/errors.hpp"
#include "gridrel/indices.hpp"
#include "gridrel/loadpoint.hpp"
#include "gridrel/mcengine.hpp"
#include "gridrel/rbts.hpp"
#include "gridrel/residential.hpp"
#include "gridrel/rng.hpp"
#include "gridrel/stats.hpp"
#include "gridrel/system.hpp"
#include "gridrel/timeseries.hpp"
