#pragma once

#include "defgraph/error.hpp"
#include "defgraph/gps_scenario.hpp"
#include "defgraph/graph.hpp"
#include "defgraph/inference.hpp"
#include "defgraph/risk.hpp"
#include "defgraph/scenario.hpp"
#include "defgraph/scoring.hpp"
