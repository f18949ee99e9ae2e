#pragma once

#include "stoneage/types.hpp"
#include "stoneage/protocol.hpp"
#include "stoneage/random.hpp"
#include "stoneage/graph.hpp"
#include "stoneage/engine.hpp"
#include "stoneage/mis.hpp"
#include "stoneage/generators.hpp"
#include "stoneage/io.hpp"
#include "stoneage/metrics.hpp"
#include "stoneage/verifier.hpp"
#include "stoneage/experiments.hpp"
