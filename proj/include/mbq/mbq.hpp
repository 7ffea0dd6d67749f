#pragma once

// Umbrella header for the modular baskets queue library.

#include "mbq/bench.hpp"
#include "mbq/basket.hpp"
#include "mbq/checkers.hpp"
#include "mbq/common.hpp"
#include "mbq/explore.hpp"
#include "mbq/history.hpp"
#include "mbq/linearize.hpp"
#include "mbq/llic.hpp"
#include "mbq/process.hpp"
#include "mbq/queue.hpp"
