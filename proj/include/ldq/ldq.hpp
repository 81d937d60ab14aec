#pragma once

#include "ldq/error.hpp"
#include "ldq/rng.hpp"
#include "ldq/special.hpp"
#include "ldq/search.hpp"
#include "ldq/dist.hpp"
#include "ldq/model.hpp"
#include "ldq/ratecalc.hpp"
#include "ldq/simqueue.hpp"
#include "ldq/tailest.hpp"
#include "ldq/json_io.hpp"
#include "ldq/acceptance.hpp"
