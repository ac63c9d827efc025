#pragma once

#include "vicomm/adam.hpp"
#include "vicomm/baselines.hpp"
#include "vicomm/channels.hpp"
#include "vicomm/constellation.hpp"
#include "vicomm/errors.hpp"
#include "vicomm/eval.hpp"
#include "vicomm/matrix.hpp"
#include "vicomm/network.hpp"
#include "vicomm/objectives.hpp"
#include "vicomm/rng.hpp"
#include "vicomm/serialize.hpp"
#include "vicomm/system.hpp"
