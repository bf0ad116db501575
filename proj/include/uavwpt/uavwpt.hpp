#pragma once

#include <uavwpt/allocation.hpp>
#include <uavwpt/channel.hpp>
#include <uavwpt/cli.hpp>
#include <uavwpt/config.hpp>
#include <uavwpt/errors.hpp>
#include <uavwpt/experiments.hpp>
#include <uavwpt/geometry.hpp>
#include <uavwpt/numerics.hpp>
#include <uavwpt/rng.hpp>
#include <uavwpt/stm.hpp>
#include <uavwpt/ttm.hpp>
#include <uavwpt/verification.hpp>
