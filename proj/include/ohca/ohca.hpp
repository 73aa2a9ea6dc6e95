#pragma once

#include "ohca/error.hpp"
#include "ohca/random.hpp"
#include "ohca/traffic.hpp"
#include "ohca/allocation.hpp"
#include "ohca/allocators.hpp"
#include "ohca/hca_simulator.hpp"
#include "ohca/predictor.hpp"
#include "ohca/io.hpp"
