#pragma once

#include "renev/error.hpp"
#include "renev/log.hpp"
#include "renev/geometry.hpp"
#include "renev/scenario.hpp"
#include "renev/radio.hpp"
#include "renev/signaling.hpp"
#include "renev/ledger.hpp"
#include "renev/slicing.hpp"
#include "renev/algorithm.hpp"
#include "renev/analysis/mcs.hpp"
#include "renev/analysis/throughput.hpp"
#include "renev/analysis/states.hpp"
#include "renev/montecarlo.hpp"
#include "renev/config.hpp"
#include "renev/validation.hpp"
#include "renev/overhead.hpp"
