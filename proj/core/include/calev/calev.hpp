#pragma once

// Umbrella header for library consumers.

#include "calev/analysis.hpp"
#include "calev/dataset.hpp"
#include "calev/error.hpp"
#include "calev/metrics.hpp"
#include "calev/probability.hpp"
#include "calev/reference.hpp"
#include "calev/report_io.hpp"
#include "calev/rng.hpp"
#include "calev/svg.hpp"
#include "calev/temperature.hpp"
