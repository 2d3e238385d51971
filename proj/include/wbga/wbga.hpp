#ifndef WBGA_WBGA_HPP
#define WBGA_WBGA_HPP

#include "config.hpp"
#include "spec_string.hpp"
#include "space.hpp"
#include "dictionary.hpp"
#include "solvers.hpp"
#include "schedule.hpp"
#include "perturbation.hpp"
#include "algorithms.hpp"
#include "diagnostics.hpp"
#include "report_io.hpp"
#include "harness.hpp"
#include "selftest.hpp"

#endif  // WBGA_WBGA_HPP
