#pragma once

#include "agmx/analysis.hpp"
#include "agmx/core.hpp"
#include "agmx/io.hpp"
#include "agmx/lyapunov.hpp"
#include "agmx/problem_spec.hpp"
#include "agmx/problems.hpp"
#include "agmx/rng.hpp"
#include "agmx/solvers.hpp"
