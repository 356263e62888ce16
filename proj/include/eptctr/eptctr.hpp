#pragma once

#include "eptctr/error.hpp"
#include "eptctr/lbfgs_direction.hpp"
#include "eptctr/problem.hpp"
#include "eptctr/problem_suite.hpp"
#include "eptctr/qr_projection.hpp"
#include "eptctr/solver.hpp"
