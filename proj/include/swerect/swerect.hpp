#pragma once

#include "swerect/algebra.hpp"
#include "swerect/config.hpp"
#include "swerect/errors.hpp"
#include "swerect/fd.hpp"
#include "swerect/grid.hpp"
#include "swerect/io.hpp"
#include "swerect/linear.hpp"
#include "swerect/nonlinear.hpp"
#include "swerect/norms.hpp"
#include "swerect/prep.hpp"
#include "swerect/scenarios.hpp"
#include "swerect/state.hpp"
#include "swerect/stationary.hpp"
#include "swerect/threads.hpp"
