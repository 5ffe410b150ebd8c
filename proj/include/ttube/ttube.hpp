// Umbrella header.
#pragma once

#include "ttube/endcover.hpp"
#include "ttube/errors.hpp"
#include "ttube/experiments.hpp"
#include "ttube/expr.hpp"
#include "ttube/interval.hpp"
#include "ttube/jets.hpp"
#include "ttube/lognorm.hpp"
#include "ttube/problems.hpp"
#include "ttube/scaffold.hpp"
#include "ttube/stepper.hpp"
#include "ttube/system.hpp"
#include "ttube/tube.hpp"
