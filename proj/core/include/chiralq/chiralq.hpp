#pragma once

#include "chiralq/bismesh.hpp"
#include "chiralq/charges.hpp"
#include "chiralq/dynamics.hpp"
#include "chiralq/errors.hpp"
#include "chiralq/grid.hpp"
#include "chiralq/invariants.hpp"
#include "chiralq/mesh.hpp"
#include "chiralq/model.hpp"
#include "chiralq/noise.hpp"
#include "chiralq/numeric.hpp"
#include "chiralq/parallel.hpp"
#include "chiralq/prep.hpp"
#include "chiralq/types.hpp"
