#pragma once

#include "ssqw/errors.hpp"
#include "ssqw/io.hpp"
#include "ssqw/optimize.hpp"
#include "ssqw/pricing.hpp"
#include "ssqw/recipes.hpp"
#include "ssqw/statevector.hpp"
#include "ssqw/target.hpp"
#include "ssqw/walk.hpp"
