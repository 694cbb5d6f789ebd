#pragma once

#include "tamekit/errors.hpp"
#include "tamekit/extended.hpp"
#include "tamekit/fibration.hpp"
#include "tamekit/forms.hpp"
#include "tamekit/interpolation.hpp"
#include "tamekit/io.hpp"
#include "tamekit/linalg.hpp"
#include "tamekit/matrix_power.hpp"
#include "tamekit/parallel.hpp"
#include "tamekit/radial.hpp"
#include "tamekit/retraction.hpp"
#include "tamekit/sampling.hpp"
#include "tamekit/search.hpp"
#include "tamekit/splicing.hpp"
#include "tamekit/tolerance.hpp"
