#pragma once

#include "sphgreen/ddreal.hpp"
#include "sphgreen/errors.hpp"
#include "sphgreen/field_io.hpp"
#include "sphgreen/geometry.hpp"
#include "sphgreen/integral.hpp"
#include "sphgreen/legendre.hpp"
#include "sphgreen/log_gamma.hpp"
#include "sphgreen/series.hpp"
#include "sphgreen/spectral.hpp"
