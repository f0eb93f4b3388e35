#pragma once

#include "gogrow/abm.hpp"
#include "gogrow/analysis.hpp"
#include "gogrow/errors.hpp"
#include "gogrow/integrate.hpp"
#include "gogrow/io.hpp"
#include "gogrow/model.hpp"
#include "gogrow/spectral.hpp"
#include "gogrow/trajectory.hpp"
