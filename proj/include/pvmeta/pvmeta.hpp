#pragma once

// Solar PV metadata inference: orientation recovery from generation traces by
// GP-UCB search over a fit-score surface, with differentially private release
// of the result. Include this to get the whole library.

#include "pvmeta/bo.hpp"
#include "pvmeta/calendar.hpp"
#include "pvmeta/data.hpp"
#include "pvmeta/dp.hpp"
#include "pvmeta/errors.hpp"
#include "pvmeta/fitscore.hpp"
#include "pvmeta/gp.hpp"
#include "pvmeta/io_util.hpp"
#include "pvmeta/preprocess.hpp"
#include "pvmeta/solar_model.hpp"
#include "pvmeta/solar_position.hpp"
#include "pvmeta/synthetic.hpp"
#include "pvmeta/version.hpp"
