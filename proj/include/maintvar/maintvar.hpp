#pragma once

// Umbrella header for the maintvar library.

#include "maintvar/csv.hpp"
#include "maintvar/date.hpp"
#include "maintvar/errors.hpp"
#include "maintvar/evaluate.hpp"
#include "maintvar/ingest.hpp"
#include "maintvar/matrix.hpp"
#include "maintvar/rfimpact.hpp"
#include "maintvar/rng.hpp"
#include "maintvar/special.hpp"
#include "maintvar/statcheck.hpp"
#include "maintvar/svgplot.hpp"
#include "maintvar/textfeat.hpp"
#include "maintvar/varmodel.hpp"
