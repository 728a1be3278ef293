#pragma once

#include "ddreg/baseline.hpp"
#include "ddreg/bspline.hpp"
#include "ddreg/commands.hpp"
#include "ddreg/config.hpp"
#include "ddreg/csv.hpp"
#include "ddreg/errors.hpp"
#include "ddreg/harness.hpp"
#include "ddreg/ingest.hpp"
#include "ddreg/model.hpp"
#include "ddreg/parallel.hpp"
#include "ddreg/report.hpp"
#include "ddreg/rng.hpp"
#include "ddreg/sampler.hpp"
#include "ddreg/selection.hpp"
#include "ddreg/special_fn.hpp"
#include "ddreg/synth.hpp"
