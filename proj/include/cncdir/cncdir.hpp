#pragma once

#include "cncdir/bench.hpp"
#include "cncdir/common.hpp"
#include "cncdir/inference.hpp"
#include "cncdir/io.hpp"
#include "cncdir/mixture_weight.hpp"
#include "cncdir/models.hpp"
#include "cncdir/moments.hpp"
#include "cncdir/optimize.hpp"
#include "cncdir/params.hpp"
#include "cncdir/rng.hpp"
#include "cncdir/sampling.hpp"
#include "cncdir/simplex.hpp"
#include "cncdir/specfun.hpp"
