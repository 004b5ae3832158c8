#pragma once

#include "bsrspmm/autotune.hpp"
#include "bsrspmm/bench.hpp"
#include "bsrspmm/bsr.hpp"
#include "bsrspmm/compare.hpp"
#include "bsrspmm/dense.hpp"
#include "bsrspmm/error.hpp"
#include "bsrspmm/generate.hpp"
#include "bsrspmm/io.hpp"
#include "bsrspmm/kernels.hpp"
#include "bsrspmm/oracle.hpp"
#include "bsrspmm/records.hpp"
#include "bsrspmm/reduce.hpp"
#include "bsrspmm/rng.hpp"
#include "bsrspmm/timing.hpp"
#include "bsrspmm/work_pool.hpp"
