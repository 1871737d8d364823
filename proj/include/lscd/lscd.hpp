#pragma once

#include "lscd/corpus.hpp"
#include "lscd/diachrony.hpp"
#include "lscd/dump.hpp"
#include "lscd/error.hpp"
#include "lscd/evaluation.hpp"
#include "lscd/metrics.hpp"
#include "lscd/projection.hpp"
#include "lscd/report.hpp"
#include "lscd/score_matrix.hpp"
#include "lscd/static_baseline.hpp"
#include "lscd/synthgen.hpp"
#include "lscd/types.hpp"
