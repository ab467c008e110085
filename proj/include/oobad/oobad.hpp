#pragma once

// Out-of-bag anomaly detection: one bagged tree ensemble per feature column,
// per-row uncertainty/disagreement from out-of-bag predictions, min-max
// scaled and summed into a row score.

#include "oobad/bench.hpp"
#include "oobad/csv.hpp"
#include "oobad/dataset.hpp"
#include "oobad/error.hpp"
#include "oobad/eval.hpp"
#include "oobad/forest.hpp"
#include "oobad/model_io.hpp"
#include "oobad/report_io.hpp"
#include "oobad/scoring.hpp"
#include "oobad/synthetic.hpp"
#include "oobad/tree.hpp"
