#pragma once

#include "rgn/numerics/checkpoint.hpp"
#include "rgn/numerics/mlp.hpp"
#include "rgn/numerics/ops.hpp"
#include "rgn/numerics/optim.hpp"
#include "rgn/numerics/params.hpp"
#include "rgn/numerics/tape.hpp"
#include "rgn/numerics/tensor.hpp"

#include "rgn/baselines.hpp"
#include "rgn/config.hpp"
#include "rgn/eval/crossval.hpp"
#include "rgn/eval/gradcheck.hpp"
#include "rgn/eval/macs.hpp"
#include "rgn/eval/metrics.hpp"
#include "rgn/hrgn.hpp"
#include "rgn/model.hpp"
#include "rgn/pipeline/features.hpp"
#include "rgn/pipeline/manifest.hpp"
#include "rgn/pipeline/protocol.hpp"
#include "rgn/pipeline/synth.hpp"
#include "rgn/srgn.hpp"
#include "rgn/topology.hpp"
#include "rgn/training.hpp"
