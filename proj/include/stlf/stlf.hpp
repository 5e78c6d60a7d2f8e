#pragma once

#include "stlf/config.hpp"
#include "stlf/data.hpp"
#include "stlf/emd.hpp"
#include "stlf/error.hpp"
#include "stlf/io.hpp"
#include "stlf/model_io.hpp"
#include "stlf/nn/adam.hpp"
#include "stlf/nn/cells.hpp"
#include "stlf/nn/network.hpp"
#include "stlf/nn/serialize.hpp"
#include "stlf/nn/train.hpp"
#include "stlf/pipeline.hpp"
#include "stlf/pso.hpp"
#include "stlf/pso_weights.hpp"
#include "stlf/random.hpp"
#include "stlf/report.hpp"
#include "stlf/spline.hpp"
