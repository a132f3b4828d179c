#pragma once

#include "fgbench/dataset.hpp"
#include "fgbench/error.hpp"
#include "fgbench/eval.hpp"
#include "fgbench/mock_backends.hpp"
#include "fgbench/parallel.hpp"
#include "fgbench/pool_builder.hpp"
#include "fgbench/random.hpp"
#include "fgbench/similarity.hpp"
#include "fgbench/synthetic.hpp"
#include "fgbench/text_renovator.hpp"
