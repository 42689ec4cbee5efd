#pragma once

// Umbrella header: the whole debloating toolkit in one include.

#include "prunekit/autograd.hpp"
#include "prunekit/bounds.hpp"
#include "prunekit/channel_prune.hpp"
#include "prunekit/datasets.hpp"
#include "prunekit/errors.hpp"
#include "prunekit/evaluate.hpp"
#include "prunekit/forward.hpp"
#include "prunekit/interval.hpp"
#include "prunekit/model.hpp"
#include "prunekit/pair_prune.hpp"
#include "prunekit/report.hpp"
#include "prunekit/schedule.hpp"
#include "prunekit/serialize.hpp"
#include "prunekit/tensor.hpp"
#include "prunekit/train.hpp"
