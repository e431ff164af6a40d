#pragma once

// Umbrella header: the whole tracker in one include.

#include "copydst/checkpoint.hpp"
#include "copydst/cli.hpp"
#include "copydst/config.hpp"
#include "copydst/data.hpp"
#include "copydst/decoder.hpp"
#include "copydst/embeddings.hpp"
#include "copydst/encoder.hpp"
#include "copydst/errors.hpp"
#include "copydst/metrics.hpp"
#include "copydst/model.hpp"
#include "copydst/random.hpp"
#include "copydst/tensor.hpp"
#include "copydst/tokenize.hpp"
#include "copydst/training.hpp"
