#pragma once

// Umbrella header for the core library.

#include "adda/augment.hpp"
#include "adda/checkpoint.hpp"
#include "adda/contrastive.hpp"
#include "adda/data.hpp"
#include "adda/encoder.hpp"
#include "adda/errors.hpp"
#include "adda/eval.hpp"
#include "adda/numerics.hpp"
#include "adda/rng.hpp"
#include "adda/scheduler.hpp"
#include "adda/trainer.hpp"
