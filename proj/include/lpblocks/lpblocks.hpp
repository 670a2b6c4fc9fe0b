#pragma once

#include "lpblocks/errors.hpp"
#include "lpblocks/seqcore.hpp"
#include "lpblocks/rng.hpp"
#include "lpblocks/models.hpp"
#include "lpblocks/spectral.hpp"
#include "lpblocks/blocks.hpp"
#include "lpblocks/estimators.hpp"
#include "lpblocks/largedev.hpp"
