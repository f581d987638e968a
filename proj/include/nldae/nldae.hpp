#pragma once

#include "nldae/bench.hpp"
#include "nldae/config.hpp"
#include "nldae/denoiser.hpp"
#include "nldae/errors.hpp"
#include "nldae/mlp.hpp"
#include "nldae/model_io.hpp"
#include "nldae/results.hpp"
#include "nldae/rng.hpp"
#include "nldae/scg.hpp"
#include "nldae/sim_locate.hpp"
#include "nldae/sim_ofdm.hpp"
#include "nldae/sim_signal.hpp"
