#pragma once

#include "racer/averaging.hpp"
#include "racer/baselines.hpp"
#include "racer/bench.hpp"
#include "racer/emd.hpp"
#include "racer/errors.hpp"
#include "racer/estimators.hpp"
#include "racer/fft.hpp"
#include "racer/geometry.hpp"
#include "racer/image.hpp"
#include "racer/io.hpp"
#include "racer/parallel.hpp"
#include "racer/radial_profile.hpp"
#include "racer/snr.hpp"
#include "racer/synthetic.hpp"
