#ifndef THRESHOLDING_HPP_
#define THRESHOLDING_HPP_

#include "thresholding/errors.hpp"
#include "thresholding/ext_real.hpp"
#include "thresholding/quadrature.hpp"
#include "thresholding/specfun.hpp"
#include "thresholding/finite_dist.hpp"
#include "thresholding/asymptotics.hpp"
#include "thresholding/estimators.hpp"
#include "thresholding/mc_harness.hpp"
#include "thresholding/csv.hpp"

#endif  // THRESHOLDING_HPP_
