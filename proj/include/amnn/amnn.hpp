#ifndef AMNN_AMNN_HPP
#define AMNN_AMNN_HPP

#include "amnn/clustering.hpp"
#include "amnn/core.hpp"
#include "amnn/data.hpp"
#include "amnn/experiment.hpp"
#include "amnn/gating.hpp"
#include "amnn/metrics.hpp"
#include "amnn/model_io.hpp"
#include "amnn/network.hpp"
#include "amnn/robust_loss.hpp"

#endif
