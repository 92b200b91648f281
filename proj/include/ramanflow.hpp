// ramanflow.hpp - umbrella header
#pragma once

#include "ramanflow/bloch.hpp"
#include "ramanflow/coefficients.hpp"
#include "ramanflow/design.hpp"
#include "ramanflow/io.hpp"
#include "ramanflow/optimizer.hpp"
#include "ramanflow/plates.hpp"
#include "ramanflow/propagation.hpp"
#include "ramanflow/scenario.hpp"
#include "ramanflow/schedule.hpp"
#include "ramanflow/spectrum.hpp"
