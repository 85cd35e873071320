#pragma once

#include "pipadmm/error.hpp"
#include "pipadmm/io.hpp"
#include "pipadmm/ladmm.hpp"
#include "pipadmm/linalg.hpp"
#include "pipadmm/loss.hpp"
#include "pipadmm/model_select.hpp"
#include "pipadmm/parallel.hpp"
#include "pipadmm/penalty.hpp"
#include "pipadmm/simbench.hpp"
#include "pipadmm/types.hpp"
