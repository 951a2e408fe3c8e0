#pragma once

#include "tpm/belief.hpp"
#include "tpm/config.hpp"
#include "tpm/equilibrium.hpp"
#include "tpm/error.hpp"
#include "tpm/experiments.hpp"
#include "tpm/fpm.hpp"
#include "tpm/info_model.hpp"
#include "tpm/io.hpp"
#include "tpm/montecarlo.hpp"
#include "tpm/mvp.hpp"
#include "tpm/numerics.hpp"
#include "tpm/pm_baseline.hpp"
#include "tpm/probability.hpp"
#include "tpm/quadrature.hpp"
#include "tpm/root_finding.hpp"
#include "tpm/scoring.hpp"
#include "tpm/table.hpp"
#include "tpm/time_value.hpp"
