#pragma once

#include "tpm/behavior.hpp"
#include "tpm/bootstrap.hpp"
#include "tpm/certify.hpp"
#include "tpm/classical.hpp"
#include "tpm/compat.hpp"
#include "tpm/config.hpp"
#include "tpm/counts.hpp"
#include "tpm/errors.hpp"
#include "tpm/linalg.hpp"
#include "tpm/process.hpp"
#include "tpm/proclib.hpp"
#include "tpm/report.hpp"
