#pragma once

#include "ssncp/linalg.hpp"
#include "ssncp/saddle.hpp"
#include "ssncp/jacobian.hpp"
#include "ssncp/newton.hpp"
#include "ssncp/diagnostics.hpp"
#include "ssncp/problems.hpp"
#include "ssncp/report.hpp"
