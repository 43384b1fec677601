#pragma once

#include "bench.hpp"
#include "config.hpp"
#include "coreset.hpp"
#include "dataset.hpp"
#include "discrepancy.hpp"
#include "errors.hpp"
#include "gsw.hpp"
#include "kernels.hpp"
#include "random.hpp"
#include "report_io.hpp"
