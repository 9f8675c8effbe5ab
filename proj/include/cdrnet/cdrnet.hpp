#pragma once

#include "cdrnet/bayesnet.hpp"
#include "cdrnet/cdr.hpp"
#include "cdrnet/compare.hpp"
#include "cdrnet/contingency.hpp"
#include "cdrnet/csv.hpp"
#include "cdrnet/dataset.hpp"
#include "cdrnet/dot.hpp"
#include "cdrnet/errors.hpp"
#include "cdrnet/graph.hpp"
#include "cdrnet/json_io.hpp"
#include "cdrnet/pc.hpp"
#include "cdrnet/pipeline.hpp"
