#pragma once

#include "fastmaxwell/core.hpp"
#include "fastmaxwell/transforms.hpp"
#include "fastmaxwell/grid.hpp"
#include "fastmaxwell/operators.hpp"
#include "fastmaxwell/assembly.hpp"
#include "fastmaxwell/spectral.hpp"
#include "fastmaxwell/solvers.hpp"
#include "fastmaxwell/oracle.hpp"
#include "fastmaxwell/iterative.hpp"
#include "fastmaxwell/problems.hpp"
#include "fastmaxwell/io.hpp"
#include "fastmaxwell/verify.hpp"
