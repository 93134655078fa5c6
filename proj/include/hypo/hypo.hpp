#pragma once

#include "hypo/error.hpp"
#include "hypo/lie_core.hpp"
#include "hypo/uea.hpp"
#include "hypo/expr.hpp"
#include "hypo/diffop.hpp"
#include "hypo/repr.hpp"
#include "hypo/covering.hpp"
#include "hypo/lattice.hpp"
#include "hypo/spectral.hpp"
#include "hypo/probes.hpp"
#include "hypo/io.hpp"
