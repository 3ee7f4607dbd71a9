#pragma once

#include "margins/errors.hpp"
#include "margins/numeric.hpp"
#include "margins/distributions.hpp"
#include "margins/selective.hpp"
#include "margins/concavity.hpp"
#include "margins/references.hpp"
#include "margins/ingest.hpp"
#include "margins/group_analysis.hpp"
#include "margins/simulate.hpp"
#include "margins/grammar.hpp"
#include "margins/svg.hpp"
