#pragma once

#include "permsel/datamodel.hpp"
#include "permsel/error.hpp"
#include "permsel/harness.hpp"
#include "permsel/linmod.hpp"
#include "permsel/multiplicity.hpp"
#include "permsel/permtest.hpp"
#include "permsel/synthgen.hpp"
