#pragma once

#include "ruelle/bohr.hpp"
#include "ruelle/cascade.hpp"
#include "ruelle/duality.hpp"
#include "ruelle/errors.hpp"
#include "ruelle/format.hpp"
#include "ruelle/io.hpp"
#include "ruelle/keane.hpp"
#include "ruelle/laurent.hpp"
#include "ruelle/linalg.hpp"
#include "ruelle/parallel.hpp"
#include "ruelle/rng.hpp"
#include "ruelle/transfer.hpp"
