#pragma once

#include "polyamg/amg.hpp"
#include "polyamg/bench.hpp"
#include "polyamg/cholesky.hpp"
#include "polyamg/csr.hpp"
#include "polyamg/dense.hpp"
#include "polyamg/errors.hpp"
#include "polyamg/geometry.hpp"
#include "polyamg/mesh.hpp"
#include "polyamg/mesh_generators.hpp"
#include "polyamg/partition.hpp"
#include "polyamg/pcg.hpp"
#include "polyamg/rng.hpp"
#include "polyamg/vem.hpp"
