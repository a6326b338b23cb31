#pragma once

#include "hyperx/adam.hpp"
#include "hyperx/ade.hpp"
#include "hyperx/autodiff.hpp"
#include "hyperx/bench.hpp"
#include "hyperx/error.hpp"
#include "hyperx/expansions.hpp"
#include "hyperx/gcn.hpp"
#include "hyperx/hypergraph.hpp"
#include "hyperx/io.hpp"
#include "hyperx/parallel.hpp"
#include "hyperx/random.hpp"
#include "hyperx/synth.hpp"
#include "hyperx/trainer.hpp"
#include "hyperx/wl.hpp"
