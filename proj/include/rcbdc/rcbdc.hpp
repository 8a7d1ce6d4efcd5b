#pragma once

#include "rcbdc/anonmodel.hpp"
#include "rcbdc/attackdemo.hpp"
#include "rcbdc/bench.hpp"
#include "rcbdc/coinjoin.hpp"
#include "rcbdc/group.hpp"
#include "rcbdc/ledger.hpp"
#include "rcbdc/merkle.hpp"
#include "rcbdc/pedersen.hpp"
#include "rcbdc/pseudonym.hpp"
#include "rcbdc/rangeproof.hpp"
#include "rcbdc/scenario.hpp"
#include "rcbdc/schnorr.hpp"
#include "rcbdc/tx.hpp"
#include "rcbdc/wire.hpp"
