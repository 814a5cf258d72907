#pragma once

#include "taffy/bench.hpp"
#include "taffy/feistel.hpp"
#include "taffy/hash.hpp"
#include "taffy/keyfile.hpp"
#include "taffy/mtcf.hpp"
#include "taffy/oracle.hpp"
#include "taffy/sbbf.hpp"
#include "taffy/serialize.hpp"
#include "taffy/slot.hpp"
#include "taffy/tbf.hpp"
#include "taffy/tcf.hpp"
