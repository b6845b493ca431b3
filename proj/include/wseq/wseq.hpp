#pragma once

// Everything except the command-line front end.

#include "wseq/arith.hpp"
#include "wseq/errors.hpp"
#include "wseq/families.hpp"
#include "wseq/grimm.hpp"
#include "wseq/wcore.hpp"
#include "wseq/windows.hpp"
