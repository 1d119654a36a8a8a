#pragma once

#include "padic_core.hpp"
#include "kd_trie.hpp"
#include "mahler.hpp"
#include "learner.hpp"
#include "games.hpp"
#include "sample_io.hpp"
