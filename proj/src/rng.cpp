#include "scriptqa/rng.hpp"
