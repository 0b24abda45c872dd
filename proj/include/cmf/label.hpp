#pragma once

#include <string>

namespace cmf {

// Subject identifier ("s1", "c3", ...).
using Label = std::string;

} // namespace cmf
