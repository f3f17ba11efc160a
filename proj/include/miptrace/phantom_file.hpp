#pragma once

#include <string>

#include "miptrace/phantom.hpp"

namespace miptrace {

/// Parses a phantom description file: `key = value` lines, `#` comments,
/// blank lines ignored. Scalar keys: nx, ny, nz (required), spacing (three
/// numbers), background, noise_sigma, seed. Each `sphere = kind cx cy cz
/// radius intensity` line adds one sphere, kind in {organ, tumor}. Errors
/// carry the 1-based line number.
PhantomSpec read_phantom_spec(const std::string& path);

PhantomSpec parse_phantom_spec(const std::string& text);

}  // namespace miptrace
