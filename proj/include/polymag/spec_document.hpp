#pragma once

#include "polymag/process_spec.hpp"

#include <string>
#include <string_view>

namespace polymag {

/// Parses a process document:
///
///   [meta]
///   name = ou
///   d = 1
///   m = 4
///   T = 1
///   state_space = real          # or "positive p", or "box l u"
///   [drift]
///   1: t - x
///   [diffusion]
///   1,1: 1                       # upper triangle; "11:" is accepted when d < 10
///   [jump_moments]
///   (2): 0.5*x^2
///   [sampler]
///   log-uniform-down a=-0.5 b=-0.1
///
/// Sections may come in any order; '#' starts a comment. Setting
/// `check_degrees = false` in [meta] skips the degree bounds so that
/// deliberately non-polynomial examples can still be written down.
/// Throws SpecError carrying the offending line and column.
ProcessSpec parse_spec(std::string_view text);

/// Inverse of parse_spec: parse_spec(serialize_spec(s)) has the same
/// characteristics as s.
std::string serialize_spec(const ProcessSpec& spec);

/// Reads and parses a file; I/O failures are reported as SpecError.
ProcessSpec load_spec_file(const std::string& path);

}  // namespace polymag
