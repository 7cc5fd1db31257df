#pragma once

#include "polymag/process_spec.hpp"

#include <map>
#include <string>
#include <vector>

namespace polymag {

struct BuiltinParam {
    std::string name;
    std::string default_value;  ///< empty when the parameter is optional without default
    std::string meaning;
};

struct BuiltinInfo {
    std::string name;
    std::string summary;
    std::vector<BuiltinParam> params;  ///< besides the common m and T
};

/// All built-in processes, in a stable order.
const std::vector<BuiltinInfo>& builtin_catalog();

using BuiltinParams = std::map<std::string, std::string>;

/// Builds a built-in process. Every builtin accepts m (even, default 4) and
/// T (default 1); time coefficients such as `a` are expressions in t, e.g.
/// "0.3 + 0.1*t" or "piecewise(1, 0.5, 2*t)". Throws SpecError on an
/// unknown name, an unknown parameter or a parameter out of range.
ProcessSpec builtin(const std::string& name, const BuiltinParams& params = {});

/// A representative starting point inside the state space of the builtin.
std::vector<double> builtin_initial_state(const std::string& name, const BuiltinParams& params = {});

}  // namespace polymag
