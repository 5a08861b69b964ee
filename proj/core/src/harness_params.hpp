#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "blowup/harness.hpp"

namespace blowup::harness {

enum class ParamType { Number, Integer, Boolean, String, NumberList, OptionalNumber, OptionalBoolean };

struct ParamDef {
  const char* name;
  ParamType type;
  nlohmann::json fallback;
  const char* help;
};

const std::vector<ParamDef>& param_defs(ExperimentKind kind);

}  // namespace blowup::harness
