#pragma once

#include "starlat/geometry.hpp"

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace starlat {

// args excludes the program name. Returns 0 ok, 1 domain error, 2 usage error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

nlohmann::json geometry_document(const RveModel& model);

}  // namespace starlat
