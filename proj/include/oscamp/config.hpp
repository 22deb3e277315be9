#pragma once

#include "oscamp/model.hpp"

#include <string>

namespace oscamp {

struct Problem {
  HyperbolicModel model;
  BoundarySource source;
  RunConfig run;
};

// Plain-text key/value file with [system], [boundary], [source], [run].
Problem parse_config(const std::string& text, const std::string& origin = "<config>");
Problem load_config(const std::string& path);
std::string save_config(const Problem& problem);

}  // namespace oscamp
