#include "mkv/errors.hpp"

namespace mkv {

void throw_config(const std::string& field, const std::string& what) {
  throw ConfigError(field + ": " + what);
}

}  // namespace mkv
