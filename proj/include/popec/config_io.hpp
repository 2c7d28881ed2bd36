#ifndef POPEC_CONFIG_IO_HPP_
#define POPEC_CONFIG_IO_HPP_

#include <map>
#include <string>

#include "popec/system_model.hpp"

namespace popec {

namespace detail {
using SectionMap = std::map<std::string, std::map<std::string, std::string>>;
SectionMap parse_key_value_sections(const std::string& text);
}  // namespace detail

// Plain-text nested key/value format: "[section]" headers, "key = v1 v2 ..."
// entries, per-row matrix entries keyed user<i> / server<i>, '#' comments.
std::string instance_to_config(const SystemInstance& inst);
SystemInstance instance_from_config(const std::string& text);

SystemInstance load_instance(const std::string& path);
void save_instance(const SystemInstance& inst, const std::string& path);

}  // namespace popec

#endif  // POPEC_CONFIG_IO_HPP_
