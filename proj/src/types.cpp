#include "mifb/types.hpp"

#include <fmt/format.h>

namespace mifb {

ActivitySignature ActivitySignature::support(const std::vector<Index>& indices) {
  std::string key = "s:";
  for (std::size_t i = 0; i < indices.size(); ++i) {
    if (i) key += ';';
    key += fmt::format("{}", indices[i]);
  }
  return ActivitySignature(std::move(key));
}

ActivitySignature ActivitySignature::rank(Index r) {
  return ActivitySignature(fmt::format("r:{}", r));
}

ActivitySignature ActivitySignature::free_block(Index extent) {
  return ActivitySignature(fmt::format("f:{}", extent));
}

ActivitySignature ActivitySignature::from_key(std::string key) {
  return ActivitySignature(std::move(key));
}

ActivitySignature ActivitySignature::product(const std::vector<ActivitySignature>& parts) {
  std::string key;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) key += '|';
    key += parts[i].key();
  }
  return ActivitySignature(std::move(key));
}

}  // namespace mifb
