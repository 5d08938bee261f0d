#include "sgwn/errors.hpp"

namespace sgwn {

FormatError::FormatError(const std::string& what, std::uint64_t offset)
    : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}

}  // namespace sgwn
