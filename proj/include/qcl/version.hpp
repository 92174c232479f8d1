// version.hpp — library version string, embedded in manifests and CSV headers

#pragma once

namespace qcl {

inline constexpr const char* version = "1.0.0";

} // namespace qcl
