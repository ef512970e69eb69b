// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace mvgeo {

inline constexpr const char* kToolName = "mvgeo";
inline constexpr const char* kToolVersion = "0.1.0";

}  // namespace mvgeo
