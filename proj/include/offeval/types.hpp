#pragma once

#include <cstdint>

namespace offeval {

// Dense ids produced by interning; valid ids are 0..n-1 within one log.
using UserId = std::int32_t;
using ItemId = std::int32_t;

// Event time in days since the start of the simulated window.
using Timestamp = double;

}  // namespace offeval
