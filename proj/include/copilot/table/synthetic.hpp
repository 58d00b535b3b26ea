#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "copilot/table/attribution.hpp"

namespace copilot::table {

struct SyntheticConfig {
  std::vector<std::string> model_names = {"lead", "opportunity", "signup", "purchase",
                                          "conversion"};
  std::vector<std::string> channels = {"display", "search", "social", "email",
                                       "video",   "affiliate", "direct"};
  std::vector<std::string> factors = default_factors();
};

/// Seeded rows with names drawn from the pools and every number uniform in
/// [-100, 100]. Stratified mode additionally plants the boundary scores
/// -6, -5, 5, 6 and one row of each change direction, as far as `n` and the
/// factor count allow, at seeded positions.
std::vector<AttributionRow> generate_synthetic_rows(std::size_t n, std::uint64_t seed,
                                                    bool stratified = false,
                                                    const SyntheticConfig& config = {});

}  // namespace copilot::table
