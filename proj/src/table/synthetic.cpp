#include "copilot/table/synthetic.hpp"

#include <random>

#include "copilot/common/error.hpp"
#include "copilot/common/text.hpp"

namespace copilot::table {

std::vector<AttributionRow> generate_synthetic_rows(std::size_t n, std::uint64_t seed,
                                                    bool stratified,
                                                    const SyntheticConfig& config) {
  if (n == 0) throw ConfigError("synthetic row count must be at least 1");
  if (config.model_names.empty() || config.channels.empty() || config.factors.empty()) {
    throw ConfigError("synthetic pools and factor list must be non-empty");
  }
  std::mt19937_64 rng(seed);
  std::vector<AttributionRow> rows(n);
  for (auto& row : rows) {
    row.model_name = config.model_names[text::uniform_below(rng, config.model_names.size())];
    row.channel = config.channels[text::uniform_below(rng, config.channels.size())];
    row.absolute_change = text::uniform_int(rng, -kScoreLimit, kScoreLimit);
    for (const auto& f : config.factors) {
      row.factor_scores.emplace_back(f, text::uniform_int(rng, -kScoreLimit, kScoreLimit));
    }
  }
  if (!stratified) return rows;

  // Planted values go into the leading rows, which are then shuffled into
  // seeded positions.
  const std::size_t width = config.factors.size();
  const int boundary[] = {-6, -5, 5, 6};
  for (std::size_t i = 0; i < 4 && i / width < n; ++i) {
    rows[i / width].factor_scores[i % width].second = boundary[i];
  }
  const int signs[] = {-1, 0, 1};
  for (std::size_t i = 0; i < 3 && i < n; ++i) {
    const int magnitude = text::uniform_int(rng, 1, kScoreLimit);
    rows[i].absolute_change = signs[i] * magnitude;
  }
  text::seeded_shuffle(rows, rng);
  return rows;
}

}  // namespace copilot::table
