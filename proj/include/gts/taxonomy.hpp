#pragma once

#include "gts/protocol.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace gts::taxonomy {

inline constexpr std::string_view normal = "Normal";

/// The 21 anomaly categories, in catalogue order.
const std::vector<std::string>& categories();

/// The 21 categories followed by "Normal".
const std::vector<std::string>& labels();

bool is_category(std::string_view name);
bool is_label(std::string_view name);

/// Throws ConfigError when a key is not an anomaly category or a phrase is empty.
void validate_phrase_bank(const PhraseBank& bank);

}  // namespace gts::taxonomy
