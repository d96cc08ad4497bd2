#pragma once

#include <string_view>
#include <utility>
#include <vector>

namespace impact::quality::detail {

// (lexicon name, raw file content) in the canonical lexicon order.
const std::vector<std::pair<std::string_view, std::string_view>>& builtin_lexicon_files();

}  // namespace impact::quality::detail
