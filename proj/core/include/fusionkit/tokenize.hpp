#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace fusionkit::text {

/// Splits UTF-8 text into case-folded words.
///
/// Text is NFKC-normalized and case-folded, then segmented into maximal runs
/// of letters, digits and combining marks. Everything else separates words.
/// Invalid UTF-8 sequences act as separators. Deterministic and locale-free.
std::vector<std::string> tokenize(std::string_view text);

/// Full Unicode case folding, no other changes.
std::string case_fold(std::string_view text);

} // namespace fusionkit::text
