#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace mvp {

inline constexpr int kTraitCount = 4;

/// Short names of the trait dimensions, in label order.
inline constexpr std::array<std::string_view, kTraitCount> kTraitNames = {"EI", "SN", "TF", "JP"};

/// Binary trait labels. Entry t is 1 when the first letter of the pair
/// (E, S, T, J) is present in the type code.
using TraitLabels = std::vector<std::uint8_t>;

/// All 16 type codes in upper case.
const std::array<std::string, 16>& mbti_codes();

bool is_mbti_code(std::string_view token);

/// Throws DataError on anything that is not one of the 16 codes (any case).
TraitLabels encode_labels(std::string_view type_code);

/// Inverse of encode_labels; returns the upper-case code.
std::string decode_labels(const TraitLabels& labels);

/// Lower-cases and splits text into maximal runs of ASCII letters/digits.
/// Any other ASCII byte is a boundary; bytes >= 0x80 are kept inside words
/// so UTF-8 sequences are never split.
std::vector<std::string> split_words(std::string_view text);

/// Drops every token equal, ignoring case, to one of the 16 type codes.
std::vector<std::string> scrub_label_leaks(std::vector<std::string> tokens);

}  // namespace mvp
