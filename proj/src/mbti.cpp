#include "mvp/mbti.hpp"

#include <algorithm>
#include <cctype>

#include "mvp/error.hpp"

namespace mvp {
namespace {

constexpr std::array<std::array<char, 2>, kTraitCount> kPoles = {{
    {'E', 'I'}, {'S', 'N'}, {'T', 'F'}, {'J', 'P'},
}};

char upper(char c) { return static_cast<char>(std::toupper(static_cast<unsigned char>(c))); }

bool is_word_byte(unsigned char c) { return std::isalnum(c) || c >= 0x80; }

}  // namespace

const std::array<std::string, 16>& mbti_codes() {
  static const std::array<std::string, 16> codes = [] {
    std::array<std::string, 16> out;
    for (int bits = 0; bits < 16; ++bits) {
      std::string code(4, ' ');
      for (int t = 0; t < kTraitCount; ++t) code[t] = kPoles[t][(bits >> (3 - t)) & 1];
      out[bits] = code;
    }
    return out;
  }();
  return codes;
}

bool is_mbti_code(std::string_view token) {
  if (token.size() != 4) return false;
  for (int t = 0; t < kTraitCount; ++t) {
    const char c = upper(token[t]);
    if (c != kPoles[t][0] && c != kPoles[t][1]) return false;
  }
  return true;
}

TraitLabels encode_labels(std::string_view type_code) {
  if (!is_mbti_code(type_code)) {
    throw DataError("invalid type code '" + std::string(type_code) + "'");
  }
  TraitLabels labels(kTraitCount);
  for (int t = 0; t < kTraitCount; ++t) labels[t] = upper(type_code[t]) == kPoles[t][0] ? 1 : 0;
  return labels;
}

std::string decode_labels(const TraitLabels& labels) {
  if (labels.size() != kTraitCount) throw DataError("expected 4 trait labels");
  std::string code(4, ' ');
  for (int t = 0; t < kTraitCount; ++t) {
    if (labels[t] > 1) throw DataError("trait labels must be 0 or 1");
    code[t] = kPoles[t][labels[t] == 1 ? 0 : 1];
  }
  return code;
}

std::vector<std::string> split_words(std::string_view text) {
  std::vector<std::string> words;
  std::string current;
  for (unsigned char c : text) {
    if (is_word_byte(c)) {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : static_cast<char>(c));
    } else if (!current.empty()) {
      words.push_back(std::move(current));
      current.clear();
    }
  }
  if (!current.empty()) words.push_back(std::move(current));
  return words;
}

std::vector<std::string> scrub_label_leaks(std::vector<std::string> tokens) {
  std::erase_if(tokens, [](const std::string& tok) { return is_mbti_code(tok); });
  return tokens;
}

}  // namespace mvp
