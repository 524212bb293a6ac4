#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mvp {

inline constexpr std::string_view kPostDelimiter = "|||";

/// One user as read from a corpus file, before any tokenization.
struct RawUser {
  std::string user_id;
  std::string type_code;
  std::string raw_text;  // posts joined by kPostDelimiter

  std::vector<std::string> posts() const;
};

/// Reads a Kaggle-layout CSV: a header naming at least `type` and `posts`
/// columns, quoted fields per RFC 4180. Users get ids "row-<k>" where k is
/// the 1-based data row. Throws DataError naming the row on bad records.
std::vector<RawUser> parse_mbti_csv(const std::filesystem::path& path);

/// Same contract for in-memory text; exposed for tests.
std::vector<RawUser> parse_mbti_csv_text(std::string_view text);

/// Reads JSON lines of the form {"id": ..., "type": ..., "posts": [...]}.
std::vector<RawUser> parse_mbti_jsonl(const std::filesystem::path& path);

/// Dispatches on the extension: ".jsonl"/".json" go to the JSON-lines reader,
/// everything else is treated as CSV.
std::vector<RawUser> load_corpus(const std::filesystem::path& path);

std::string read_file(const std::filesystem::path& path);

}  // namespace mvp
