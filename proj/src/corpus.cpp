#include "mvp/corpus.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "mvp/error.hpp"
#include "mvp/mbti.hpp"

namespace mvp {
namespace {

using Record = std::vector<std::string>;

// Splits CSV text into records. Quoted fields may contain commas, doubled
// quotes and line breaks.
std::vector<Record> split_csv(std::string_view text) {
  std::vector<Record> records;
  Record record;
  std::string field;
  bool quoted = false;
  bool field_started = false;
  std::size_t i = 0;
  auto end_field = [&] {
    record.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    if (!(record.size() == 1 && record[0].empty())) records.push_back(std::move(record));
    record.clear();
  };
  while (i < text.size()) {
    const char c = text[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"' && !field_started) {
      quoted = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n' || c == '\r') {
      if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
    ++i;
  }
  if (quoted) throw DataError("unterminated quoted field at end of csv");
  if (field_started || !record.empty()) end_record();
  return records;
}

}  // namespace

std::vector<std::string> RawUser::posts() const {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = raw_text.find(kPostDelimiter, start);
    if (pos == std::string::npos) {
      out.push_back(raw_text.substr(start));
      break;
    }
    out.push_back(raw_text.substr(start, pos - start));
    start = pos + kPostDelimiter.size();
  }
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::vector<RawUser> parse_mbti_csv_text(std::string_view text) {
  auto records = split_csv(text);
  if (records.empty()) throw DataError("csv has no header");
  const Record& header = records.front();
  int type_col = -1;
  int posts_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "type") type_col = static_cast<int>(c);
    if (header[c] == "posts") posts_col = static_cast<int>(c);
  }
  if (type_col < 0 || posts_col < 0) throw DataError("csv header must name 'type' and 'posts' columns");

  std::vector<RawUser> users;
  users.reserve(records.size() - 1);
  for (std::size_t r = 1; r < records.size(); ++r) {
    const Record& rec = records[r];
    const std::string row = std::to_string(r);
    if (rec.size() != header.size()) {
      throw DataError("expected " + std::to_string(header.size()) + " fields at row " + row + ", got " +
                      std::to_string(rec.size()));
    }
    const std::string& code = rec[type_col];
    if (!is_mbti_code(code)) throw DataError("invalid type code at row " + row);
    if (rec[posts_col].empty()) throw DataError("empty posts field at row " + row);
    users.push_back(RawUser{"row-" + row, code, rec[posts_col]});
  }
  return users;
}

std::vector<RawUser> parse_mbti_csv(const std::filesystem::path& path) {
  return parse_mbti_csv_text(read_file(path));
}

std::vector<RawUser> parse_mbti_jsonl(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file '" + path.string() + "'");
  std::vector<RawUser> users;
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    ++row;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = " at row " + std::to_string(row);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw DataError("malformed json" + where);
    }
    if (!j.contains("type") || !j["type"].is_string()) throw DataError("missing type" + where);
    const std::string code = j["type"].get<std::string>();
    if (!is_mbti_code(code)) throw DataError("invalid type code" + where);
    if (!j.contains("posts") || !j["posts"].is_array() || j["posts"].empty()) {
      throw DataError("empty posts field" + where);
    }
    std::string text;
    for (std::size_t i = 0; i < j["posts"].size(); ++i) {
      if (i) text += kPostDelimiter;
      text += j["posts"][i].get<std::string>();
    }
    std::string id = "row-" + std::to_string(row);
    if (j.contains("id")) id = j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump();
    users.push_back(RawUser{std::move(id), code, std::move(text)});
  }
  return users;
}

std::vector<RawUser> load_corpus(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw DataError("corpus file not found: " + path.string());
  const auto ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".json") return parse_mbti_jsonl(path);
  return parse_mbti_csv(path);
}

}  // namespace mvp
