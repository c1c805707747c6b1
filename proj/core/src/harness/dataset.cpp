#include "ncdkit/harness/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "ncdkit/error.hpp"

namespace ncdkit {
namespace {

struct RawRecord {
  std::size_t line = 0;
  std::string text;
  std::string label;
  bool label_is_integer = false;
  Split split = Split::unspecified;
};

std::string where(const std::string& file, std::size_t line) {
  return file + ":" + std::to_string(line);
}

Split parse_split(const std::string& value, const std::string& at) {
  if (value.empty()) return Split::unspecified;
  if (value == "train") return Split::train;
  if (value == "test") return Split::test;
  raise(ErrorKind::schema, at + ": split must be \"train\" or \"test\", got \"" + value + "\"");
}

bool is_integer(std::string_view s) {
  if (s.empty()) return false;
  long long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

std::vector<RawRecord> read_jsonl(std::istream& in, const std::string& file) {
  using nlohmann::json;
  std::vector<RawRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const std::string at = where(file, line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      raise(ErrorKind::parse, at + ": malformed JSON record: " + e.what());
    }
    if (!obj.is_object()) raise(ErrorKind::parse, at + ": record is not a JSON object");
    RawRecord r;
    r.line = line_no;
    if (!obj.contains("text")) raise(ErrorKind::schema, at + ": record has no \"text\" field");
    if (!obj.contains("label")) raise(ErrorKind::schema, at + ": record has no \"label\" field");
    if (!obj["text"].is_string()) raise(ErrorKind::schema, at + ": \"text\" must be a string");
    r.text = obj["text"].get<std::string>();
    const json& label = obj["label"];
    if (label.is_string()) {
      r.label = label.get<std::string>();
      r.label_is_integer = is_integer(r.label);
    } else if (label.is_number_integer()) {
      r.label = std::to_string(label.get<long long>());
      r.label_is_integer = true;
    } else {
      raise(ErrorKind::schema, at + ": label must be a string or an integer");
    }
    if (obj.contains("split")) {
      if (!obj["split"].is_string()) raise(ErrorKind::schema, at + ": \"split\" must be a string");
      r.split = parse_split(obj["split"].get<std::string>(), at);
    }
    records.push_back(std::move(r));
  }
  return records;
}

// RFC 4180 records: quoted fields may hold commas, quotes ("") and newlines.
class CsvReader {
 public:
  CsvReader(std::istream& in, std::string file) : in_(in), file_(std::move(file)) {}

  // Returns false at end of input. `start_line` receives the line the record
  // begins on.
  bool next(std::vector<std::string>& fields, std::size_t& start_line) {
    fields.clear();
    int c = in_.get();
    while (c == '\n' || c == '\r') {
      if (c == '\n') ++line_;
      c = in_.get();
    }
    if (c == EOF) return false;
    start_line = line_;
    std::string field;
    bool quoted = false;
    bool was_quoted = false;
    for (;; c = in_.get()) {
      if (quoted) {
        if (c == EOF) {
          raise(ErrorKind::parse, where(file_, start_line) + ": unterminated quoted field");
        }
        if (c == '"') {
          if (in_.peek() == '"') {
            in_.get();
            field += '"';
          } else {
            quoted = false;
          }
        } else {
          if (c == '\n') ++line_;
          field += static_cast<char>(c);
        }
        continue;
      }
      if (c == '"') {
        if (!field.empty() || was_quoted) {
          raise(ErrorKind::parse, where(file_, line_) + ": stray quote inside a field");
        }
        quoted = true;
        was_quoted = true;
      } else if (c == ',') {
        fields.push_back(std::move(field));
        field.clear();
        was_quoted = false;
      } else if (c == '\n' || c == '\r' || c == EOF) {
        if (c == '\r' && in_.peek() == '\n') in_.get();
        fields.push_back(std::move(field));
        if (c != EOF) ++line_;
        return true;
      } else {
        if (was_quoted) {
          raise(ErrorKind::parse, where(file_, line_) + ": text after closing quote");
        }
        field += static_cast<char>(c);
      }
    }
  }

 private:
  std::istream& in_;
  std::string file_;
  std::size_t line_ = 1;
};

std::vector<RawRecord> read_csv(std::istream& in, const std::string& file) {
  CsvReader reader(in, file);
  std::vector<std::string> fields;
  std::size_t line = 0;
  if (!reader.next(fields, line)) raise(ErrorKind::schema, file + ": empty CSV file");
  std::map<std::string, std::size_t> column;
  for (std::size_t i = 0; i < fields.size(); ++i) column[fields[i]] = i;
  if (!column.contains("text") || !column.contains("label")) {
    raise(ErrorKind::schema, where(file, line) + ": CSV header needs text and label columns");
  }
  const std::size_t text_col = column["text"];
  const std::size_t label_col = column["label"];
  const std::optional<std::size_t> split_col =
      column.contains("split") ? std::optional(column["split"]) : std::nullopt;

  std::vector<RawRecord> records;
  while (reader.next(fields, line)) {
    const std::string at = where(file, line);
    if (fields.size() != column.size()) {
      raise(ErrorKind::parse, at + ": expected " + std::to_string(column.size()) + " fields, got " +
                                  std::to_string(fields.size()));
    }
    RawRecord r;
    r.line = line;
    r.text = fields[text_col];
    r.label = fields[label_col];
    r.label_is_integer = is_integer(r.label);
    if (split_col) r.split = parse_split(fields[*split_col], at);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace

bool Dataset::has_test_split() const {
  return std::find(splits.begin(), splits.end(), Split::test) != splits.end();
}

std::optional<ClassId> Dataset::class_id(std::string_view name) const {
  auto it = std::find(class_names.begin(), class_names.end(), name);
  if (it == class_names.end()) return std::nullopt;
  return static_cast<ClassId>(std::distance(class_names.begin(), it));
}

std::optional<DatasetFormat> format_from_extension(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".jsonl" || ext == ".ndjson") return DatasetFormat::jsonl;
  if (ext == ".csv") return DatasetFormat::csv;
  return std::nullopt;
}

std::optional<std::vector<std::string>> preset_classes(std::string_view preset) {
  if (preset == "20news") return std::vector<std::string>{"alt.atheism", "comp.graphics"};
  return std::nullopt;
}

Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options) {
  const auto format = options.format ? options.format : format_from_extension(path);
  if (!format) {
    raise(ErrorKind::usage, "cannot infer dataset format of " + path.string() +
                                " (use a .jsonl or .csv extension or pass a format)");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) raise(ErrorKind::io, "cannot open dataset " + path.string());
  const std::string file = path.filename().string();
  std::vector<RawRecord> records =
      *format == DatasetFormat::jsonl ? read_jsonl(in, file) : read_csv(in, file);

  for (const auto& r : records) {
    if (r.text.empty()) {
      raise(ErrorKind::schema, where(file, r.line) + ": record has empty text");
    }
  }
  if (!options.keep_classes.empty()) {
    const std::set<std::string> keep(options.keep_classes.begin(), options.keep_classes.end());
    std::erase_if(records, [&](const RawRecord& r) { return !keep.contains(r.label); });
  }

  Dataset ds;
  ds.name = path.stem().string();
  const bool numeric = std::all_of(records.begin(), records.end(),
                                   [](const RawRecord& r) { return r.label_is_integer; });
  std::set<std::string> names;
  for (const auto& r : records) names.insert(r.label);
  ds.class_names.assign(names.begin(), names.end());
  if (numeric) {
    std::sort(ds.class_names.begin(), ds.class_names.end(),
              [](const std::string& a, const std::string& b) { return std::stoll(a) < std::stoll(b); });
  }
  std::map<std::string, ClassId> id_of;
  for (std::size_t i = 0; i < ds.class_names.size(); ++i) {
    id_of[ds.class_names[i]] = static_cast<ClassId>(i);
  }
  ds.documents.reserve(records.size());
  for (auto& r : records) {
    ds.documents.push_back({where(file, r.line), std::move(r.text), id_of.at(r.label)});
    ds.splits.push_back(r.split);
  }
  return ds;
}

}  // namespace ncdkit
