#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ncdkit/document.hpp"

namespace ncdkit {

enum class DatasetFormat { jsonl, csv };

enum class Split { unspecified, train, test };

struct Dataset {
  std::string name;
  std::vector<Document> documents;
  // Parallel to `documents`.
  std::vector<Split> splits;
  // Class id -> label as written in the file.
  std::vector<std::string> class_names;

  bool has_test_split() const;
  std::optional<ClassId> class_id(std::string_view name) const;
};

struct LoadOptions {
  // Inferred from the extension (.jsonl / .csv) when unset.
  std::optional<DatasetFormat> format;
  // Keep only records whose label is listed; empty keeps everything.
  std::vector<std::string> keep_classes;
};

// JSONL records carry "text" and "label" (string or integer) and an optional
// "split" ("train" / "test"). CSV files need a header with text and label
// columns (split optional). Document ids are "<filename>:<line>" after the
// line the record starts on. Class ids follow the sorted label names
// (numerically when every label is an integer).
//
// Throws Error(io) when the file cannot be read, Error(parse) for a
// malformed record, Error(schema) for an empty text, a missing field or a
// label that is neither string nor integer; every message names the line.
Dataset load_dataset(const std::filesystem::path& path, const LoadOptions& options = {});

std::optional<DatasetFormat> format_from_extension(const std::filesystem::path& path);

// Named class filters: "20news" -> {"alt.atheism", "comp.graphics"}.
std::optional<std::vector<std::string>> preset_classes(std::string_view preset);

}  // namespace ncdkit
