#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fkcap/cpmap.hpp"

namespace fkcap {

using json = nlohmann::ordered_json;

// On-disk description of a tuple: {"m": ..., "kraus": [...]} or
// {"m": ..., "choi": [[...]]}, entries either bare reals or [re, im].
struct InputDocument {
  int m = 0;
  std::optional<KrausTuple> kraus;
  std::optional<ChoiMatrix> choi;
  std::string label;
};

// Throws ParseError with a field path on malformed documents.
InputDocument parse_input_document(const json& j);
InputDocument load_input_document(const std::string& path);

// The tuple the document denotes (Choi inputs go through kraus_from_choi).
KrausTuple to_kraus(const InputDocument& doc);

// Entry-encoded JSON: bare real when the imaginary part is exactly zero,
// [re, im] otherwise.
json matrix_to_json(const cmat& a);
json kraus_to_json(const KrausTuple& eta, const std::string& label);

// An m x m matrix from a bare JSON array of rows (used for scaling factors).
cmat parse_matrix(const json& j, const std::string& path_for_errors);
cmat load_matrix(const std::string& path);

// CSV with a header row, LF line endings, and %.17g fields.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

std::string format_g17(double v);

}  // namespace fkcap
