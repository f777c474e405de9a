#include "fkcap/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace fkcap {

namespace {

cd parse_entry(const json& e, const std::string& path) {
  if (e.is_number()) return cd(e.get<double>(), 0.0);
  if (e.is_array()) {
    if (e.size() != 2 || !e[0].is_number() || !e[1].is_number())
      throw ParseError(path + ": complex entries are [re, im] number pairs");
    return cd(e[0].get<double>(), e[1].get<double>());
  }
  throw ParseError(path + ": entry must be a number or an [re, im] pair");
}

// rows/cols of -1 accept whatever rectangle the document provides.
cmat parse_matrix_impl(const json& j, const std::string& path, int rows, int cols) {
  if (!j.is_array() || j.empty())
    throw ParseError(path + ": matrix must be a nonempty array of rows");
  const int r = static_cast<int>(j.size());
  if (rows >= 0 && r != rows)
    throw ParseError(path + ": expected " + std::to_string(rows) + " rows, got " +
                     std::to_string(r));
  if (!j[0].is_array() || j[0].empty())
    throw ParseError(path + "[0]: row must be a nonempty array");
  const int c = static_cast<int>(j[0].size());
  if (cols >= 0 && c != cols)
    throw ParseError(path + ": expected " + std::to_string(cols) + " columns, got " +
                     std::to_string(c));
  cmat a(r, c);
  for (int i = 0; i < r; ++i) {
    const std::string rp = path + "[" + std::to_string(i) + "]";
    const json& row = j[i];
    if (!row.is_array()) throw ParseError(rp + ": row must be an array");
    if (static_cast<int>(row.size()) != c)
      throw ParseError(rp + ": expected " + std::to_string(c) + " entries, got " +
                       std::to_string(row.size()));
    for (int k = 0; k < c; ++k)
      a(i, k) = parse_entry(row[k], rp + "[" + std::to_string(k) + "]");
  }
  return a;
}

}  // namespace

InputDocument parse_input_document(const json& j) {
  if (!j.is_object()) throw ParseError("document: expected a JSON object");
  if (!j.contains("m")) throw ParseError("m: required field is missing");
  if (!j["m"].is_number_integer() || j["m"].get<long>() < 1)
    throw ParseError("m: must be a positive integer");

  InputDocument doc;
  doc.m = j["m"].get<int>();

  const bool has_kraus = j.contains("kraus");
  const bool has_choi = j.contains("choi");
  if (has_kraus == has_choi)
    throw ParseError("document: exactly one of \"kraus\" and \"choi\" is required");

  if (has_kraus) {
    const json& arr = j["kraus"];
    if (!arr.is_array() || arr.empty())
      throw ParseError("kraus: must be a nonempty array of matrices");
    std::vector<cmat> ops;
    ops.reserve(arr.size());
    for (size_t i = 0; i < arr.size(); ++i)
      ops.push_back(
          parse_matrix_impl(arr[i], "kraus[" + std::to_string(i) + "]", doc.m, doc.m));
    doc.kraus.emplace(std::move(ops));
  } else {
    ChoiMatrix c;
    c.m = doc.m;
    c.mat = parse_matrix_impl(j["choi"], "choi", doc.m * doc.m, doc.m * doc.m);
    doc.choi = std::move(c);
  }

  if (j.contains("label")) {
    if (!j["label"].is_string()) throw ParseError("label: must be a string");
    doc.label = j["label"].get<std::string>();
  }
  return doc;
}

InputDocument load_input_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_input_document(j);
}

KrausTuple to_kraus(const InputDocument& doc) {
  if (doc.kraus) return *doc.kraus;
  return kraus_from_choi(*doc.choi);
}

json matrix_to_json(const cmat& a) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index k = 0; k < a.cols(); ++k) {
      cd v = a(i, k);
      if (v.imag() == 0.0)
        row.push_back(v.real());
      else
        row.push_back(json::array({v.real(), v.imag()}));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

json kraus_to_json(const KrausTuple& eta, const std::string& label) {
  json doc;
  doc["m"] = eta.dim();
  json arr = json::array();
  for (int i = 0; i < eta.terms(); ++i) arr.push_back(matrix_to_json(eta.op(i)));
  doc["kraus"] = std::move(arr);
  if (!label.empty()) doc["label"] = label;
  return doc;
}

cmat parse_matrix(const json& j, const std::string& path_for_errors) {
  return parse_matrix_impl(j, path_for_errors, -1, -1);
}

cmat load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path + ": cannot open file");
  json j;
  try {
    j = json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  return parse_matrix(j, path);
}

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream out(path, std::ios::binary);  // binary keeps LF endings everywhere
  if (!out) throw DomainError("write_csv: cannot open " + path);
  for (size_t i = 0; i < header.size(); ++i) {
    if (i) out << ',';
    out << header[i];
  }
  out << '\n';
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_g17(row[i]);
    }
    out << '\n';
  }
}

}  // namespace fkcap
