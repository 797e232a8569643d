#pragma once

// Serialization of sequences, certificates and chi matrices, plus CSV and
// atomic file output for the command-line front end.

#include "bangdrift/pmp.hpp"
#include "bangdrift/su2.hpp"
#include "bangdrift/synthesis.hpp"
#include "bangdrift/tomography.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace bangdrift {

using Json = nlohmann::ordered_json;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// {kappa, segments: [{kind: "bang+|bang-|drift", duration}]}
Json sequence_to_json(const PulseSequence& seq);
// Throws ParseError on schema violations.
PulseSequence sequence_from_json(const Json& j);

Json synthesis_to_json(const SynthesisResult& result);
Json certificate_to_json(const CostateCertificate& cert);
// {basis: [...], real: 4x4, imag: 4x4}
Json chi_to_json(const ChiMatrix& chi);
ChiMatrix chi_from_json(const Json& j);

// 12 significant digits, shortest form.
std::string format_number(double x);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  // Leading "# key: value" lines.
  void add_comment(const std::string& line) { comments_.push_back(line); }
  void add_row(const std::vector<std::string>& cells);
  void add_row(const std::vector<double>& values);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> columns_;
  std::vector<std::string> comments_;
  std::vector<std::vector<std::string>> rows_;
};

// Writes to a sibling temporary file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);
// Throws ParseError if the file cannot be read.
std::string read_file(const std::filesystem::path& path);
Json read_json_file(const std::filesystem::path& path);

}  // namespace bangdrift
