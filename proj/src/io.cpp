#include "bangdrift/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>

namespace bangdrift {

Json sequence_to_json(const PulseSequence& seq) {
  Json segs = Json::array();
  for (const auto& s : seq.segments()) {
    segs.push_back({{"kind", std::string(to_string(s.kind))}, {"duration", s.duration}});
  }
  return {{"kappa", seq.kappa()}, {"segments", segs}};
}

PulseSequence sequence_from_json(const Json& j) {
  try {
    if (!j.is_object() || !j.contains("kappa") || !j.contains("segments")) {
      throw ParseError("sequence JSON needs 'kappa' and 'segments'");
    }
    std::vector<PulseSegment> segs;
    for (const auto& s : j.at("segments")) {
      segs.push_back({segment_kind_from_string(s.at("kind").get<std::string>()), s.at("duration").get<double>()});
    }
    return PulseSequence(j.at("kappa").get<double>(), std::move(segs));
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid sequence JSON: ") + e.what());
  }
}

Json synthesis_to_json(const SynthesisResult& result) {
  Json j = sequence_to_json(result.sequence);
  j["pattern"] = result.pattern.to_string();
  j["infidelity"] = result.infidelity;
  j["duration"] = result.total_duration;
  return j;
}

Json certificate_to_json(const CostateCertificate& cert) {
  auto timed = [](const std::vector<TimedValue>& v) {
    Json a = Json::array();
    for (const auto& s : v) a.push_back({s.t, s.value});
    return a;
  };
  Json j;
  j["verdict"] = std::string(CostateCertificate::kVerdict);
  j["chart"] = cert.chart == EulerChart::ZYZ ? "ZYZ" : "ZXZ";
  j["p0"] = cert.p0;
  j["p_initial"] = {cert.p_initial.p1, cert.p_initial.p2, cert.p_initial.p3};
  j["m_initial"] = {cert.m_initial(0), cert.m_initial(1), cert.m_initial(2)};
  j["switch_times"] = cert.switch_times;
  j["switch_residuals"] = cert.switch_residuals;
  j["nullspace_dimension"] = cert.nullspace_dimension;
  j["min_sign_margin"] = cert.min_sign_margin;
  j["max_drift_phi"] = cert.max_drift_phi;
  j["max_abs_hp"] = cert.max_abs_hp;
  j["phi_samples"] = timed(cert.phi_samples);
  j["hp_samples"] = timed(cert.hp_samples);
  return j;
}

Json chi_to_json(const ChiMatrix& chi) {
  Json re = Json::array();
  Json im = Json::array();
  for (int r = 0; r < 4; ++r) {
    Json rr = Json::array();
    Json ri = Json::array();
    for (int c = 0; c < 4; ++c) {
      rr.push_back(chi(r, c).real());
      ri.push_back(chi(r, c).imag());
    }
    re.push_back(rr);
    im.push_back(ri);
  }
  return {{"basis", {"I", "X", "Y", "Z"}}, {"real", re}, {"imag", im}};
}

ChiMatrix chi_from_json(const Json& j) {
  try {
    Mat4 m;
    for (int r = 0; r < 4; ++r) {
      for (int c = 0; c < 4; ++c) {
        m(r, c) = Complex(j.at("real").at(r).at(c).get<double>(), j.at("imag").at(r).at(c).get<double>());
      }
    }
    return ChiMatrix(m);
  } catch (const std::exception& e) {
    throw ParseError(std::string("invalid chi JSON: ") + e.what());
  }
}

std::string format_number(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (std::isnan(x)) return "nan";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x == 0.0 ? 0.0 : x);
  return buf;
}

void CsvTable::add_row(const std::vector<std::string>& cells) {
  if (cells.size() != columns_.size()) throw std::invalid_argument("CsvTable: row width mismatch");
  rows_.push_back(cells);
}

void CsvTable::add_row(const std::vector<double>& values) {
  std::vector<std::string> cells;
  cells.reserve(values.size());
  for (double v : values) cells.push_back(format_number(v));
  add_row(cells);
}

std::string CsvTable::str() const {
  std::ostringstream os;
  for (const auto& c : comments_) os << "# " << c << '\n';
  for (std::size_t i = 0; i < columns_.size(); ++i) os << (i ? "," : "") << columns_[i];
  os << '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << row[i];
    os << '\n';
  }
  return os.str();
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp.string() + " for writing");
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error("failed writing " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw std::runtime_error("cannot move output into place at " + path.string());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot read " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Json read_json_file(const std::filesystem::path& path) {
  try {
    return Json::parse(read_file(path));
  } catch (const Json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace bangdrift
