#include "bangdrift/io.hpp"
#include "bangdrift/pmp.hpp"
#include "bangdrift/synthesis.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

using namespace bangdrift;

namespace {

std::filesystem::path scratch_dir() {
  const auto dir = std::filesystem::temp_directory_path() /
                   ("bangdrift_io_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()));
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace

TEST(SequenceJson, RoundTrip) {
  const PulseSequence seq(4.0, {{SegmentKind::BangPlus, 0.262641234567},
                                {SegmentKind::Drift, 1.0 / 3.0},
                                {SegmentKind::BangMinus, 1.26124}});
  const Json j = sequence_to_json(seq);
  EXPECT_EQ(j["kappa"], 4.0);
  EXPECT_EQ(j["segments"][0]["kind"], "bang+");
  EXPECT_EQ(j["segments"][1]["kind"], "drift");
  EXPECT_EQ(j["segments"][2]["kind"], "bang-");
  const auto back = sequence_from_json(Json::parse(j.dump()));
  ASSERT_EQ(back.size(), seq.size());
  EXPECT_EQ(back.kappa(), seq.kappa());
  for (std::size_t i = 0; i < seq.size(); ++i) {
    EXPECT_EQ(back.segments()[i].kind, seq.segments()[i].kind);
    EXPECT_EQ(back.segments()[i].duration, seq.segments()[i].duration);
  }
}

TEST(SequenceJson, Errors) {
  EXPECT_THROW(sequence_from_json(Json::parse(R"({"segments": []})")), ParseError);
  EXPECT_THROW(sequence_from_json(Json::parse(R"({"kappa": 4, "segments": [{"kind": "pulse", "duration": 1}]})")),
               ParseError);
  EXPECT_THROW(sequence_from_json(Json::parse(R"({"kappa": 4, "segments": [{"kind": "drift"}]})")), ParseError);
  EXPECT_THROW(sequence_from_json(Json::parse(R"({"kappa": "four", "segments": []})")), ParseError);
}

TEST(SynthesisJson, Fields) {
  const auto r = synthesize(RotationAxisAngle(Vec3::UnitY(), kPi), 1.0);
  const Json j = synthesis_to_json(r);
  EXPECT_EQ(j["pattern"], "bang+,bang-");
  EXPECT_NEAR(j["duration"].get<double>(), r.total_duration, 0.0);
  EXPECT_LE(j["infidelity"].get<double>(), 1e-9);
  EXPECT_EQ(sequence_from_json(j).size(), 2u);
}

TEST(CertificateJson, Fields) {
  const double h = kPi / std::sqrt(2.0);
  const auto cert = find_certificate(PulseSequence(1.0, {{SegmentKind::BangPlus, h}, {SegmentKind::BangMinus, h}}));
  ASSERT_TRUE(cert.has_value());
  const Json j = certificate_to_json(*cert);
  EXPECT_EQ(j["verdict"], "consistent with optimality");
  EXPECT_EQ(j["chart"], "ZYZ");
  EXPECT_EQ(j["switch_times"].size(), 1u);
  EXPECT_EQ(j["phi_samples"].size(), cert->phi_samples.size());
  EXPECT_EQ(j["hp_samples"][0].size(), 2u);
  EXPECT_EQ(j["p_initial"][0].get<double>(), cert->p_initial.p1);
}

TEST(ChiJson, RoundTrip) {
  const auto chi = chi_ideal(RotationAxisAngle(Vec3(1, 2, 3), 0.7));
  const Json j = chi_to_json(chi);
  EXPECT_EQ(j["basis"], Json::parse(R"(["I", "X", "Y", "Z"])"));
  EXPECT_EQ(chi_from_json(Json::parse(j.dump())).matrix(), chi.matrix());
  EXPECT_THROW(chi_from_json(Json::parse(R"({"real": [[1]]})")), ParseError);
}

TEST(FormatNumber, Examples) {
  EXPECT_EQ(format_number(1.0), "1");
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-0.0), "0");
  EXPECT_EQ(format_number(kPi), "3.14159265359");
  EXPECT_EQ(format_number(1e-20), "1e-20");
  EXPECT_EQ(format_number(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(CsvTable, Layout) {
  CsvTable t({"a", "b"});
  t.add_comment("config: {}");
  t.add_row(std::vector<double>{1.5, 2.0});
  t.add_row(std::vector<std::string>{"x", "y"});
  EXPECT_EQ(t.rows(), 2u);
  EXPECT_EQ(t.str(), "# config: {}\na,b\n1.5,2\nx,y\n");
  EXPECT_THROW(t.add_row(std::vector<double>{1.0}), std::invalid_argument);
}

TEST(Files, AtomicWriteAndRead) {
  const auto dir = scratch_dir();
  const auto path = dir / "out.json";
  write_file_atomic(path, "{\"a\": 1}\n");
  EXPECT_EQ(read_file(path), "{\"a\": 1}\n");
  EXPECT_EQ(read_json_file(path)["a"], 1);
  write_file_atomic(path, "{\"a\": 2}\n");
  EXPECT_EQ(read_json_file(path)["a"], 2);
  int entries = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(dir)) ++entries;
  EXPECT_EQ(entries, 1);

  std::ofstream(dir / "bad.json") << "{not json";
  EXPECT_THROW(read_json_file(dir / "bad.json"), ParseError);
  EXPECT_THROW(read_file(dir / "missing.json"), ParseError);
  EXPECT_THROW(write_file_atomic(dir / "no_such_dir" / "x.json", "x"), std::runtime_error);
  std::filesystem::remove_all(dir);
}
