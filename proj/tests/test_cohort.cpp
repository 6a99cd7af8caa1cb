#include <doctest.h>

#include <cstring>
#include <sstream>

#include "bp/error.hpp"
#include "bp/synth.hpp"
#include "support.hpp"

using namespace bp;
using bp::test::patient;

namespace {

const char* kHeader = "patient_id,msi_status,snp_count,cimp_status,cnv_fraction,split\n";

Cohort parse(const std::string& text) {
  std::istringstream in(text);
  return parse_manifest(in, "m.csv");
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST_CASE("two-row manifest maps fields directly") {
  const auto c = parse(std::string(kHeader) +
                       "P1,MSI,1432,CIMP_H,0.001,TRAIN\n"
                       "P2,MSS,50,NON_CIMP,0.2,TEST\n");
  REQUIRE(c.patients().size() == 2);
  const auto& p1 = c.patient(0);
  CHECK(p1.patient_id == "P1");
  CHECK(p1.msi_status == MsiStatus::kMsi);
  CHECK(p1.genomic.snp_count == 1432);
  CHECK(p1.genomic.cimp_status == CimpStatus::kCimpH);
  CHECK(p1.genomic.cnv_fraction == 0.001);
  CHECK(p1.split == Split::kTrain);
  const auto& p2 = c.patient(1);
  CHECK(p2.msi_status == MsiStatus::kMss);
  CHECK(p2.split == Split::kTest);
  CHECK(c.patients_in(Split::kTrain).size() == 1);
  CHECK(c.patients_in(Split::kTest).size() == 1);
}

TEST_CASE("NA cells become missing values") {
  const auto c = parse(std::string(kHeader) + "P1,MSI,NA,NA,NA,TRAIN\n");
  CHECK_FALSE(c.patient(0).genomic.snp_count.has_value());
  CHECK_FALSE(c.patient(0).genomic.cimp_status.has_value());
  CHECK_FALSE(c.patient(0).genomic.cnv_fraction.has_value());
}

TEST_CASE("cnv_fraction outside [0,1] names the row and constraint") {
  const auto msg = error_of([] { parse(std::string(kHeader) + "P1,MSI,10,CIMP_H,1.5,TRAIN\n"); });
  CHECK(msg.find("m.csv:2") != std::string::npos);
  CHECK(msg.find("cnv_fraction") != std::string::npos);
  CHECK(msg.find("[0,1]") != std::string::npos);
  CHECK(msg.find("P1") != std::string::npos);
}

TEST_CASE("manifest rejects malformed input") {
  CHECK_THROWS_AS(parse("patient_id,msi\n"), Error);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "P1,MAYBE,1,CIMP_H,0.1,TRAIN\n"), Error);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "P1,MSI,-3,CIMP_H,0.1,TRAIN\n"), Error);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "P1,MSI,1.5,CIMP_H,0.1,TRAIN\n"), Error);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "P1,MSI,1,CIMP_X,0.1,TRAIN\n"), Error);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "P1,MSI,1,CIMP_H,0.1,VAL\n"), Error);
  CHECK_THROWS_AS(parse(std::string(kHeader) + "P1,MSI,1,CIMP_H,0.1\n"), Error);
  const auto dup = error_of([] {
    parse(std::string(kHeader) + "P1,MSI,1,CIMP_H,0.1,TRAIN\nP1,MSS,1,CIMP_H,0.1,TEST\n");
  });
  CHECK(dup.find("duplicate") != std::string::npos);
}

TEST_CASE("manifest write then parse is the identity") {
  const Cohort c({patient("A", MsiStatus::kMsi, 1432, CimpStatus::kCimpLow, 0.0125),
                  patient("B", MsiStatus::kMss, std::nullopt, std::nullopt, 0.1, Split::kTest),
                  patient("C", MsiStatus::kMss, 7, CimpStatus::kNonCimp, std::nullopt)});
  std::ostringstream out;
  write_manifest(c, out);
  CHECK(parse(out.str()) == c);
}

TEST_CASE("embeddings attach to their patients") {
  const auto c = bp::test::with_patches(
      {patient("P1", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1),
       patient("P2", MsiStatus::kMss, 1, CimpStatus::kCimpH, 0.1, Split::kTest)},
      {3, 2}, 4);
  CHECK(c.patient(0).patches.size() == 3);
  CHECK(c.patient(1).patches.size() == 2);
  CHECK(c.dim() == 4);
  CHECK(c.find_patch("P2_1").has_value());
}

TEST_CASE("embedding CSV with mixed dimensions names the offending patch") {
  std::istringstream in(
      "patch_id,patient_id,f0,f1,f2,f3\n"
      "a,P1,0,0,0,0\n"
      "b,P1,0,0,0,0,0\n");
  const auto msg = error_of([&] { read_embeddings_csv(in, "e.csv"); });
  CHECK(msg.find("dimension mismatch") != std::string::npos);
  CHECK(msg.find("b") != std::string::npos);

  std::vector<PatchEmbedding> mixed{{"x1", "P1", {0, 0, 0, 0}}, {"x2", "P1", {0, 0, 0, 0, 0}}};
  const auto msg2 = error_of([&] {
    Cohort({patient("P1", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1)}, mixed);
  });
  CHECK(msg2.find("x2") != std::string::npos);
}

TEST_CASE("orphan patches and patients without patches are rejected") {
  const std::vector<PatientRecord> ps{patient("P1", MsiStatus::kMsi, 1, CimpStatus::kCimpH, 0.1),
                                      patient("P2", MsiStatus::kMss, 1, CimpStatus::kCimpH, 0.1)};
  const auto orphan = error_of([&] {
    Cohort(ps, {{"a", "P1", {1.0f}}, {"b", "P2", {1.0f}}, {"c", "P9", {1.0f}}});
  });
  CHECK(orphan.find("orphan") != std::string::npos);
  const auto empty = error_of([&] { Cohort(ps, {{"a", "P1", {1.0f}}}); });
  CHECK(empty.find("P2") != std::string::npos);
  CHECK_THROWS(Cohort(ps, {{"a", "P1", {1.0f}}, {"a", "P2", {1.0f}}}));
  CHECK_THROWS(Cohort(ps, {{"a", "P1", {NAN}}, {"b", "P2", {1.0f}}}));
}

TEST_CASE("packed and CSV embeddings round-trip bit-exactly") {
  bp::test::TempDir dir;
  std::vector<PatchEmbedding> es{
      {"p/1.png", "P1", {0.1f, -0.0f, 1e-38f, 3.4e38f}},
      {"p/2.png", "P1", {1.0f / 3.0f, -2.5f, 7e-45f, 0.0f}},
      {"q/1.png", "P2", {123456.789f, -1e-7f, 2.0f, -3.0f}}};
  for (auto fmt : {EmbeddingFormat::kPacked, EmbeddingFormat::kCsv}) {
    const auto path = dir / (fmt == EmbeddingFormat::kPacked ? "e.bpem" : "e.csv");
    write_embeddings(es, path, fmt);
    const auto back = read_embeddings(path);
    REQUIRE(back.size() == es.size());
    for (std::size_t i = 0; i < es.size(); ++i) {
      CHECK(back[i].patch_id == es[i].patch_id);
      CHECK(back[i].patient_id == es[i].patient_id);
      CHECK(std::memcmp(back[i].vector.data(), es[i].vector.data(), 16) == 0);
    }
  }
}

TEST_CASE("packed reader rejects corrupt files") {
  std::vector<PatchEmbedding> es{{"a", "P1", {1.0f, 2.0f}}};
  std::ostringstream out(std::ios::binary);
  write_embeddings_packed(es, out);
  const auto bytes = out.str();
  {
    std::istringstream in(bytes.substr(0, bytes.size() - 1), std::ios::binary);
    CHECK_THROWS_AS(read_embeddings_packed(in, "t"), Error);
  }
  {
    std::istringstream in(bytes + "x", std::ios::binary);
    CHECK_THROWS_AS(read_embeddings_packed(in, "t"), Error);
  }
  {
    std::string bad = bytes;
    bad[0] = 'X';
    std::istringstream in(bad, std::ios::binary);
    CHECK_THROWS_AS(read_embeddings_packed(in, "t"), Error);
  }
}

TEST_CASE("single-patient summary has degenerate digests") {
  const auto c = bp::test::with_patches(
      {patient("P1", MsiStatus::kMsi, 1432, CimpStatus::kCimpH, 0.001)}, {5}, 3);
  const auto s = cohort_summary(c);
  CHECK(s.at(Split::kTrain, MsiStatus::kMsi) == GroupCounts{1, 5});
  CHECK(s.at(Split::kTest, MsiStatus::kMss) == GroupCounts{0, 0});
  CHECK(s.total_patients == 1);
  CHECK(s.total_patches == 5);
  REQUIRE(s.snp.has_value());
  CHECK(*s.snp == FiveNumber{1432, 1432, 1432, 1432, 1432});
  REQUIRE(s.cnv.has_value());
  CHECK(*s.cnv == FiveNumber{0.001, 0.001, 0.001, 0.001, 0.001});
  CHECK(s.cimp_proportions == std::array<double, 4>{1.0, 0.0, 0.0, 0.0});
  CHECK_FALSE(format_summary(s).empty());
}

TEST_CASE("summary of the published layout reproduces the cohort counts") {
  const auto c = generate(published_layout_config());
  const auto s = cohort_summary(c);
  CHECK(s.at(Split::kTrain, MsiStatus::kMsi) == GroupCounts{39, 46704});
  CHECK(s.at(Split::kTrain, MsiStatus::kMss) == GroupCounts{221, 46704});
  CHECK(s.at(Split::kTest, MsiStatus::kMsi) == GroupCounts{26, 28335});
  CHECK(s.at(Split::kTest, MsiStatus::kMss) == GroupCounts{74, 70569});
  CHECK(s.total_patients == 360);
}

TEST_CASE("summary counts equal a recount of generated records") {
  GeneratorConfig g;
  g.seed = 11;
  const auto c = generate(g);
  const auto s = cohort_summary(c);
  std::array<std::array<GroupCounts, 2>, 2> oracle{};
  for (const auto& e : c.embeddings()) {
    const auto& p = c.patient(*c.find_patient(e.patient_id));
    oracle[static_cast<int>(p.split)][static_cast<int>(p.msi_status)].patches++;
  }
  for (const auto& p : c.patients()) oracle[static_cast<int>(p.split)][static_cast<int>(p.msi_status)].patients++;
  CHECK(s.counts == oracle);
  CHECK(s.at(Split::kTrain, MsiStatus::kMsi).patients == static_cast<std::size_t>(g.n_train_msi));
  CHECK(s.at(Split::kTrain, MsiStatus::kMss).patients == static_cast<std::size_t>(g.n_train_mss));
  CHECK(s.at(Split::kTest, MsiStatus::kMsi).patients == static_cast<std::size_t>(g.n_test_msi));
  CHECK(s.at(Split::kTest, MsiStatus::kMss).patients == static_cast<std::size_t>(g.n_test_mss));
}

TEST_CASE("load after write reproduces the cohort") {
  bp::test::TempDir dir;
  GeneratorConfig g;
  g.seed = 3;
  g.n_train_mss = 20;
  g.n_train_msi = 10;
  g.n_test_msi = 4;
  g.n_test_mss = 6;
  const auto c = generate(g);
  write_manifest(c, dir / "m.csv");
  write_embeddings(c.embeddings(), dir / "e.bpem", EmbeddingFormat::kPacked);
  CHECK(attach_embeddings(load_manifest(dir / "m.csv"), dir / "e.bpem") == c);
  write_embeddings(c.embeddings(), dir / "e.csv", EmbeddingFormat::kCsv);
  CHECK(attach_embeddings(load_manifest(dir / "m.csv"), dir / "e.csv") == c);
}
