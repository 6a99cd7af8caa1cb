#include <doctest.h>

#include <cstring>
#include <sstream>

#include "bp/cohort.hpp"
#include "bp/labeling.hpp"
#include "bp/util.hpp"
#include "support.hpp"

using namespace bp;

namespace {

const std::filesystem::path kVectors = std::filesystem::path(BP_TEST_DATA_DIR) / "vectors";

float expected_value(int row, int j) {
  return static_cast<float>(((row * 512 + j) * 37 % 97) / 8.0 - 6.0);
}

}  // namespace

TEST_CASE("packed conformance vector decodes to the expected records") {
  const auto es = read_embeddings(kVectors / "conformance.bpem");
  REQUIRE(es.size() == 6);
  for (int r = 0; r < 6; ++r) {
    const std::string patient = r < 3 ? "P1" : "P2";
    CHECK(es[r].patient_id == patient);
    CHECK(es[r].patch_id == patient + "/img_" + std::to_string(r % 3) + ".png");
    REQUIRE(es[r].vector.size() == 512);
    for (int j = 0; j < 512; ++j) CHECK(es[r].vector[j] == expected_value(r, j));
  }
}

TEST_CASE("writers reproduce the conformance bytes") {
  const auto es = read_embeddings(kVectors / "conformance.bpem");
  std::ostringstream packed(std::ios::binary), csv;
  write_embeddings_packed(es, packed);
  write_embeddings_csv(es, csv);
  CHECK(packed.str() == read_file(kVectors / "conformance.bpem"));
  CHECK(csv.str() == read_file(kVectors / "conformance.csv"));
}

TEST_CASE("CSV and packed vectors hold the same records") {
  CHECK(read_embeddings(kVectors / "conformance.csv") == read_embeddings(kVectors / "conformance.bpem"));
}

TEST_CASE("skeleton manifest plus packed vector validates as a cohort") {
  const auto c = attach_embeddings(load_manifest(kVectors / "manifest_skeleton.csv"),
                                   kVectors / "conformance.bpem");
  CHECK(c.patients().size() == 2);
  CHECK(c.embeddings().size() == 6);
  CHECK(c.dim() == 512);
  CHECK(c.patient(0).patches.size() == 3);
  CHECK_FALSE(c.patient(0).genomic.snp_count.has_value());
  const auto shared = std::make_shared<const Cohort>(c);
  CHECK(class_counts(relabel(shared, LabelingSpec::baseline()), Split::kTrain)[1] == ClassCount{1, 3});
}

TEST_CASE("digests of the vectors are stable") {
  CHECK(sha256_file(kVectors / "conformance.bpem") == sha256_hex(read_file(kVectors / "conformance.bpem")));
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_CASE("base64 doubles round-trip") {
  const std::vector<double> xs{0.0, -0.0, 1.0 / 3, 1e-310, -1e300, 42};
  const auto back = decode_doubles(encode_doubles(xs));
  REQUIRE(back.size() == xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(std::memcmp(&back[i], &xs[i], sizeof(double)) == 0);
  CHECK(base64_encode(std::vector<std::uint8_t>{'f', 'o', 'o', 'b'}) == "Zm9vYg==");
  CHECK(format_double(0.1) == "0.1");
}
