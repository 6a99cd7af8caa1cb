// SPDX-License-Identifier: Apache-2.0
//
// Patients, patient-level genomic profiles, patch embeddings and the
// train/test split, plus the manifest and embedding file formats.
//
// Manifest CSV header (exact):
//   patient_id,msi_status,snp_count,cimp_status,cnv_fraction,split
// Embedding CSV header:
//   patch_id,patient_id,f0,...,f{d-1}
// Packed embeddings: "BPEM", u32 version=1, u32 dim, u64 count, then per
// record u16-prefixed patch_id, u16-prefixed patient_id, dim f32. All
// little-endian, no padding.
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "bp/stats.hpp"

namespace bp {

enum class MsiStatus { kMss, kMsi };
enum class CimpStatus { kCimpH, kCimpLow, kNonCimp };
enum class Split { kTrain, kTest };

std::string_view to_string(MsiStatus s);
std::string_view to_string(CimpStatus s);
std::string_view to_string(Split s);
std::optional<MsiStatus> parse_msi_status(std::string_view token);
std::optional<CimpStatus> parse_cimp_status(std::string_view token);
std::optional<Split> parse_split(std::string_view token);

/// Patient-level genomics. std::nullopt is the manifest's `NA`.
struct GenomicProfile {
  std::optional<std::int64_t> snp_count;
  std::optional<CimpStatus> cimp_status;
  std::optional<double> cnv_fraction;

  bool operator==(const GenomicProfile&) const = default;
};

struct PatientRecord {
  std::string patient_id;
  MsiStatus msi_status = MsiStatus::kMss;
  GenomicProfile genomic;
  Split split = Split::kTrain;
  /// Indices into Cohort::embeddings(), in file order. Empty until
  /// embeddings are attached.
  std::vector<std::size_t> patches;

  bool operator==(const PatientRecord&) const = default;
};

struct PatchEmbedding {
  std::string patch_id;
  std::string patient_id;
  std::vector<float> vector;

  bool operator==(const PatchEmbedding&) const = default;
};

using PatientIndex = std::size_t;

/// Immutable after construction.
class Cohort {
 public:
  Cohort() = default;

  /// Validates patient invariants: unique ids, field ranges.
  explicit Cohort(std::vector<PatientRecord> patients);

  /// Validates referential integrity and fills PatientRecord::patches.
  Cohort(std::vector<PatientRecord> patients, std::vector<PatchEmbedding> embeddings);

  const std::vector<PatientRecord>& patients() const noexcept { return patients_; }
  const PatientRecord& patient(PatientIndex i) const { return patients_.at(i); }
  std::optional<PatientIndex> find_patient(std::string_view id) const;

  const std::vector<PatchEmbedding>& embeddings() const noexcept { return embeddings_; }
  std::optional<std::size_t> find_patch(std::string_view patch_id) const;

  bool has_embeddings() const noexcept { return !embeddings_.empty(); }
  std::size_t dim() const noexcept { return dim_; }

  std::vector<PatientIndex> patients_in(Split split) const;

  bool operator==(const Cohort& other) const {
    return patients_ == other.patients_ && embeddings_ == other.embeddings_;
  }

 private:
  std::vector<PatientRecord> patients_;
  std::vector<PatchEmbedding> embeddings_;
  std::unordered_map<std::string, PatientIndex> patient_index_;
  std::unordered_map<std::string, std::size_t> patch_index_;
  std::size_t dim_ = 0;
};

/// Parses a manifest. Errors carry the line and column of the bad cell.
Cohort load_manifest(const std::filesystem::path& path);
Cohort parse_manifest(std::istream& in, const std::string& source_name = "<manifest>");
void write_manifest(const Cohort& cohort, const std::filesystem::path& path);
void write_manifest(const Cohort& cohort, std::ostream& out);

enum class EmbeddingFormat { kCsv, kPacked };

/// Reads the embedding file (format sniffed from the magic bytes) and
/// returns a new cohort with patches attached.
Cohort attach_embeddings(const Cohort& cohort, const std::filesystem::path& path);
std::vector<PatchEmbedding> read_embeddings(const std::filesystem::path& path);
std::vector<PatchEmbedding> read_embeddings_csv(std::istream& in, const std::string& source_name);
std::vector<PatchEmbedding> read_embeddings_packed(std::istream& in, const std::string& source_name);

void write_embeddings(std::span<const PatchEmbedding> embeddings,
                      const std::filesystem::path& path, EmbeddingFormat format);
void write_embeddings_csv(std::span<const PatchEmbedding> embeddings, std::ostream& out);
void write_embeddings_packed(std::span<const PatchEmbedding> embeddings, std::ostream& out);

struct GroupCounts {
  std::size_t patients = 0;
  std::size_t patches = 0;
  bool operator==(const GroupCounts&) const = default;
};

struct CohortSummary {
  // [split][msi_status]
  std::array<std::array<GroupCounts, 2>, 2> counts{};
  std::size_t total_patients = 0;
  std::size_t total_patches = 0;
  std::size_t dim = 0;
  std::optional<FiveNumber> snp;  // over patients with a known value
  std::size_t snp_missing = 0;
  // Proportions of CIMP_H, CIMP_LOW, NON_CIMP, NA over all patients.
  std::array<double, 4> cimp_proportions{};
  std::optional<FiveNumber> cnv;
  std::size_t cnv_missing = 0;

  const GroupCounts& at(Split s, MsiStatus m) const {
    return counts[static_cast<int>(s)][static_cast<int>(m)];
  }
};

CohortSummary cohort_summary(const Cohort& cohort);
std::string format_summary(const CohortSummary& summary);

}  // namespace bp
