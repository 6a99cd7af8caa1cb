// Shared fixtures for the unit tests.
#pragma once

#include <unistd.h>

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bp/cohort.hpp"
#include "bp/rng.hpp"

namespace bp::test {

inline PatientRecord patient(std::string id, MsiStatus msi, std::optional<std::int64_t> snp,
                             std::optional<CimpStatus> cimp, std::optional<double> cnv,
                             Split split = Split::kTrain) {
  PatientRecord p;
  p.patient_id = std::move(id);
  p.msi_status = msi;
  p.genomic = {snp, cimp, cnv};
  p.split = split;
  return p;
}

/// Attaches `n_patches[i]` random dim-`dim` patches to patient i.
inline Cohort with_patches(std::vector<PatientRecord> patients,
                           const std::vector<int>& n_patches, std::size_t dim,
                           std::uint64_t seed = 1) {
  Rng rng(seed);
  std::vector<PatchEmbedding> patches;
  for (std::size_t i = 0; i < patients.size(); ++i) {
    for (int j = 0; j < n_patches.at(i); ++j) {
      PatchEmbedding e;
      e.patch_id = patients[i].patient_id + "_" + std::to_string(j);
      e.patient_id = patients[i].patient_id;
      for (std::size_t d = 0; d < dim; ++d) e.vector.push_back(static_cast<float>(rng.normal()));
      patches.push_back(std::move(e));
    }
  }
  return Cohort(std::move(patients), std::move(patches));
}

/// Random patient table with every genomic field present.
inline std::vector<PatientRecord> random_patients(Rng& rng, int n) {
  std::vector<PatientRecord> out;
  for (int i = 0; i < n; ++i) {
    const auto msi = rng.bernoulli(0.4) ? MsiStatus::kMsi : MsiStatus::kMss;
    const auto cimp = static_cast<CimpStatus>(rng.below(3));
    const auto snp = static_cast<std::int64_t>(rng.below(3000));
    const double cnv = rng.uniform() * 0.02;
    const auto split = rng.bernoulli(0.7) ? Split::kTrain : Split::kTest;
    out.push_back(patient("R" + std::to_string(i), msi, snp, cimp, cnv, split));
  }
  return out;
}

class TempDir {
 public:
  TempDir() {
    static std::atomic<int> counter{0};
    path_ = std::filesystem::temp_directory_path() /
            ("bp_test_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace bp::test
