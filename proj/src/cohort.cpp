// SPDX-License-Identifier: Apache-2.0
#include "bp/cohort.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "bp/error.hpp"
#include "bp/util.hpp"

namespace bp {

std::string_view to_string(MsiStatus s) { return s == MsiStatus::kMsi ? "MSI" : "MSS"; }

std::string_view to_string(CimpStatus s) {
  switch (s) {
    case CimpStatus::kCimpH: return "CIMP_H";
    case CimpStatus::kCimpLow: return "CIMP_LOW";
    case CimpStatus::kNonCimp: return "NON_CIMP";
  }
  return "?";
}

std::string_view to_string(Split s) { return s == Split::kTrain ? "TRAIN" : "TEST"; }

std::optional<MsiStatus> parse_msi_status(std::string_view t) {
  if (t == "MSI") return MsiStatus::kMsi;
  if (t == "MSS") return MsiStatus::kMss;
  return std::nullopt;
}

std::optional<CimpStatus> parse_cimp_status(std::string_view t) {
  if (t == "CIMP_H") return CimpStatus::kCimpH;
  if (t == "CIMP_LOW") return CimpStatus::kCimpLow;
  if (t == "NON_CIMP") return CimpStatus::kNonCimp;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view t) {
  if (t == "TRAIN") return Split::kTrain;
  if (t == "TEST") return Split::kTest;
  return std::nullopt;
}

namespace {

constexpr std::string_view kManifestHeader =
    "patient_id,msi_status,snp_count,cimp_status,cnv_fraction,split";
constexpr char kMagic[4] = {'B', 'P', 'E', 'M'};
constexpr std::uint32_t kPackedVersion = 1;

std::string strip_line(std::string line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return line;
}

void strip_bom(std::string& line) {
  if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF &&
      static_cast<unsigned char>(line[1]) == 0xBB && static_cast<unsigned char>(line[2]) == 0xBF) {
    line.erase(0, 3);
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (s.empty()) return false;
  const char* first = s.data();
  if constexpr (std::is_floating_point_v<T>) {
    if (*first == '+') ++first;
  }
  const auto res = std::from_chars(first, s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

void validate_patient(const PatientRecord& p, const std::string& where) {
  if (p.patient_id.empty()) throw data_error(where + ": empty patient_id");
  if (p.genomic.snp_count && *p.genomic.snp_count < 0) {
    throw data_error(where + ": snp_count must be >= 0 for patient " + p.patient_id);
  }
  if (p.genomic.cnv_fraction) {
    const double c = *p.genomic.cnv_fraction;
    if (!std::isfinite(c) || c < 0.0 || c > 1.0) {
      throw data_error(where + ": cnv_fraction must lie in [0,1] for patient " + p.patient_id);
    }
  }
}

}  // namespace

Cohort::Cohort(std::vector<PatientRecord> patients) : patients_(std::move(patients)) {
  for (std::size_t i = 0; i < patients_.size(); ++i) {
    validate_patient(patients_[i], "patient " + std::to_string(i));
    if (!patient_index_.emplace(patients_[i].patient_id, i).second) {
      throw data_error("duplicate patient_id " + patients_[i].patient_id);
    }
  }
}

Cohort::Cohort(std::vector<PatientRecord> patients, std::vector<PatchEmbedding> embeddings)
    : Cohort(std::move(patients)) {
  embeddings_ = std::move(embeddings);
  for (auto& p : patients_) p.patches.clear();
  for (std::size_t i = 0; i < embeddings_.size(); ++i) {
    const auto& e = embeddings_[i];
    if (i == 0) {
      dim_ = e.vector.size();
      if (dim_ == 0) throw data_error("embedding " + e.patch_id + " has dimension 0");
    } else if (e.vector.size() != dim_) {
      throw data_error("dimension mismatch: patch " + e.patch_id + " has " +
                       std::to_string(e.vector.size()) + " features, expected " +
                       std::to_string(dim_));
    }
    for (float v : e.vector) {
      if (!std::isfinite(v)) throw data_error("non-finite entry in patch " + e.patch_id);
    }
    const auto owner = patient_index_.find(e.patient_id);
    if (owner == patient_index_.end()) {
      throw data_error("orphan patch " + e.patch_id + ": patient " + e.patient_id +
                       " is not in the manifest");
    }
    if (!patch_index_.emplace(e.patch_id, i).second) {
      throw data_error("duplicate patch_id " + e.patch_id);
    }
    patients_[owner->second].patches.push_back(i);
  }
  for (const auto& p : patients_) {
    if (p.patches.empty()) throw data_error("patient " + p.patient_id + " has no patches");
  }
}

std::optional<PatientIndex> Cohort::find_patient(std::string_view id) const {
  const auto it = patient_index_.find(std::string(id));
  if (it == patient_index_.end()) return std::nullopt;
  return it->second;
}

std::optional<std::size_t> Cohort::find_patch(std::string_view patch_id) const {
  const auto it = patch_index_.find(std::string(patch_id));
  if (it == patch_index_.end()) return std::nullopt;
  return it->second;
}

std::vector<PatientIndex> Cohort::patients_in(Split split) const {
  std::vector<PatientIndex> out;
  for (std::size_t i = 0; i < patients_.size(); ++i) {
    if (patients_[i].split == split) out.push_back(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Manifest

Cohort parse_manifest(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw data_error(source + ": empty manifest");
  strip_bom(line);
  line = strip_line(line);
  if (line != kManifestHeader) {
    throw data_error(source + ":1: header must be exactly '" + std::string(kManifestHeader) + "'");
  }
  static constexpr const char* kColumns[] = {"patient_id", "msi_status", "snp_count",
                                             "cimp_status", "cnv_fraction", "split"};
  std::vector<PatientRecord> patients;
  std::unordered_map<std::string, std::size_t> seen;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_line(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    const auto where = [&](int col) {
      return source + ":" + std::to_string(line_no) + ": column " + std::to_string(col + 1) +
             " (" + kColumns[col] + ")";
    };
    if (cells.size() != 6) {
      throw data_error(source + ":" + std::to_string(line_no) + ": expected 6 columns, found " +
                       std::to_string(cells.size()));
    }
    PatientRecord p;
    p.patient_id = std::string(cells[0]);
    if (p.patient_id.empty()) throw data_error(where(0) + ": empty patient_id");
    if (auto s = parse_msi_status(cells[1])) {
      p.msi_status = *s;
    } else {
      throw data_error(where(1) + ": unknown token '" + std::string(cells[1]) + "'");
    }
    if (cells[2] != "NA") {
      std::int64_t v = 0;
      if (!parse_number(cells[2], v)) {
        throw data_error(where(2) + ": expected an integer or NA, got '" + std::string(cells[2]) +
                         "'");
      }
      if (v < 0) throw data_error(where(2) + ": snp_count must be >= 0");
      p.genomic.snp_count = v;
    }
    if (cells[3] != "NA") {
      if (auto c = parse_cimp_status(cells[3])) {
        p.genomic.cimp_status = *c;
      } else {
        throw data_error(where(3) + ": unknown token '" + std::string(cells[3]) + "'");
      }
    }
    if (cells[4] != "NA") {
      double v = 0;
      if (!parse_number(cells[4], v) || !std::isfinite(v)) {
        throw data_error(where(4) + ": expected a decimal or NA, got '" + std::string(cells[4]) +
                         "'");
      }
      if (v < 0.0 || v > 1.0) {
        throw data_error(where(4) + ": cnv_fraction " + std::string(cells[4]) +
                         " outside [0,1] for patient " + p.patient_id);
      }
      p.genomic.cnv_fraction = v;
    }
    if (auto s = parse_split(cells[5])) {
      p.split = *s;
    } else {
      throw data_error(where(5) + ": unknown token '" + std::string(cells[5]) + "'");
    }
    if (!seen.emplace(p.patient_id, line_no).second) {
      throw data_error(where(0) + ": duplicate patient_id " + p.patient_id + " (first on line " +
                       std::to_string(seen[p.patient_id]) + ")");
    }
    patients.push_back(std::move(p));
  }
  return Cohort(std::move(patients));
}

Cohort load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open manifest " + path.string());
  return parse_manifest(in, path.string());
}

void write_manifest(const Cohort& cohort, std::ostream& out) {
  out << kManifestHeader << '\n';
  for (const auto& p : cohort.patients()) {
    out << p.patient_id << ',' << to_string(p.msi_status) << ',';
    if (p.genomic.snp_count) out << *p.genomic.snp_count; else out << "NA";
    out << ',' << (p.genomic.cimp_status ? to_string(*p.genomic.cimp_status) : "NA") << ',';
    out << (p.genomic.cnv_fraction ? format_double(*p.genomic.cnv_fraction) : "NA");
    out << ',' << to_string(p.split) << '\n';
  }
}

void write_manifest(const Cohort& cohort, const std::filesystem::path& path) {
  std::ostringstream ss;
  write_manifest(cohort, ss);
  write_file(path, ss.str());
}

// ---------------------------------------------------------------------------
// Embeddings

std::vector<PatchEmbedding> read_embeddings_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw data_error(source + ": empty embedding file");
  strip_bom(line);
  line = strip_line(line);
  const auto header = split_csv_line(line);
  if (header.size() < 3 || header[0] != "patch_id" || header[1] != "patient_id") {
    throw data_error(source + ":1: header must be patch_id,patient_id,f0,...");
  }
  for (std::size_t i = 2; i < header.size(); ++i) {
    if (header[i] != "f" + std::to_string(i - 2)) {
      throw data_error(source + ":1: column " + std::to_string(i + 1) + " must be named f" +
                       std::to_string(i - 2));
    }
  }
  const std::size_t dim = header.size() - 2;
  std::vector<PatchEmbedding> out;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_line(line);
    if (line.empty()) continue;
    const auto cells = split_csv_line(line);
    PatchEmbedding e;
    e.patch_id = std::string(cells[0]);
    if (cells.size() < 2) throw data_error(source + ":" + std::to_string(line_no) + ": too few columns");
    e.patient_id = std::string(cells[1]);
    if (cells.size() - 2 != dim) {
      throw data_error(source + ":" + std::to_string(line_no) + ": dimension mismatch for patch " +
                       e.patch_id + ": " + std::to_string(cells.size() - 2) + " features, expected " +
                       std::to_string(dim));
    }
    e.vector.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (!parse_number(cells[i + 2], e.vector[i]) || !std::isfinite(e.vector[i])) {
        throw data_error(source + ":" + std::to_string(line_no) + ": column " +
                         std::to_string(i + 3) + ": non-finite or malformed entry '" +
                         std::string(cells[i + 2]) + "' in patch " + e.patch_id);
      }
    }
    out.push_back(std::move(e));
  }
  return out;
}

namespace {

template <typename T>
T read_le(std::istream& in, const std::string& source) {
  T v{};
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  if (!in) throw data_error(source + ": truncated packed embedding file");
  return v;
}

std::string read_prefixed(std::istream& in, const std::string& source) {
  const auto len = read_le<std::uint16_t>(in, source);
  std::string s(len, '\0');
  in.read(s.data(), len);
  if (!in) throw data_error(source + ": truncated packed embedding file");
  return s;
}

template <typename T>
void write_le(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

void write_prefixed(std::ostream& out, const std::string& s) {
  if (s.size() > std::numeric_limits<std::uint16_t>::max()) {
    throw usage_error("identifier longer than 65535 bytes: " + s.substr(0, 32) + "...");
  }
  write_le(out, static_cast<std::uint16_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

}  // namespace

std::vector<PatchEmbedding> read_embeddings_packed(std::istream& in, const std::string& source) {
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) throw data_error(source + ": bad magic bytes");
  const auto version = read_le<std::uint32_t>(in, source);
  if (version != kPackedVersion) {
    throw data_error(source + ": unsupported packed version " + std::to_string(version));
  }
  const auto dim = read_le<std::uint32_t>(in, source);
  const auto count = read_le<std::uint64_t>(in, source);
  if (dim == 0) throw data_error(source + ": dimension 0");
  std::vector<PatchEmbedding> out;
  out.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(count, 1u << 20)));
  for (std::uint64_t r = 0; r < count; ++r) {
    PatchEmbedding e;
    e.patch_id = read_prefixed(in, source);
    e.patient_id = read_prefixed(in, source);
    e.vector.resize(dim);
    in.read(reinterpret_cast<char*>(e.vector.data()), static_cast<std::streamsize>(dim * 4));
    if (!in) throw data_error(source + ": truncated packed embedding file at record " + std::to_string(r));
    for (float v : e.vector) {
      if (!std::isfinite(v)) throw data_error(source + ": non-finite entry in patch " + e.patch_id);
    }
    out.push_back(std::move(e));
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw data_error(source + ": trailing bytes after " + std::to_string(count) + " records");
  }
  return out;
}

std::vector<PatchEmbedding> read_embeddings(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot open embeddings " + path.string());
  char magic[4] = {};
  in.read(magic, 4);
  const bool packed = in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0;
  in.clear();
  in.seekg(0);
  return packed ? read_embeddings_packed(in, path.string()) : read_embeddings_csv(in, path.string());
}

Cohort attach_embeddings(const Cohort& cohort, const std::filesystem::path& path) {
  return Cohort(cohort.patients(), read_embeddings(path));
}

void write_embeddings_csv(std::span<const PatchEmbedding> embeddings, std::ostream& out) {
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().vector.size();
  out << "patch_id,patient_id";
  for (std::size_t i = 0; i < dim; ++i) out << ",f" << i;
  out << '\n';
  std::array<char, 32> buf{};
  for (const auto& e : embeddings) {
    out << e.patch_id << ',' << e.patient_id;
    for (float v : e.vector) {
      const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
      out << ',' << std::string_view(buf.data(), res.ptr - buf.data());
    }
    out << '\n';
  }
}

void write_embeddings_packed(std::span<const PatchEmbedding> embeddings, std::ostream& out) {
  const std::size_t dim = embeddings.empty() ? 0 : embeddings.front().vector.size();
  out.write(kMagic, 4);
  write_le(out, kPackedVersion);
  write_le(out, static_cast<std::uint32_t>(dim));
  write_le(out, static_cast<std::uint64_t>(embeddings.size()));
  for (const auto& e : embeddings) {
    if (e.vector.size() != dim) throw usage_error("dimension mismatch for patch " + e.patch_id);
    write_prefixed(out, e.patch_id);
    write_prefixed(out, e.patient_id);
    out.write(reinterpret_cast<const char*>(e.vector.data()),
              static_cast<std::streamsize>(dim * sizeof(float)));
  }
}

void write_embeddings(std::span<const PatchEmbedding> embeddings, const std::filesystem::path& path,
                      EmbeddingFormat format) {
  std::ostringstream ss(std::ios::binary);
  if (format == EmbeddingFormat::kCsv) {
    write_embeddings_csv(embeddings, ss);
  } else {
    write_embeddings_packed(embeddings, ss);
  }
  write_file(path, ss.str());
}

// ---------------------------------------------------------------------------
// Summary

CohortSummary cohort_summary(const Cohort& cohort) {
  if (!cohort.has_embeddings()) throw usage_error("cohort_summary requires attached embeddings");
  CohortSummary s;
  s.dim = cohort.dim();
  std::vector<double> snp, cnv;
  std::array<std::size_t, 4> cimp{};
  for (const auto& p : cohort.patients()) {
    auto& g = s.counts[static_cast<int>(p.split)][static_cast<int>(p.msi_status)];
    ++g.patients;
    g.patches += p.patches.size();
    ++s.total_patients;
    s.total_patches += p.patches.size();
    if (p.genomic.snp_count) snp.push_back(static_cast<double>(*p.genomic.snp_count));
    else ++s.snp_missing;
    if (p.genomic.cnv_fraction) cnv.push_back(*p.genomic.cnv_fraction);
    else ++s.cnv_missing;
    ++cimp[p.genomic.cimp_status ? static_cast<int>(*p.genomic.cimp_status) : 3];
  }
  if (!snp.empty()) s.snp = five_number(snp);
  if (!cnv.empty()) s.cnv = five_number(cnv);
  for (int i = 0; i < 4; ++i) {
    s.cimp_proportions[i] =
        s.total_patients ? static_cast<double>(cimp[i]) / static_cast<double>(s.total_patients) : 0.0;
  }
  return s;
}

std::string format_summary(const CohortSummary& s) {
  std::ostringstream out;
  out << "patients=" << s.total_patients << " patches=" << s.total_patches << " dim=" << s.dim << '\n';
  for (Split split : {Split::kTrain, Split::kTest}) {
    for (MsiStatus m : {MsiStatus::kMsi, MsiStatus::kMss}) {
      const auto& g = s.at(split, m);
      out << to_string(split) << ' ' << to_string(m) << ": n=" << g.patients << " p=" << g.patches
          << '\n';
    }
  }
  const auto five = [&](const char* name, const std::optional<FiveNumber>& f, std::size_t missing) {
    if (!f) {
      out << name << ": all missing (" << missing << ")\n";
      return;
    }
    out << name << ": min=" << format_double(f->min) << " q1=" << format_double(f->q1)
        << " median=" << format_double(f->median) << " q3=" << format_double(f->q3)
        << " max=" << format_double(f->max) << " missing=" << missing << '\n';
  };
  five("snp_count", s.snp, s.snp_missing);
  out << "cimp: CIMP_H=" << format_double(s.cimp_proportions[0])
      << " CIMP_LOW=" << format_double(s.cimp_proportions[1])
      << " NON_CIMP=" << format_double(s.cimp_proportions[2])
      << " NA=" << format_double(s.cimp_proportions[3]) << '\n';
  five("cnv_fraction", s.cnv, s.cnv_missing);
  return out.str();
}

}  // namespace bp
