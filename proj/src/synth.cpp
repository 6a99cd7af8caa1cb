// SPDX-License-Identifier: Apache-2.0
#include "bp/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bp/error.hpp"
#include "bp/rng.hpp"

namespace bp {

namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw usage_error("generator config: " + what);
}

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

std::size_t feature_axis(std::size_t feature, int dim) {
  return 1 + feature % static_cast<std::size_t>(dim - 1);
}

std::int64_t draw_snp(Rng& rng, double median, double log_sd) {
  const double v = std::exp(std::log(median) + log_sd * rng.normal());
  return static_cast<std::int64_t>(std::clamp(std::round(v), 10.0, 17000.0));
}

double draw_fraction(Rng& rng, double median, double log_sd) {
  return std::clamp(std::exp(std::log(median) + log_sd * rng.normal()), 0.0, 1.0);
}

}  // namespace

void GeneratorConfig::validate() const {
  require(n_train_msi >= 0 && n_train_mss >= 0 && n_test_msi >= 0 && n_test_mss >= 0,
          "patient counts must be >= 0");
  require(n_train_msi + n_train_mss + n_test_msi + n_test_mss > 0, "cohort needs at least one patient");
  require(patches_min >= 1 && patches_max >= patches_min, "need 1 <= patches_min <= patches_max");
  require(dim >= 2, "dim must be >= 2");
  require(class_separation >= 0.0 && subclass_separation >= 0.0, "separations must be >= 0");
  require(noise_sd >= 0.0 && patient_sd >= 0.0, "noise scales must be >= 0");
  require(in_unit(cimp_h_prevalence_msi) && in_unit(cimp_h_prevalence_mss_train) &&
              in_unit(cimp_h_prevalence_mss_test) && in_unit(cimp_low_fraction) &&
              in_unit(msi_snp_high_weight),
          "prevalences must lie in [0, 1]");
  require(snp_split > 0.0 && cnv_split > 0.0 && cnv_split < 1.0, "split points out of range");
  require(msi_snp_low_median > 0 && msi_snp_high_median > 0 && mss_snp_median > 0 &&
              msi_cnv_median > 0 && mss_cnv_median > 0,
          "medians must be > 0");
  require(msi_snp_log_sd >= 0 && mss_snp_log_sd >= 0 && msi_cnv_log_sd >= 0 && mss_cnv_log_sd >= 0,
          "log-scale spreads must be >= 0");
  if (patch_totals) {
    const int n[2][2] = {{n_train_mss, n_train_msi}, {n_test_mss, n_test_msi}};
    for (int s = 0; s < 2; ++s) {
      for (int m = 0; m < 2; ++m) {
        require((*patch_totals)[s][m] >= n[s][m], "patch total below the group's patient count");
        require(n[s][m] > 0 || (*patch_totals)[s][m] == 0, "patch total for an empty group");
      }
    }
  }
}

void to_json(nlohmann::json& j, const GeneratorConfig& c) {
  j = nlohmann::json{
      {"n_train_msi", c.n_train_msi}, {"n_train_mss", c.n_train_mss},
      {"n_test_msi", c.n_test_msi}, {"n_test_mss", c.n_test_mss},
      {"patches_min", c.patches_min}, {"patches_max", c.patches_max},
      {"dim", c.dim}, {"class_separation", c.class_separation},
      {"subclass_separation", c.subclass_separation},
      {"morphology_link", {{"snp", c.link.snp}, {"cimp", c.link.cimp}, {"cnv", c.link.cnv}}},
      {"noise_sd", c.noise_sd}, {"patient_sd", c.patient_sd},
      {"snp_split", c.snp_split}, {"msi_snp_low_median", c.msi_snp_low_median},
      {"msi_snp_high_median", c.msi_snp_high_median}, {"msi_snp_high_weight", c.msi_snp_high_weight},
      {"msi_snp_log_sd", c.msi_snp_log_sd}, {"mss_snp_median", c.mss_snp_median},
      {"mss_snp_log_sd", c.mss_snp_log_sd},
      {"cimp_h_prevalence_msi", c.cimp_h_prevalence_msi},
      {"cimp_h_prevalence_mss_train", c.cimp_h_prevalence_mss_train},
      {"cimp_h_prevalence_mss_test", c.cimp_h_prevalence_mss_test},
      {"cimp_low_fraction", c.cimp_low_fraction},
      {"cnv_split", c.cnv_split}, {"msi_cnv_median", c.msi_cnv_median},
      {"msi_cnv_log_sd", c.msi_cnv_log_sd}, {"mss_cnv_median", c.mss_cnv_median},
      {"mss_cnv_log_sd", c.mss_cnv_log_sd}, {"seed", c.seed}};
  if (c.patch_totals) {
    const auto& t = *c.patch_totals;
    j["patch_totals"] = {{"train_mss", t[0][0]}, {"train_msi", t[0][1]},
                         {"test_mss", t[1][0]}, {"test_msi", t[1][1]}};
  }
}

void from_json(const nlohmann::json& j, GeneratorConfig& c) {
  const auto get = [&](const char* key, auto& field) { field = j.value(key, field); };
  get("n_train_msi", c.n_train_msi);
  get("n_train_mss", c.n_train_mss);
  get("n_test_msi", c.n_test_msi);
  get("n_test_mss", c.n_test_mss);
  get("patches_min", c.patches_min);
  get("patches_max", c.patches_max);
  get("dim", c.dim);
  get("class_separation", c.class_separation);
  get("subclass_separation", c.subclass_separation);
  if (j.contains("morphology_link")) {
    const auto& l = j.at("morphology_link");
    c.link.snp = l.value("snp", c.link.snp);
    c.link.cimp = l.value("cimp", c.link.cimp);
    c.link.cnv = l.value("cnv", c.link.cnv);
  }
  get("noise_sd", c.noise_sd);
  get("patient_sd", c.patient_sd);
  get("snp_split", c.snp_split);
  get("msi_snp_low_median", c.msi_snp_low_median);
  get("msi_snp_high_median", c.msi_snp_high_median);
  get("msi_snp_high_weight", c.msi_snp_high_weight);
  get("msi_snp_log_sd", c.msi_snp_log_sd);
  get("mss_snp_median", c.mss_snp_median);
  get("mss_snp_log_sd", c.mss_snp_log_sd);
  get("cimp_h_prevalence_msi", c.cimp_h_prevalence_msi);
  get("cimp_h_prevalence_mss_train", c.cimp_h_prevalence_mss_train);
  get("cimp_h_prevalence_mss_test", c.cimp_h_prevalence_mss_test);
  get("cimp_low_fraction", c.cimp_low_fraction);
  get("cnv_split", c.cnv_split);
  get("msi_cnv_median", c.msi_cnv_median);
  get("msi_cnv_log_sd", c.msi_cnv_log_sd);
  get("mss_cnv_median", c.mss_cnv_median);
  get("mss_cnv_log_sd", c.mss_cnv_log_sd);
  get("seed", c.seed);
  if (j.contains("patch_totals")) {
    const auto& t = j.at("patch_totals");
    c.patch_totals = std::array<std::array<std::int64_t, 2>, 2>{
        {{t.at("train_mss").get<std::int64_t>(), t.at("train_msi").get<std::int64_t>()},
         {t.at("test_mss").get<std::int64_t>(), t.at("test_msi").get<std::int64_t>()}}};
  }
}

PlantedTruth planted_truth(const GeneratorConfig& cfg) {
  cfg.validate();
  PlantedTruth t;
  t.snp_split = cfg.snp_split;
  t.cnv_split = cfg.cnv_split;
  t.class_axis = 0;
  for (std::size_t f = 0; f < 3; ++f) t.feature_axis[f] = feature_axis(f, cfg.dim);
  t.link = cfg.link;
  t.class_offset = cfg.class_separation;
  t.subclass_offset = 0.5 * cfg.subclass_separation;
  return t;
}

std::vector<double> planted_mean(const GeneratorConfig& cfg, MsiStatus status,
                                 const GenomicProfile& g) {
  std::vector<double> mean(static_cast<std::size_t>(cfg.dim), 0.0);
  if (status != MsiStatus::kMsi) return mean;
  mean[0] += cfg.class_separation;
  const double half = 0.5 * cfg.subclass_separation;
  const auto shift = [&](std::size_t feature, bool upper) {
    mean[feature_axis(feature, cfg.dim)] += upper ? half : -half;
  };
  if (cfg.link.snp && g.snp_count) shift(0, static_cast<double>(*g.snp_count) > cfg.snp_split);
  if (cfg.link.cimp && g.cimp_status) shift(1, *g.cimp_status == CimpStatus::kCimpH);
  if (cfg.link.cnv && g.cnv_fraction) shift(2, *g.cnv_fraction > cfg.cnv_split);
  return mean;
}

Cohort generate(const GeneratorConfig& cfg) {
  cfg.validate();
  struct Group {
    Split split;
    MsiStatus status;
    int n;
  };
  const Group groups[] = {{Split::kTrain, MsiStatus::kMsi, cfg.n_train_msi},
                          {Split::kTrain, MsiStatus::kMss, cfg.n_train_mss},
                          {Split::kTest, MsiStatus::kMsi, cfg.n_test_msi},
                          {Split::kTest, MsiStatus::kMss, cfg.n_test_mss}};
  std::vector<PatientRecord> patients;
  std::vector<PatchEmbedding> embeddings;
  std::uint64_t serial = 0;
  for (const auto& group : groups) {
    for (int j = 0; j < group.n; ++j, ++serial) {
      Rng rng(derive_seed(cfg.seed, Stream::kPatient, serial));
      PatientRecord p;
      char id[32];
      std::snprintf(id, sizeof id, "P%04llu", static_cast<unsigned long long>(serial + 1));
      p.patient_id = id;
      p.msi_status = group.status;
      p.split = group.split;
      const bool msi = group.status == MsiStatus::kMsi;
      if (msi) {
        const bool high = rng.bernoulli(cfg.msi_snp_high_weight);
        p.genomic.snp_count =
            draw_snp(rng, high ? cfg.msi_snp_high_median : cfg.msi_snp_low_median, cfg.msi_snp_log_sd);
      } else {
        p.genomic.snp_count = draw_snp(rng, cfg.mss_snp_median, cfg.mss_snp_log_sd);
      }
      const double cimp_h = msi ? cfg.cimp_h_prevalence_msi
                                : (group.split == Split::kTrain ? cfg.cimp_h_prevalence_mss_train
                                                                : cfg.cimp_h_prevalence_mss_test);
      if (rng.bernoulli(cimp_h)) {
        p.genomic.cimp_status = CimpStatus::kCimpH;
      } else {
        p.genomic.cimp_status = rng.bernoulli(cfg.cimp_low_fraction) ? CimpStatus::kCimpLow
                                                                     : CimpStatus::kNonCimp;
      }
      p.genomic.cnv_fraction = msi ? draw_fraction(rng, cfg.msi_cnv_median, cfg.msi_cnv_log_sd)
                                   : draw_fraction(rng, cfg.mss_cnv_median, cfg.mss_cnv_log_sd);

      std::int64_t n_patches = 0;
      if (cfg.patch_totals) {
        const std::int64_t total =
            (*cfg.patch_totals)[static_cast<int>(group.split)][static_cast<int>(group.status)];
        n_patches = total / group.n + (j < total % group.n ? 1 : 0);
      } else {
        n_patches = cfg.patches_min +
                    static_cast<std::int64_t>(rng.below(
                        static_cast<std::uint64_t>(cfg.patches_max - cfg.patches_min + 1)));
      }

      auto centre = planted_mean(cfg, group.status, p.genomic);
      for (double& c : centre) c += cfg.patient_sd * rng.normal();
      for (std::int64_t k = 0; k < n_patches; ++k) {
        PatchEmbedding e;
        char pid[48];
        std::snprintf(pid, sizeof pid, "%s_p%05lld", id, static_cast<long long>(k));
        e.patch_id = pid;
        e.patient_id = p.patient_id;
        e.vector.resize(centre.size());
        for (std::size_t d = 0; d < centre.size(); ++d) {
          e.vector[d] = static_cast<float>(centre[d] + cfg.noise_sd * rng.normal());
        }
        embeddings.push_back(std::move(e));
      }
      patients.push_back(std::move(p));
    }
  }
  return Cohort(std::move(patients), std::move(embeddings));
}

GeneratorConfig published_layout_config() {
  GeneratorConfig c;
  c.patch_totals = std::array<std::array<std::int64_t, 2>, 2>{{{46704, 46704}, {70569, 28335}}};
  return c;
}

}  // namespace bp
