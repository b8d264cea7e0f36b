#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "volscreen/antoine.hpp"
#include "volscreen/dataset.hpp"
#include "volscreen/rng.hpp"

using namespace volscreen;

namespace {

std::vector<VpPoint> synth_points(const AntoineParams& p, const std::vector<double>& temps) {
  std::vector<VpPoint> pts;
  for (double t : temps) pts.push_back({t, antoine_vp(p, t).log10_pa});
  return pts;
}

MoleculeRecord make_record(const std::string& id, const std::string& smiles, double t_min,
                           double t_max) {
  MoleculeRecord r;
  r.id = id;
  r.smiles = smiles;
  r.antoine = {9.0, 2500.0, -50.0, t_min, t_max};
  return r;
}

}  // namespace

TEST_CASE("antoine_vp direct evaluation") {
  AntoineParams p{9.0, 2500.0, -50.0, 300.0, 400.0};
  CHECK(antoine_vp(p, 350.0).log10_pa == doctest::Approx(9.0 - 2500.0 / 300.0 + 5.0));

  AntoineParams flat{7.5, 0.0, 10.0, 300.0, 400.0};
  for (double t : {300.0, 350.0, 400.0})
    CHECK(antoine_vp(flat, t).log10_pa == doctest::Approx(12.5));

  CHECK_FALSE(antoine_vp(p, 350.0).extrapolated);
  CHECK(antoine_vp(p, 450.0).extrapolated);

  CHECK_THROWS_AS(antoine_vp(p, 50.0), AntoineError);
}

TEST_CASE("antoine_vp monotone in T for positive B") {
  AntoineParams p{9.0, 2500.0, -50.0, 300.0, 400.0};
  double prev = antoine_vp(p, 300.0).log10_pa;
  for (double t = 301.0; t <= 400.0; t += 1.0) {
    double cur = antoine_vp(p, t).log10_pa;
    CHECK(cur > prev);
    prev = cur;
  }
}

TEST_CASE("fit_antoine recovers noise-free parameters") {
  AntoineParams truth{9.0, 2500.0, -50.0, 300.0, 400.0};
  auto pts = synth_points(truth, {300, 320, 340, 360, 380, 400});
  AntoineFit fit = fit_antoine(pts);
  CHECK(std::abs(fit.params.a - truth.a) / std::abs(truth.a) < 1e-3);
  CHECK(std::abs(fit.params.b - truth.b) / std::abs(truth.b) < 1e-3);
  CHECK(std::abs(fit.params.c - truth.c) / std::abs(truth.c) < 1e-3);
  CHECK(fit.sse < 1e-12);
  CHECK(fit.params.t_min_k == 300.0);
  CHECK(fit.params.t_max_k == 400.0);

  // Round trip through evaluation.
  for (double t : {305.0, 355.0, 395.0})
    CHECK(antoine_vp(fit.params, t).log10_pa ==
          doctest::Approx(antoine_vp(truth, t).log10_pa).epsilon(1e-6));
}

TEST_CASE("fit_antoine input validation") {
  AntoineParams truth{9.0, 2500.0, -50.0, 300.0, 400.0};
  auto two = synth_points(truth, {300, 400});
  CHECK_THROWS_AS(fit_antoine(two), AntoineError);

  auto six = synth_points(truth, {300, 320, 340, 360, 380, 400});
  CHECK_THROWS_AS(fit_antoine(six, {0, 1, 2, 3}), AntoineError);
}

TEST_CASE("fit_antoine outlier exclusion lowers SSE") {
  AntoineParams truth{9.0, 2500.0, -50.0, 300.0, 400.0};
  std::vector<VpPoint> pts;
  pts.push_back({290.0, antoine_vp(truth, 290.0).log10_pa - 3.0});  // gross outlier
  auto clean = synth_points(truth, {300, 320, 340, 360, 380, 400});
  pts.insert(pts.end(), clean.begin(), clean.end());
  AntoineFit with = fit_antoine(pts);
  AntoineFit without = fit_antoine(pts, {0});
  CHECK(without.sse < with.sse);
  CHECK(without.sse < 1e-12);
}

TEST_CASE("sample_temperatures spacing rules") {
  auto wide = sample_temperatures(300.0, 400.0, 20, 2.0);
  REQUIRE(wide.size() == 20);
  CHECK(wide.front() == 300.0);
  CHECK(wide.back() == 400.0);
  CHECK(wide[1] - wide[0] == doctest::Approx(100.0 / 19.0));

  auto narrow = sample_temperatures(300.0, 320.0, 20, 2.0);
  REQUIRE(narrow.size() == 11);
  for (std::size_t i = 1; i < narrow.size(); ++i)
    CHECK(narrow[i] - narrow[i - 1] == doctest::Approx(2.0));

  CHECK_THROWS_AS(sample_temperatures(300.0, 301.0, 20, 2.0), DatasetError);

  for (auto& temps : {wide, narrow})
    for (std::size_t i = 1; i < temps.size(); ++i) CHECK(temps[i] > temps[i - 1]);
}

TEST_CASE("composition_filter rules") {
  std::vector<MoleculeRecord> recs = {
      make_record("hexane", "CCCCCC", 300, 400),
      make_record("pentane", "CCCCC", 300, 400),
      make_record("chloromethane", "CCl", 300, 400),
      make_record("water", "O", 300, 400),
      make_record("hexane-again", "C(CCCCC)", 300, 400),
      make_record("ester", "CCCCCC(=O)OC", 300, 400),
  };
  FilteredRecords fr = composition_filter(recs);
  REQUIRE(fr.records.size() == 2);
  CHECK(fr.records[0].id == "hexane");
  CHECK(fr.records[1].id == "ester");
  CHECK(fr.report.kept_per_category.at("H/C") == 1);
  CHECK(fr.report.kept_per_category.at("H/C/O") == 1);

  auto reason_of = [&](const std::string& id) {
    for (const auto& rej : fr.report.rejected)
      if (rej.id == id) return rej.reason;
    return std::string("<kept>");
  };
  CHECK(reason_of("pentane") == "min-carbon");
  CHECK(reason_of("water") == "element set");
  CHECK(reason_of("hexane-again") == "duplicate");
  CHECK(reason_of("chloromethane").substr(0, 6) == "parse:");
}

TEST_CASE("build_variable_dataset counts") {
  std::vector<MoleculeRecord> recs = {
      make_record("m1", "CCCCCC", 300, 400),
      make_record("m2", "CCCCCCC", 300, 400),
      make_record("m3", "CCCCCCCC", 300, 320),
  };
  FilteredRecords fr = composition_filter(recs);
  DatasetBuildReport rep;
  Dataset ds = build_variable_dataset(fr, &rep);
  CHECK(rep.molecules == 3);
  CHECK(ds.rows() == 20 + 20 + 11);
  CHECK(ds.feature_names.front() == "Temperature");
  CHECK(ds.features.rows() == ds.rows());

  // Instance temperatures within a molecule stay >= 2 K apart.
  for (const auto& id : ds.molecule_ids_in_order()) {
    std::vector<double> temps;
    for (const auto& inst : ds.instances)
      if (inst.molecule_id == id) temps.push_back(inst.temperature_k);
    std::sort(temps.begin(), temps.end());
    for (std::size_t i = 1; i < temps.size(); ++i)
      CHECK(temps[i] - temps[i - 1] >= 2.0 - 1e-9);
  }
}

TEST_CASE("build_fixed_dataset keeps in-range molecules") {
  std::vector<MoleculeRecord> recs = {
      make_record("in", "CCCCCC", 350, 400),
      make_record("out", "CCCCCCC", 390, 450),
  };
  FilteredRecords fr = composition_filter(recs);
  DatasetBuildReport rep;
  Dataset ds = build_fixed_dataset(fr, &rep, 387.0);
  CHECK(ds.rows() == 1);
  CHECK(ds.instances[0].molecule_id == "in");
  CHECK(ds.instances[0].temperature_k == 387.0);
  REQUIRE(rep.skipped.size() == 1);
  CHECK(rep.skipped[0].id == "out");
}

namespace {

Dataset synthetic_grouped_dataset(int n_molecules, int instances_each, std::uint64_t seed) {
  Rng rng(seed);
  Dataset ds;
  ds.feature_names = {"Temperature"};
  ds.features.resize(n_molecules * instances_each, 1);
  for (int m = 0; m < n_molecules; ++m) {
    double level = rng.gaussian(-6.0, 2.0);
    for (int k = 0; k < instances_each; ++k) {
      VpInstance inst;
      inst.molecule_id = "mol" + std::to_string(m);
      inst.temperature_k = 300.0 + 5.0 * k;
      inst.y_log10_pa = level + 0.05 * k;
      ds.features(m * instances_each + k, 0) = inst.temperature_k;
      ds.instances.push_back(std::move(inst));
    }
  }
  ds.partition.assign(static_cast<std::size_t>(ds.rows()), -1);
  return ds;
}

double partition_median_spread(const Dataset& ds, const std::map<std::string, int>& labels,
                               int n_parts) {
  // Median of molecule-medians per partition, then max - min across partitions.
  std::map<std::string, std::vector<double>> per_mol;
  for (const auto& inst : ds.instances) per_mol[inst.molecule_id].push_back(inst.y_log10_pa);
  std::vector<std::vector<double>> medians(static_cast<std::size_t>(n_parts));
  for (auto& [id, ys] : per_mol) {
    std::sort(ys.begin(), ys.end());
    double med = ys.size() % 2 ? ys[ys.size() / 2]
                               : 0.5 * (ys[ys.size() / 2 - 1] + ys[ys.size() / 2]);
    medians[static_cast<std::size_t>(labels.at(id))].push_back(med);
  }
  double lo = 1e300, hi = -1e300;
  for (auto& v : medians) {
    REQUIRE(!v.empty());
    std::sort(v.begin(), v.end());
    double med = v.size() % 2 ? v[v.size() / 2] : 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    lo = std::min(lo, med);
    hi = std::max(hi, med);
  }
  return hi - lo;
}

}  // namespace

TEST_CASE("stratified_group_split balances and never leaks") {
  Dataset ds = synthetic_grouped_dataset(8, 20, 7);
  PartitionMap pm = stratified_group_split(ds, 3, 42);
  apply_partitions(ds, pm);

  std::map<int, std::set<std::string>> mols_per_part;
  for (int i = 0; i < ds.rows(); ++i)
    mols_per_part[ds.partition[static_cast<std::size_t>(i)]].insert(
        ds.instances[static_cast<std::size_t>(i)].molecule_id);
  REQUIRE(mols_per_part.size() == 4);
  for (auto& [lbl, mols] : mols_per_part) CHECK(mols.size() == 2);

  // Leakage freedom: a molecule id appears under exactly one label.
  std::map<std::string, std::set<int>> labels_per_mol;
  for (int i = 0; i < ds.rows(); ++i)
    labels_per_mol[ds.instances[static_cast<std::size_t>(i)].molecule_id].insert(
        ds.partition[static_cast<std::size_t>(i)]);
  for (auto& [id, labels] : labels_per_mol) CHECK(labels.size() == 1);

  CHECK_THROWS_AS(stratified_group_split(synthetic_grouped_dataset(3, 5, 1), 3, 0),
                  DatasetError);
}

TEST_CASE("stratified split beats random assignment on median balance") {
  Dataset ds = synthetic_grouped_dataset(100, 5, 99);
  auto ids = ds.molecule_ids_in_order();
  double strat_total = 0.0, random_total = 0.0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    PartitionMap pm = stratified_group_split(ds, 3, seed);
    strat_total += partition_median_spread(ds, pm.label, 4);

    // Unstratified control: shuffle molecules, deal round-robin.
    std::vector<std::string> shuffled = ids;
    Rng rng(seed ^ 0xabcdef);
    for (std::size_t i = shuffled.size(); i > 1; --i)
      std::swap(shuffled[i - 1], shuffled[rng.uniform_int(i)]);
    std::map<std::string, int> random_labels;
    for (std::size_t i = 0; i < shuffled.size(); ++i)
      random_labels[shuffled[i]] = static_cast<int>(i % 4);
    random_total += partition_median_spread(ds, random_labels, 4);
  }
  CHECK(strat_total / 100.0 <= random_total / 100.0);
}

TEST_CASE("dataset and feature csv round trip") {
  std::vector<MoleculeRecord> recs = {
      make_record("m1", "CCCCCC", 300, 400),
      make_record("m2", "CCCCCCCC", 320, 380),
      make_record("m3", "CCCCCC(=O)OC", 300, 360),
      make_record("m4", "CCCCCCCCCC", 310, 390),
  };
  FilteredRecords fr = composition_filter(recs);
  Dataset ds = build_variable_dataset(fr, nullptr);
  apply_partitions(ds, stratified_group_split(ds, 3, 5));

  auto tmp = std::filesystem::temp_directory_path() / "volscreen_ds_test";
  std::filesystem::create_directories(tmp);
  std::string dpath = (tmp / "dataset.csv").string();
  std::string fpath = (tmp / "features.csv").string();
  write_dataset_csv(dpath, ds);
  write_features_csv(fpath, ds);

  Dataset back = read_dataset_csv(dpath);
  REQUIRE(back.rows() == ds.rows());
  CHECK(back.n_folds == 3);
  for (int i = 0; i < ds.rows(); ++i) {
    CHECK(back.instances[static_cast<std::size_t>(i)].molecule_id ==
          ds.instances[static_cast<std::size_t>(i)].molecule_id);
    CHECK(back.instances[static_cast<std::size_t>(i)].temperature_k ==
          ds.instances[static_cast<std::size_t>(i)].temperature_k);
    CHECK(back.instances[static_cast<std::size_t>(i)].y_log10_pa ==
          ds.instances[static_cast<std::size_t>(i)].y_log10_pa);
    CHECK(back.partition[static_cast<std::size_t>(i)] ==
          ds.partition[static_cast<std::size_t>(i)]);
  }
  read_features_csv(fpath, back);
  CHECK(back.feature_names == ds.feature_names);
  CHECK((back.features - ds.features).cwiseAbs().maxCoeff() == 0.0);
}
