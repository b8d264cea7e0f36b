#include "volscreen/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "volscreen/csv.hpp"
#include "volscreen/descriptors.hpp"
#include "volscreen/rng.hpp"
#include "volscreen/smiles.hpp"

namespace volscreen {

std::vector<MoleculeRecord> read_records_csv(const std::string& path) {
  Table t = read_csv(path);
  int c_id = t.require_column("id");
  int c_smiles = t.require_column("smiles");
  int c_a = t.require_column("A");
  int c_b = t.require_column("B");
  int c_c = t.require_column("C");
  int c_tmin = t.require_column("t_min_K");
  int c_tmax = t.require_column("t_max_K");
  std::vector<MoleculeRecord> out;
  out.reserve(t.rows.size());
  for (const auto& row : t.rows) {
    MoleculeRecord r;
    r.id = row[static_cast<std::size_t>(c_id)];
    r.smiles = row[static_cast<std::size_t>(c_smiles)];
    r.antoine.a = parse_double(row[static_cast<std::size_t>(c_a)]);
    r.antoine.b = parse_double(row[static_cast<std::size_t>(c_b)]);
    r.antoine.c = parse_double(row[static_cast<std::size_t>(c_c)]);
    r.antoine.t_min_k = parse_double(row[static_cast<std::size_t>(c_tmin)]);
    r.antoine.t_max_k = parse_double(row[static_cast<std::size_t>(c_tmax)]);
    out.push_back(std::move(r));
  }
  return out;
}

void write_records_csv(const std::string& path, const std::vector<MoleculeRecord>& records) {
  Table t;
  t.header = {"id", "smiles", "A", "B", "C", "t_min_K", "t_max_K"};
  for (const auto& r : records) {
    t.rows.push_back({r.id, r.smiles, format_g17(r.antoine.a), format_g17(r.antoine.b),
                      format_g17(r.antoine.c), format_g17(r.antoine.t_min_k),
                      format_g17(r.antoine.t_max_k)});
  }
  write_csv(path, t);
}

FilteredRecords composition_filter(const std::vector<MoleculeRecord>& records,
                                   int min_carbons) {
  FilteredRecords out;
  std::set<std::string> seen_canonical;
  for (const auto& rec : records) {
    MolGraph mol;
    try {
      mol = parse_smiles(rec.smiles);
    } catch (const ChemError& e) {
      out.report.rejected.push_back({rec.id, std::string("parse: ") + e.what()});
      continue;
    }
    Composition comp = composition(mol);
    if (comp.category() == Composition::Category::Other) {
      out.report.rejected.push_back({rec.id, "element set"});
      continue;
    }
    if (comp.c < min_carbons) {
      out.report.rejected.push_back({rec.id, "min-carbon"});
      continue;
    }
    std::string canonical = to_smiles(mol);
    if (!seen_canonical.insert(canonical).second) {
      out.report.rejected.push_back({rec.id, "duplicate"});
      continue;
    }
    out.report.kept_per_category[category_name(comp.category())] += 1;
    out.report.kept += 1;
    out.records.push_back(rec);
    out.graphs.push_back(std::move(mol));
  }
  return out;
}

std::vector<double> sample_temperatures(double t_min_k, double t_max_k, int n,
                                        double min_sep_k) {
  if (!(t_max_k > t_min_k)) throw DatasetError("temperature range must be increasing");
  const double range = t_max_k - t_min_k;
  if (range < min_sep_k)
    throw DatasetError("degenerate temperature range: " + format_g17(range) + " K < " +
                       format_g17(min_sep_k) + " K");
  if (n < 2) n = 2;
  if (range / (n - 1) < min_sep_k)
    n = std::max(2, static_cast<int>(std::floor(range / min_sep_k)) + 1);
  std::vector<double> temps(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    temps[static_cast<std::size_t>(i)] = t_min_k + range * i / (n - 1);
  temps.back() = t_max_k;
  return temps;
}

Eigen::VectorXd Dataset::targets() const {
  Eigen::VectorXd y(rows());
  for (int i = 0; i < rows(); ++i) y[i] = instances[static_cast<std::size_t>(i)].y_log10_pa;
  return y;
}

std::vector<std::string> Dataset::molecule_ids_in_order() const {
  std::vector<std::string> ids;
  std::set<std::string> seen;
  for (const auto& inst : instances)
    if (seen.insert(inst.molecule_id).second) ids.push_back(inst.molecule_id);
  return ids;
}

namespace {

std::vector<std::string> dataset_feature_names() {
  std::vector<std::string> names{"Temperature"};
  const auto& d = static_descriptor_names();
  names.insert(names.end(), d.begin(), d.end());
  return names;
}

Dataset assemble(const FilteredRecords& input,
                 const std::vector<std::vector<double>>& temps_per_record,
                 DatasetBuildReport* report) {
  Dataset ds;
  ds.feature_names = dataset_feature_names();
  int total = 0;
  for (const auto& temps : temps_per_record) total += static_cast<int>(temps.size());
  ds.features.resize(total, static_cast<int>(ds.feature_names.size()));
  int row = 0;
  for (std::size_t r = 0; r < input.records.size(); ++r) {
    const auto& temps = temps_per_record[r];
    if (temps.empty()) continue;
    const MoleculeRecord& rec = input.records[r];
    std::vector<double> desc = static_descriptors(input.graphs[r]);
    for (double t : temps) {
      VpValue vp = antoine_vp(rec.antoine, t);
      VpInstance inst;
      inst.molecule_id = rec.id;
      inst.temperature_k = t;
      inst.y_log10_pa = vp.log10_pa;
      inst.extrapolated = vp.extrapolated;
      ds.instances.push_back(std::move(inst));
      ds.features(row, 0) = t;
      for (std::size_t d = 0; d < desc.size(); ++d)
        ds.features(row, static_cast<int>(d + 1)) = desc[d];
      ++row;
    }
  }
  ds.partition.assign(static_cast<std::size_t>(ds.rows()), -1);
  if (report) {
    report->instances = ds.rows();
    report->molecules = static_cast<int>(ds.molecule_ids_in_order().size());
  }
  return ds;
}

}  // namespace

Dataset build_variable_dataset(const FilteredRecords& input, DatasetBuildReport* report,
                               int n_temperatures, double min_sep_k) {
  std::vector<std::vector<double>> temps(input.records.size());
  DatasetBuildReport local;
  for (std::size_t r = 0; r < input.records.size(); ++r) {
    const auto& p = input.records[r].antoine;
    try {
      temps[r] = sample_temperatures(p.t_min_k, p.t_max_k, n_temperatures, min_sep_k);
    } catch (const std::exception& e) {
      local.skipped.push_back({input.records[r].id, e.what()});
    }
  }
  Dataset ds = assemble(input, temps, &local);
  if (report) *report = local;
  return ds;
}

Dataset build_fixed_dataset(const FilteredRecords& input, DatasetBuildReport* report,
                            double t_k) {
  std::vector<std::vector<double>> temps(input.records.size());
  DatasetBuildReport local;
  for (std::size_t r = 0; r < input.records.size(); ++r) {
    if (input.records[r].antoine.in_range(t_k)) {
      temps[r] = {t_k};
    } else {
      local.skipped.push_back({input.records[r].id, "validated range does not contain target temperature"});
    }
  }
  Dataset ds = assemble(input, temps, &local);
  if (report) *report = local;
  return ds;
}

std::string PartitionMap::label_name(int lbl) const {
  if (lbl == n_folds) return "holdout";
  return "fold" + std::to_string(lbl);
}

PartitionMap stratified_group_split(const Dataset& ds, int k_folds, std::uint64_t seed) {
  const int n_parts = k_folds + 1;
  // Per-molecule median target.
  std::map<std::string, std::vector<double>> per_mol;
  for (const auto& inst : ds.instances) per_mol[inst.molecule_id].push_back(inst.y_log10_pa);
  if (static_cast<int>(per_mol.size()) < n_parts)
    throw DatasetError("too few molecules (" + std::to_string(per_mol.size()) +
                       ") for " + std::to_string(n_parts) + " partitions");

  struct MolMedian {
    std::string id;
    double median;
  };
  std::vector<MolMedian> mols;
  mols.reserve(per_mol.size());
  for (auto& [id, ys] : per_mol) {
    std::sort(ys.begin(), ys.end());
    std::size_t m = ys.size();
    double med = (m % 2 == 1) ? ys[m / 2] : 0.5 * (ys[m / 2 - 1] + ys[m / 2]);
    mols.push_back({id, med});
  }
  std::sort(mols.begin(), mols.end(), [](const MolMedian& a, const MolMedian& b) {
    if (a.median != b.median) return a.median < b.median;
    return a.id < b.id;
  });

  PartitionMap pm;
  pm.n_folds = k_folds;
  Rng rng(seed);
  for (std::size_t block = 0; block * static_cast<std::size_t>(n_parts) < mols.size(); ++block) {
    int rotation = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n_parts)));
    for (int k = 0; k < n_parts; ++k) {
      std::size_t idx = block * static_cast<std::size_t>(n_parts) + static_cast<std::size_t>(k);
      if (idx >= mols.size()) break;
      pm.label[mols[idx].id] = (rotation + k) % n_parts;
    }
  }
  return pm;
}

void apply_partitions(Dataset& ds, const PartitionMap& pm) {
  ds.n_folds = pm.n_folds;
  ds.partition.assign(static_cast<std::size_t>(ds.rows()), -1);
  for (int i = 0; i < ds.rows(); ++i) {
    auto it = pm.label.find(ds.instances[static_cast<std::size_t>(i)].molecule_id);
    if (it == pm.label.end())
      throw DatasetError("partition map is missing molecule " +
                         ds.instances[static_cast<std::size_t>(i)].molecule_id);
    ds.partition[static_cast<std::size_t>(i)] = it->second;
  }
}

void write_dataset_csv(const std::string& path, const Dataset& ds) {
  Table t;
  t.header = {"molecule_id", "temperature_K", "log10_vp_pa", "partition"};
  PartitionMap naming;
  naming.n_folds = ds.n_folds > 0 ? ds.n_folds : 3;
  for (int i = 0; i < ds.rows(); ++i) {
    const auto& inst = ds.instances[static_cast<std::size_t>(i)];
    int lbl = ds.partition[static_cast<std::size_t>(i)];
    t.rows.push_back({inst.molecule_id, format_g17(inst.temperature_k),
                      format_g17(inst.y_log10_pa),
                      lbl < 0 ? std::string("unassigned") : naming.label_name(lbl)});
  }
  write_csv(path, t);
}

Dataset read_dataset_csv(const std::string& path) {
  Table t = read_csv(path);
  int c_id = t.require_column("molecule_id");
  int c_t = t.require_column("temperature_K");
  int c_y = t.require_column("log10_vp_pa");
  int c_p = t.require_column("partition");
  Dataset ds;
  int max_fold = -1;
  for (const auto& row : t.rows) {
    VpInstance inst;
    inst.molecule_id = row[static_cast<std::size_t>(c_id)];
    inst.temperature_k = parse_double(row[static_cast<std::size_t>(c_t)]);
    inst.y_log10_pa = parse_double(row[static_cast<std::size_t>(c_y)]);
    ds.instances.push_back(std::move(inst));
    const std::string& p = row[static_cast<std::size_t>(c_p)];
    int lbl = -1;
    if (p == "unassigned") {
      lbl = -1;
    } else if (p == "holdout") {
      lbl = -2;  // resolved after the fold count is known
    } else if (p.rfind("fold", 0) == 0) {
      lbl = static_cast<int>(parse_long(p.substr(4)));
      max_fold = std::max(max_fold, lbl);
    } else {
      throw IoError("bad partition label: " + p);
    }
    ds.partition.push_back(lbl);
  }
  ds.n_folds = max_fold + 1;
  for (auto& lbl : ds.partition)
    if (lbl == -2) lbl = ds.n_folds;
  return ds;
}

void write_features_csv(const std::string& path, const Dataset& ds) {
  Table t;
  t.header.push_back("molecule_id");
  for (const auto& n : ds.feature_names) t.header.push_back(n);
  for (int i = 0; i < ds.rows(); ++i) {
    std::vector<std::string> row{ds.instances[static_cast<std::size_t>(i)].molecule_id};
    for (int j = 0; j < ds.features.cols(); ++j) row.push_back(format_g17(ds.features(i, j)));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

void read_features_csv(const std::string& path, Dataset& ds) {
  Table t = read_csv(path);
  if (static_cast<int>(t.rows.size()) != ds.rows())
    throw IoError("feature matrix has " + std::to_string(t.rows.size()) +
                  " rows, dataset has " + std::to_string(ds.rows()));
  bool has_id = !t.header.empty() && t.header[0] == "molecule_id";
  std::size_t first = has_id ? 1 : 0;
  ds.feature_names.assign(t.header.begin() + static_cast<long>(first), t.header.end());
  ds.features.resize(ds.rows(), static_cast<int>(ds.feature_names.size()));
  for (int i = 0; i < ds.rows(); ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    if (has_id && row[0] != ds.instances[static_cast<std::size_t>(i)].molecule_id)
      throw IoError("feature row " + std::to_string(i) + " is for molecule " + row[0] +
                    ", dataset row is " + ds.instances[static_cast<std::size_t>(i)].molecule_id);
    for (std::size_t j = first; j < row.size(); ++j)
      ds.features(i, static_cast<int>(j - first)) = parse_double(row[j]);
  }
}

}  // namespace volscreen
