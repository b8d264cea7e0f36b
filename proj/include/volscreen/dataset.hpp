#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "volscreen/antoine.hpp"
#include "volscreen/molgraph.hpp"

namespace volscreen {

class DatasetError : public std::runtime_error {
 public:
  explicit DatasetError(const std::string& msg) : std::runtime_error(msg) {}
};

struct MoleculeRecord {
  std::string id;
  std::string smiles;
  AntoineParams antoine;
};

// Input CSV: id,smiles,A,B,C,t_min_K,t_max_K (header required).
std::vector<MoleculeRecord> read_records_csv(const std::string& path);
void write_records_csv(const std::string& path, const std::vector<MoleculeRecord>& records);

struct Rejection {
  std::string id;
  std::string reason;  // "min-carbon", "element set", "duplicate", or a parse message
};

struct FilterReport {
  std::vector<Rejection> rejected;
  std::map<std::string, int> kept_per_category;
  int kept = 0;
};

struct FilteredRecords {
  std::vector<MoleculeRecord> records;
  std::vector<MolGraph> graphs;  // aligned with records
  FilterReport report;
};

// Keeps records whose element category is one of H/C, H/C/O, H/C/F, C/F,
// H/C/O/F and whose carbon count is at least `min_carbons`. Parse failures are
// reported per record, never abort the batch. Duplicate structures (same
// canonical SMILES) keep the first record.
FilteredRecords composition_filter(const std::vector<MoleculeRecord>& records,
                                   int min_carbons = 6);

// n evenly spaced temperatures including both endpoints; if the even spacing
// would fall under min_sep the count is reduced to floor(range/min_sep)+1.
// Throws DatasetError when the range itself is narrower than min_sep.
std::vector<double> sample_temperatures(double t_min_k, double t_max_k, int n = 20,
                                        double min_sep_k = 2.0);

struct VpInstance {
  std::string molecule_id;
  double temperature_k = 0.0;
  double y_log10_pa = 0.0;
  bool extrapolated = false;
};

// Partition labels: 0..n_folds-1 are CV folds, n_folds is the holdout.
struct PartitionMap {
  std::map<std::string, int> label;
  int n_folds = 3;

  int holdout_label() const { return n_folds; }
  std::string label_name(int lbl) const;
};

struct Dataset {
  std::vector<VpInstance> instances;
  std::vector<std::string> feature_names;
  Eigen::MatrixXd features;    // one row per instance
  std::vector<int> partition;  // per instance, -1 when unassigned
  int n_folds = 0;             // 0 until partitions assigned

  int rows() const { return static_cast<int>(instances.size()); }
  Eigen::VectorXd targets() const;
  std::vector<std::string> molecule_ids_in_order() const;  // unique, first-seen order
};

struct DatasetBuildReport {
  std::vector<Rejection> skipped;
  int molecules = 0;
  int instances = 0;
};

// Variable-temperature dataset: per molecule, antoine_vp at sample_temperatures
// over its validated range. Features are Temperature followed by the static
// descriptors of the molecule.
Dataset build_variable_dataset(const FilteredRecords& input, DatasetBuildReport* report,
                               int n_temperatures = 20, double min_sep_k = 2.0);

// Fixed-temperature dataset: one instance per molecule whose validated range
// contains t_k; others are skipped and reported.
Dataset build_fixed_dataset(const FilteredRecords& input, DatasetBuildReport* report,
                            double t_k = 387.0);

// Leakage-free stratified grouping: molecules sorted by their median target,
// then dealt to the k_folds+1 partitions block-by-block with a seeded rotation
// of the deal order per block. Every instance of a molecule lands in exactly
// one partition. Throws DatasetError when there are fewer molecules than
// partitions.
PartitionMap stratified_group_split(const Dataset& ds, int k_folds, std::uint64_t seed);

void apply_partitions(Dataset& ds, const PartitionMap& pm);

// Dataset CSV: molecule_id,temperature_K,log10_vp_pa,partition. Floats carry
// 17 significant digits.
void write_dataset_csv(const std::string& path, const Dataset& ds);
Dataset read_dataset_csv(const std::string& path);  // features left empty

// Feature matrix CSV (wide, named header, molecule_id first column); rows are
// aligned with the dataset CSV.
void write_features_csv(const std::string& path, const Dataset& ds);
void read_features_csv(const std::string& path, Dataset& ds);  // replaces features

}  // namespace volscreen
