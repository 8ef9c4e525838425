#ifndef TIDS_CSV_HPP
#define TIDS_CSV_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "tids/dataset.hpp"

namespace tids {

struct LoadReport {
  std::size_t rows_total = 0;
  std::size_t rows_rejected = 0;
  std::vector<std::string> errors;  // capped, each carries a line number
};

// how the trailing token of a CAN row is interpreted
struct CanLabelPolicy {
  enum class Kind { FlagColumn, LabelColumn };
  Kind kind = Kind::FlagColumn;
  std::string attack_name;  // label for 'T' rows under FlagColumn
};

// rows: timestamp, hex CAN id, dlc, dlc hex data bytes, flag or label.
// features become CAN ID, DLC, DATA[0..7]; bytes past dlc are zero.
// timestamps are parsed and kept out of the feature block.
LabeledDataset load_can_csv(const std::string& path, const CanLabelPolicy& policy,
                            LoadReport* report = nullptr);
LabeledDataset load_can_csv_text(const std::string& text, const CanLabelPolicy& policy,
                                 LoadReport* report = nullptr);

// header row required; the column whose trimmed name is "Label" carries class
// names, every other column parses as a real. Infinity/-Infinity/NaN tokens
// map to non-finite values for sanitize to repair.
LabeledDataset load_flow_csv(const std::string& path, LoadReport* report = nullptr);
LabeledDataset load_flow_csv_text(const std::string& text, LoadReport* report = nullptr);

// canonical form: header row, shortest round-trip decimal features, final
// column Label holding the class name
void write_canonical_csv(const LabeledDataset& d, const std::string& path);
std::string canonical_csv_string(const LabeledDataset& d);

// detection input: same layout as a flow csv but the Label column is optional.
// when present its raw strings are kept so callers can score against them.
struct FeatureTable {
  Matrix features;
  std::vector<std::string> feature_names;
  std::vector<std::string> labels;  // empty when the file had no Label column
};

FeatureTable load_feature_csv(const std::string& path, LoadReport* report = nullptr);
FeatureTable load_feature_csv_text(const std::string& text, LoadReport* report = nullptr);

}  // namespace tids

#endif
