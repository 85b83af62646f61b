#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "pnskit/discrete_dataset.hpp"
#include "pnskit/raw_table.hpp"

namespace pnskit {

enum class RecodeOp { Ge, Gt, Le, Lt, In, Map };
enum class MissingPolicy { Drop, Keep };

// One source condition of a rule. Threshold ops compare against `threshold`;
// `In` tests membership in `values` (rejecting anything outside `domain` when
// a domain is given); `Map` sends each listed code to 0 or 1 and rejects
// unlisted codes.
struct RecodeCondition {
  std::string source;
  RecodeOp op = RecodeOp::Ge;
  double threshold = 0.0;
  std::set<double> values;
  std::optional<std::set<double>> domain;
  std::map<double, int> mapping;
  // Raw codes read as missing for this source.
  std::set<double> missing_codes;
};

// Binary target built from one or more conditions. With several conditions
// the target is 1 when any (or all, with combine_all) holds; missing sources
// follow three-valued logic, so a decided result wins over a missing one.
struct RecodeRule {
  std::string target;
  std::vector<RecodeCondition> conditions;
  bool combine_all = false;
  MissingPolicy missing = MissingPolicy::Drop;
};

// Copies a raw categorical variable unchanged (integer codes only).
struct Passthrough {
  std::string source;
  std::string target;
  std::vector<int> levels;
  std::set<double> missing_codes;
  MissingPolicy missing = MissingPolicy::Drop;
};

struct RecodeConfig {
  std::vector<RecodeRule> rules;
  std::vector<Passthrough> passthrough;
};

struct RecodeResult {
  DiscreteDataset dataset;
  std::size_t dropped_rows = 0;
  // Per target: rows dropped because that target was missing.
  std::map<std::string, std::size_t> missing_by_target;
};

// NHANES questionnaire conventions: 7/77/777 refused, 9/99/999 don't know.
const std::set<double>& default_questionnaire_missing_codes();

// Reads the JSON rule file. A rule looks like
//   {"target": "obese", "source": "BMXBMI", "op": "ge", "value": 30.0}
// and multi-source rules give arrays for source/op/value plus "combine".
// "missing" is "drop", "keep", or {"policy": ..., "codes": [...]}. Threshold
// rules default to no missing codes; "in"/"map" rules default to the
// questionnaire codes. Throws InvalidConfig.
RecodeConfig parse_recode_config(std::string_view json_text);
RecodeConfig read_recode_config(const std::filesystem::path& path);

// Produces a dataset holding the passthrough variables and rule targets, in
// config order. Throws UnknownVariable and UnmappedValue (with row and value).
RecodeResult apply_recode(const RawTable& t, const RecodeConfig& config);

}  // namespace pnskit
