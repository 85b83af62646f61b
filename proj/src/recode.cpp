#include "pnskit/recode.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

#include "pnskit/error.hpp"

namespace pnskit {

const std::set<double>& default_questionnaire_missing_codes() {
  static const std::set<double> codes{7, 9, 77, 99, 777, 999};
  return codes;
}

namespace {

using nlohmann::json;

RecodeOp parse_op(const std::string& s) {
  if (s == "ge") return RecodeOp::Ge;
  if (s == "gt") return RecodeOp::Gt;
  if (s == "le") return RecodeOp::Le;
  if (s == "lt") return RecodeOp::Lt;
  if (s == "in") return RecodeOp::In;
  if (s == "map") return RecodeOp::Map;
  throw Error(Errc::InvalidConfig, "unknown op '" + s + "'");
}

bool is_threshold(RecodeOp op) { return op != RecodeOp::In && op != RecodeOp::Map; }

// Accepts a scalar or an array; a scalar is broadcast to `n` entries.
std::vector<json> spread(const json& j, std::size_t n, const char* key) {
  if (j.is_array()) {
    if (j.size() != n) throw Error(Errc::InvalidConfig, std::string(key) + " must have one entry per source");
    return {j.begin(), j.end()};
  }
  return std::vector<json>(n, j);
}

struct MissingSpec {
  MissingPolicy policy = MissingPolicy::Drop;
  std::optional<std::set<double>> codes;
};

MissingSpec parse_missing(const json& rule) {
  MissingSpec m;
  if (!rule.contains("missing")) return m;
  const auto& j = rule.at("missing");
  auto policy = [](const std::string& s) {
    if (s == "drop") return MissingPolicy::Drop;
    if (s == "keep") return MissingPolicy::Keep;
    throw Error(Errc::InvalidConfig, "missing policy must be 'drop' or 'keep', got '" + s + "'");
  };
  if (j.is_string()) {
    m.policy = policy(j.get<std::string>());
  } else if (j.is_object()) {
    if (j.contains("policy")) m.policy = policy(j.at("policy").get<std::string>());
    if (j.contains("codes")) m.codes = j.at("codes").get<std::set<double>>();
  } else if (j.is_array()) {
    m.codes = j.get<std::set<double>>();
  } else {
    throw Error(Errc::InvalidConfig, "unreadable 'missing' field");
  }
  return m;
}

RecodeCondition parse_condition(const std::string& source, const std::string& op, const json& value,
                                const json& rule, const MissingSpec& missing) {
  RecodeCondition c;
  c.source = source;
  c.op = parse_op(op);
  if (is_threshold(c.op)) {
    if (!value.is_number()) throw Error(Errc::InvalidConfig, source + ": threshold op needs a numeric value");
    c.threshold = value.get<double>();
  } else if (c.op == RecodeOp::In) {
    c.values = value.get<std::set<double>>();
    if (rule.contains("domain")) c.domain = rule.at("domain").get<std::set<double>>();
  } else {
    if (!value.is_object()) throw Error(Errc::InvalidConfig, source + ": map op needs an object of code -> 0/1");
    for (const auto& [code, out] : value.items()) {
      const int target = out.get<int>();
      if (target != 0 && target != 1) throw Error(Errc::InvalidConfig, source + ": map targets must be 0 or 1");
      try {
        c.mapping[std::stod(code)] = target;
      } catch (const std::exception&) {
        throw Error(Errc::InvalidConfig, source + ": map key '" + code + "' is not numeric");
      }
    }
  }
  c.missing_codes = missing.codes ? *missing.codes
                    : is_threshold(c.op) ? std::set<double>{}
                                         : default_questionnaire_missing_codes();
  for (double code : c.missing_codes) {
    if (c.mapping.count(code)) {
      throw Error(Errc::InvalidConfig, source + ": code " + std::to_string(code) + " is both mapped and missing");
    }
  }
  return c;
}

RecodeRule parse_rule(const json& j) {
  RecodeRule r;
  r.target = j.at("target").get<std::string>();
  const auto missing = parse_missing(j);
  r.missing = missing.policy;
  r.combine_all = j.value("combine", "any") == "all";
  if (j.contains("combine") && j.at("combine") != "any" && j.at("combine") != "all") {
    throw Error(Errc::InvalidConfig, r.target + ": combine must be 'any' or 'all'");
  }

  std::vector<std::string> sources;
  if (j.at("source").is_array()) {
    sources = j.at("source").get<std::vector<std::string>>();
  } else {
    sources.push_back(j.at("source").get<std::string>());
  }
  if (sources.empty()) throw Error(Errc::InvalidConfig, r.target + ": no sources");

  const json& value = j.contains("values") ? j.at("values") : j.contains("value") ? j.at("value") : j.at("map");
  const auto ops = spread(j.at("op"), sources.size(), "op");
  // `in` takes a list per source; only spread when there are several sources.
  std::vector<json> vals;
  if (sources.size() == 1) {
    vals.push_back(value);
  } else {
    vals = spread(value, sources.size(), "value");
  }
  for (std::size_t i = 0; i < sources.size(); ++i) {
    r.conditions.push_back(parse_condition(sources[i], ops[i].get<std::string>(), vals[i], j, missing));
  }
  return r;
}

}  // namespace

RecodeConfig parse_recode_config(std::string_view json_text) {
  RecodeConfig cfg;
  try {
    const auto doc = json::parse(json_text);
    for (const auto& j : doc.value("rules", json::array())) cfg.rules.push_back(parse_rule(j));
    for (const auto& j : doc.value("passthrough", json::array())) {
      Passthrough p;
      p.source = j.at("source").get<std::string>();
      p.target = j.value("target", p.source);
      p.levels = j.at("levels").get<std::vector<int>>();
      std::sort(p.levels.begin(), p.levels.end());
      const auto missing = parse_missing(j);
      p.missing = missing.policy;
      p.missing_codes = missing.codes ? *missing.codes : default_questionnaire_missing_codes();
      for (int l : p.levels) {
        if (p.missing_codes.count(l)) {
          throw Error(Errc::InvalidConfig, p.source + ": level " + std::to_string(l) + " is also a missing code");
        }
      }
      cfg.passthrough.push_back(std::move(p));
    }
  } catch (const json::exception& e) {
    throw Error(Errc::InvalidConfig, e.what());
  }
  std::set<std::string> targets;
  for (const auto& p : cfg.passthrough) {
    if (!targets.insert(p.target).second) throw Error(Errc::InvalidConfig, "target '" + p.target + "' defined twice");
  }
  for (const auto& r : cfg.rules) {
    if (!targets.insert(r.target).second) throw Error(Errc::InvalidConfig, "target '" + r.target + "' defined twice");
  }
  return cfg;
}

RecodeConfig read_recode_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(Errc::IoError, "cannot open recode config " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_recode_config(buf.str());
}

namespace {

// -1 missing, otherwise 0/1.
int evaluate(const RecodeCondition& c, const Cell& cell, std::size_t row) {
  if (is_missing(cell)) return -1;
  double v = 0;
  if (const double* d = std::get_if<double>(&cell)) {
    v = *d;
  } else {
    const auto& s = std::get<std::string>(cell);
    try {
      std::size_t used = 0;
      v = std::stod(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
    } catch (const std::exception&) {
      throw Error(Errc::UnmappedValue, c.source + " row " + std::to_string(row) + ": text value '" + s + "'");
    }
  }
  if (c.missing_codes.count(v)) return -1;
  switch (c.op) {
    case RecodeOp::Ge: return v >= c.threshold;
    case RecodeOp::Gt: return v > c.threshold;
    case RecodeOp::Le: return v <= c.threshold;
    case RecodeOp::Lt: return v < c.threshold;
    case RecodeOp::In:
      if (c.domain && !c.domain->count(v)) {
        throw Error(Errc::UnmappedValue, c.source + " row " + std::to_string(row) + ": value " + std::to_string(v) +
                                             " outside the declared domain");
      }
      return c.values.count(v) > 0;
    case RecodeOp::Map: {
      auto it = c.mapping.find(v);
      if (it == c.mapping.end()) {
        throw Error(Errc::UnmappedValue,
                    c.source + " row " + std::to_string(row) + ": value " + std::to_string(v) + " has no mapping");
      }
      return it->second;
    }
  }
  return -1;
}

}  // namespace

RecodeResult apply_recode(const RawTable& t, const RecodeConfig& config) {
  struct Column {
    DiscreteVariable var;
    MissingPolicy policy;
    std::vector<int> values;
  };
  std::vector<Column> cols;

  for (const auto& p : config.passthrough) {
    const std::size_t src = t.column(p.source);
    Column col{DiscreteVariable{p.target, p.levels, p.missing == MissingPolicy::Keep}, p.missing, {}};
    col.values.reserve(t.num_rows());
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
      const Cell& cell = t.rows[r][src];
      const double* v = std::get_if<double>(&cell);
      if (is_missing(cell) || (v && p.missing_codes.count(*v))) {
        col.values.push_back(kMissingLevel);
        continue;
      }
      if (!v || *v != std::floor(*v) || !col.var.has_level(static_cast<int>(*v))) {
        throw Error(Errc::UnmappedValue, p.source + " row " + std::to_string(r) + ": value is not a declared level");
      }
      col.values.push_back(static_cast<int>(*v));
    }
    cols.push_back(std::move(col));
  }

  for (const auto& rule : config.rules) {
    std::vector<std::size_t> src;
    for (const auto& c : rule.conditions) src.push_back(t.column(c.source));
    Column col{DiscreteVariable{rule.target, {0, 1}, rule.missing == MissingPolicy::Keep}, rule.missing, {}};
    col.values.reserve(t.num_rows());
    for (std::size_t r = 0; r < t.num_rows(); ++r) {
      bool any_missing = false, any_true = false, any_false = false;
      for (std::size_t i = 0; i < rule.conditions.size(); ++i) {
        const int v = evaluate(rule.conditions[i], t.rows[r][src[i]], r);
        if (v < 0) {
          any_missing = true;
        } else if (v) {
          any_true = true;
        } else {
          any_false = true;
        }
      }
      int out;
      if (rule.combine_all) {
        out = any_false ? 0 : any_missing ? kMissingLevel : 1;
      } else {
        out = any_true ? 1 : any_missing ? kMissingLevel : 0;
      }
      col.values.push_back(out);
    }
    cols.push_back(std::move(col));
  }

  RecodeResult res;
  std::vector<std::size_t> keep;
  for (std::size_t r = 0; r < t.num_rows(); ++r) {
    bool drop = false;
    for (const auto& col : cols) {
      if (col.values[r] == kMissingLevel && col.policy == MissingPolicy::Drop) {
        ++res.missing_by_target[col.var.name];
        drop = true;
      }
    }
    if (drop) {
      ++res.dropped_rows;
    } else {
      keep.push_back(r);
    }
  }

  std::vector<DiscreteVariable> vars;
  std::vector<std::vector<int>> data;
  for (auto& col : cols) {
    std::vector<int> kept;
    kept.reserve(keep.size());
    for (std::size_t r : keep) kept.push_back(col.values[r]);
    vars.push_back(std::move(col.var));
    data.push_back(std::move(kept));
  }
  res.dataset = DiscreteDataset(std::move(vars), std::move(data));
  return res;
}

}  // namespace pnskit
