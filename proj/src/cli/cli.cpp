#include "pnskit/cli.hpp"

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <optional>
#include <sstream>

#include "pnskit/bounds.hpp"
#include "pnskit/csv.hpp"
#include "pnskit/discovery.hpp"
#include "pnskit/discrete_dataset.hpp"
#include "pnskit/error.hpp"
#include "pnskit/estimate.hpp"
#include "pnskit/graph.hpp"
#include "pnskit/graph_io.hpp"
#include "pnskit/numeric.hpp"
#include "pnskit/oracle.hpp"
#include "pnskit/parallel.hpp"
#include "pnskit/recode.hpp"
#include "pnskit/subgroup.hpp"
#include "pnskit/validation.hpp"
#include "pnskit/xpt.hpp"

namespace pnskit::cli {

namespace {

using json = nlohmann::ordered_json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string fixed10(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10f", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string part;
  while (std::getline(ss, part, ',')) {
    const auto b = part.find_first_not_of(' ');
    const auto e = part.find_last_not_of(' ');
    if (b != std::string::npos) out.push_back(part.substr(b, e - b + 1));
  }
  return out;
}

Event event_flag(const std::string& flag, const std::string& text) {
  try {
    Event e = parse_event(text);
    if (e.size() != 1) throw UsageError(flag + ": expected a single NAME=LEVEL, got '" + text + "'");
    return e;
  } catch (const Error& e) {
    throw UsageError(flag + ": " + e.detail());
  }
}

json set_json(const NodeSet& s) { return json(std::vector<std::string>(s.begin(), s.end())); }

json interval_json(const PnsInterval& iv) {
  json binding = json::array();
  for (const auto& b : iv.binding) {
    binding.push_back({{"stratum", b.stratum},
                       {"lower", std::string(lower_term_name(iv.method, b.lower_arg))},
                       {"upper", std::string(upper_term_name(iv.method, b.upper_arg))}});
  }
  return {{"method", std::string(method_tag(iv.method))},
          {"lower", round10(iv.lower)},
          {"upper", round10(iv.upper)},
          {"binding", binding}};
}

json quantities_json(const CausalQuantities& q) {
  return {{"p_yx", round10(q.p_yx)},         {"p_yxp", round10(q.p_yxp)},
          {"p_xy", round10(q.p_xy)},         {"p_xy_not", round10(q.p_xy_not)},
          {"p_x_not_y", round10(q.p_x_not_y)}, {"p_x_not_y_not", round10(q.p_x_not_y_not)},
          {"p_y", round10(q.p_y)}};
}

json adjust_json(const AdjustResult& r) {
  json strata = json::array();
  for (const auto& s : r.strata) {
    strata.push_back({{"z", s.z.empty() ? std::string("{}") : format_event(s.z)},
                      {"weight", round10(s.weight)},
                      {"support", s.support},
                      {"p_outcome", round10(s.p_outcome)}});
  }
  return {{"value", round10(r.value)}, {"strata", strata}};
}

// Rewrites every non-integer number token outside strings with at most 10
// decimals, trailing zeros trimmed.
std::string dump_report(const json& doc) {
  const std::string raw = doc.dump(2);
  std::string out;
  out.reserve(raw.size());
  bool in_string = false;
  for (std::size_t i = 0; i < raw.size();) {
    const char c = raw[i];
    if (in_string) {
      out += c;
      if (c == '\\' && i + 1 < raw.size()) {
        out += raw[i + 1];
        i += 2;
        continue;
      }
      if (c == '"') in_string = false;
      ++i;
      continue;
    }
    if (c == '"') {
      in_string = true;
      out += c;
      ++i;
      continue;
    }
    if (c == '-' || (c >= '0' && c <= '9')) {
      std::size_t j = i;
      while (j < raw.size() && std::string_view("0123456789+-.eE").find(raw[j]) != std::string_view::npos) ++j;
      const std::string token = raw.substr(i, j - i);
      if (token.find_first_of(".eE") != std::string::npos) {
        std::string f = fixed10(std::strtod(token.c_str(), nullptr));
        while (f.back() == '0' && f[f.size() - 2] != '.') f.pop_back();
        out += f == "-0.0" ? "0.0" : f;
      } else {
        out += token;
      }
      i = j;
      continue;
    }
    out += c;
    ++i;
  }
  return out;
}

// Output sink shared by all subcommands: echoes the resolved configuration
// and then either human-readable lines or one JSON document.
class Reporter {
 public:
  Reporter(std::ostream& out, bool structured, std::string command)
      : out_(out), structured_(structured), command_(std::move(command)) {}

  bool structured() const { return structured_; }
  json& config() { return config_; }
  json& result() { return result_; }
  std::ostream& text() { return text_; }

  void finish() {
    if (structured_) {
      json doc;
      doc["format"] = "pns-toolkit-report";
      doc["version"] = "v1";
      doc["command"] = command_;
      doc["config"] = config_;
      doc["result"] = result_;
      out_ << dump_report(doc) << "\n";
      return;
    }
    out_ << "# command: " << command_ << "\n";
    for (const auto& [k, v] : config_.items()) {
      out_ << "# " << k << ": " << (v.is_string() ? v.get<std::string>() : v.dump()) << "\n";
    }
    out_ << text_.str();
  }

 private:
  std::ostream& out_;
  bool structured_;
  std::string command_;
  json config_ = json::object();
  json result_ = json::object();
  std::ostringstream text_;
};

void write_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::IoError, "cannot write " + path);
  f << content;
  if (!f) throw Error(Errc::IoError, "write failed for " + path);
}

// Adjustment set: explicit list, else the first minimal backdoor set of the
// graph, else empty.
struct ResolvedZ {
  std::vector<std::string> z;
  std::string source;
  std::optional<bool> admissible;
};

ResolvedZ resolve_z(const std::optional<std::string>& adjust, const std::optional<CausalGraph>& graph,
                    const std::string& x, const std::string& y, std::size_t max_set_size) {
  ResolvedZ r;
  if (adjust) {
    r.z = split_list(*adjust);
    r.source = "explicit";
    if (graph && graph->contains(x) && graph->contains(y)) {
      bool known = true;
      for (const auto& v : r.z) known = known && graph->contains(v);
      if (known) r.admissible = satisfies_backdoor(*graph, x, y, NodeSet(r.z.begin(), r.z.end()));
    }
    return r;
  }
  if (graph) {
    if (!graph->contains(x) || !graph->contains(y)) {
      throw Error(Errc::NoAdmissibleSet, "graph does not contain both '" + x + "' and '" + y + "'");
    }
    const auto sets = find_backdoor_sets(*graph, x, y, max_set_size);
    if (sets.empty()) throw Error(Errc::NoAdmissibleSet, "no backdoor set for (" + x + ", " + y + ")");
    r.z.assign(sets.front().begin(), sets.front().end());
    r.source = "first minimal backdoor set";
    r.admissible = true;
    return r;
  }
  r.source = "none (no graph, no --adjust)";
  return r;
}

// ---- subcommands -----------------------------------------------------------

struct IngestOpts {
  std::vector<std::string> xpt, csv;
  std::string key = "SEQN";
  std::string recode, out;
};

void cmd_ingest(const IngestOpts& o, Reporter& rep) {
  if (o.xpt.empty() && o.csv.empty()) throw UsageError("ingest: give at least one --xpt or --csv file");
  rep.config()["xpt"] = o.xpt;
  rep.config()["csv"] = o.csv;
  rep.config()["key"] = o.key;
  rep.config()["recode"] = o.recode;
  rep.config()["out"] = o.out;

  std::vector<RawTable> tables;
  json inputs = json::array();
  for (const auto& f : o.xpt) {
    tables.push_back(read_xpt_file(f));
    inputs.push_back({{"file", f}, {"rows", tables.back().num_rows()}, {"variables", tables.back().schema.size()}});
  }
  for (const auto& f : o.csv) {
    tables.push_back(read_csv_file(f));
    inputs.push_back({{"file", f}, {"rows", tables.back().num_rows()}, {"variables", tables.back().schema.size()}});
  }
  const RawTable merged = tables.size() == 1 ? tables.front() : merge_by_key(tables, o.key);
  const RecodeConfig cfg = read_recode_config(o.recode);
  RecodeResult res = apply_recode(merged, cfg);

  std::string sources;
  for (const auto& f : o.xpt) sources += (sources.empty() ? "" : ",") + f;
  for (const auto& f : o.csv) sources += (sources.empty() ? "" : ",") + f;
  res.dataset.metadata["generator"] = "ingest";
  res.dataset.metadata["sources"] = sources;
  res.dataset.metadata["recode"] = o.recode;
  res.dataset.metadata["missing_policy"] = "per-rule; rows kept as missing are dropped per analysis";
  write_dataset(res.dataset, o.out);

  json missing = json::object();
  for (const auto& [k, v] : res.missing_by_target) missing[k] = v;
  rep.result() = {{"inputs", inputs},
                  {"merged_rows", merged.num_rows()},
                  {"rows", res.dataset.n()},
                  {"dropped_rows", res.dropped_rows},
                  {"missing_by_target", missing},
                  {"variables", res.dataset.names()}};
  auto& t = rep.text();
  t << "merged rows:  " << merged.num_rows() << "\n";
  t << "dropped rows: " << res.dropped_rows << "\n";
  for (const auto& [k, v] : res.missing_by_target) t << "  missing " << k << ": " << v << "\n";
  t << "written rows: " << res.dataset.n() << " -> " << o.out << "\n";
}

struct DiscoverOpts {
  std::string dataset;
  double alpha = 0.01;
  std::size_t max_cond = 3;
  std::string vars;
  std::string out, dot;
};

void cmd_discover(const DiscoverOpts& o, Reporter& rep) {
  if (!(o.alpha > 0.0 && o.alpha < 1.0)) throw UsageError("--alpha must lie in (0,1)");
  const DiscreteDataset d = read_dataset(o.dataset);
  const std::vector<std::string> vars = o.vars.empty() ? d.names() : split_list(o.vars);
  rep.config()["dataset"] = o.dataset;
  rep.config()["alpha"] = o.alpha;
  rep.config()["max_cond"] = o.max_cond;
  rep.config()["vars"] = vars;
  rep.config()["ci_test"] = "G2, chi-square reference, sparse strata pooled";

  const JointTable t = tabulate(d, vars);
  const Skeleton s = learn_skeleton(t, o.alpha, o.max_cond);
  const CpdagResult g = complete_orientation(orient_v_structures(s));
  const GraphFile f = g.to_graph_file();
  if (!o.out.empty()) write_file(o.out, write_graph_text(f));
  if (!o.dot.empty()) write_file(o.dot, write_graph_dot(f));

  json sepsets = json::array();
  for (const auto& [k, v] : g.sepsets) sepsets.push_back({{"a", k.first}, {"b", k.second}, {"set", set_json(v)}});
  json directed = json::array(), undirected = json::array();
  for (const auto& e : f.directed) directed.push_back({e.first, e.second});
  for (const auto& e : f.undirected) undirected.push_back({e.first, e.second});
  rep.result() = {{"n", t.total()},
                  {"excluded_rows", t.excluded_rows()},
                  {"tests", s.tests},
                  {"nodes", f.nodes},
                  {"directed", directed},
                  {"undirected", undirected},
                  {"sepsets", sepsets},
                  {"conflicts", g.conflicts}};
  auto& out = rep.text();
  out << "# rows used: " << t.total() << " (excluded " << t.excluded_rows() << "), CI tests: " << s.tests << "\n";
  for (const auto& c : g.conflicts) out << "# conflicting v-structures left undirected: " << c << "\n";
  out << write_graph_text(f);
}

struct IdentifyOpts {
  std::string graph, x, y;
  std::size_t max_size = 4;
  std::optional<std::string> check;
};

void cmd_identify(const IdentifyOpts& o, Reporter& rep) {
  const CausalGraph g = read_graph(o.graph);
  rep.config()["graph"] = o.graph;
  rep.config()["x"] = o.x;
  rep.config()["y"] = o.y;
  rep.config()["max_size"] = o.max_size;
  const auto sets = find_backdoor_sets(g, o.x, o.y, o.max_size);
  json js = json::array();
  for (const auto& s : sets) js.push_back(set_json(s));
  rep.result()["sets"] = js;
  if (sets.empty()) rep.text() << "(none)\n";
  for (const auto& s : sets) rep.text() << format_node_set(s) << "\n";
  if (o.check) {
    const auto z = split_list(*o.check);
    const NodeSet zs(z.begin(), z.end());
    const bool ok = satisfies_backdoor(g, o.x, o.y, zs);
    rep.config()["check"] = z;
    rep.result()["check"] = {{"set", set_json(zs)}, {"admissible", ok}};
    rep.text() << "check " << format_node_set(zs) << ": " << (ok ? "admissible" : "not admissible") << "\n";
  }
}

struct DoOpts {
  std::string dataset, x, y;
  std::optional<std::string> adjust, graph;
  double smoothing = 0.0;
  std::size_t max_set_size = 4;
};

void write_strata(std::ostream& out, const std::string& label, const AdjustResult& r) {
  out << label << " = " << fixed10(r.value) << "\n";
  for (const auto& s : r.strata) {
    out << "  stratum " << (s.z.empty() ? std::string("{}") : format_event(s.z)) << ": P(z)=" << fixed10(s.weight)
        << " n(x,z)=" << s.support << " P(y|x,z)=" << fixed10(s.p_outcome) << "\n";
  }
}

void cmd_do(const DoOpts& o, Reporter& rep) {
  const Event x = event_flag("--x", o.x);
  const Event y = event_flag("--y", o.y);
  if (o.smoothing < 0.0) throw UsageError("--smoothing must be non-negative");
  const DiscreteDataset d = read_dataset(o.dataset);
  std::optional<CausalGraph> g;
  if (o.graph) g = read_graph(*o.graph);
  const ResolvedZ z = resolve_z(o.adjust, g, x.begin()->first, y.begin()->first, o.max_set_size);
  rep.config()["dataset"] = o.dataset;
  if (o.graph) rep.config()["graph"] = *o.graph;
  rep.config()["x"] = format_event(x);
  rep.config()["y"] = format_event(y);
  rep.config()["adjust"] = z.z;
  rep.config()["adjust_source"] = z.source;
  rep.config()["smoothing"] = o.smoothing;
  rep.config()["missing"] = "per-analysis deletion";

  std::vector<std::string> vars = z.z;
  vars.push_back(x.begin()->first);
  vars.push_back(y.begin()->first);
  const JointTable t = tabulate(d, vars);
  const Event xp = complement(t, x);
  const AdjustResult d1 = do_adjust(t, x, y, z.z, o.smoothing);
  const AdjustResult d0 = do_adjust(t, xp, y, z.z, o.smoothing);
  rep.result() = {{"n", t.total()},
                  {"excluded_rows", t.excluded_rows()},
                  {"adjust", z.z},
                  {"do_x", adjust_json(d1)},
                  {"do_x_not", adjust_json(d0)}};
  if (z.admissible) rep.result()["admissible"] = *z.admissible;
  auto& out = rep.text();
  out << "rows used: " << t.total() << " (excluded " << t.excluded_rows() << ")\n";
  if (z.admissible && !*z.admissible) out << "warning: adjustment set fails the backdoor criterion in the graph\n";
  write_strata(out, "P(" + format_event(y) + " | do(" + format_event(x) + "))", d1);
  write_strata(out, "P(" + format_event(y) + " | do(" + format_event(xp) + "))", d0);
}

struct PnsOpts {
  std::string dataset, x, y;
  std::optional<std::string> graph, adjust;
  std::string method = "all";
  bool all_sets = false;
  std::size_t max_set_size = 4;
};

void cmd_pns(const PnsOpts& o, Reporter& rep) {
  const Event x = event_flag("--x", o.x);
  const Event y = event_flag("--y", o.y);
  std::vector<BoundMethod> methods;
  if (o.method == "all") {
    methods = {BoundMethod::TianPearl, BoundMethod::Covariate, BoundMethod::Backdoor};
  } else {
    try {
      methods = {parse_method_tag(o.method)};
    } catch (const Error& e) {
      throw UsageError("--method: " + e.detail());
    }
  }
  const DiscreteDataset d = read_dataset(o.dataset);
  std::optional<CausalGraph> g;
  if (o.graph) g = read_graph(*o.graph);

  PnsReportOptions opts;
  opts.max_set_size = o.max_set_size;
  opts.all_minimal_sets = o.all_sets;
  if (o.adjust) {
    opts.policy = AdjustmentPolicy::Explicit;
    const auto z = split_list(*o.adjust);
    opts.explicit_set = NodeSet(z.begin(), z.end());
  } else if (!g) {
    opts.policy = AdjustmentPolicy::Explicit;
  }
  const PnsReport r = pns_report(d, g ? &*g : nullptr, x, y, opts);

  rep.config()["dataset"] = o.dataset;
  if (o.graph) rep.config()["graph"] = *o.graph;
  rep.config()["x"] = format_event(x);
  rep.config()["y"] = format_event(y);
  rep.config()["adjust"] = set_json(r.z);
  rep.config()["adjust_source"] = o.adjust ? "explicit" : g ? "first minimal backdoor set" : "none (no graph, no --adjust)";
  rep.config()["method"] = o.method;
  rep.config()["all_sets"] = o.all_sets;
  rep.config()["missing"] = "per-analysis deletion";

  json intervals = json::object();
  auto pick = [&](BoundMethod m) -> const PnsInterval& {
    return m == BoundMethod::TianPearl ? r.tp : m == BoundMethod::Covariate ? r.thm1 : r.thm2;
  };
  for (BoundMethod m : methods) intervals[std::string(method_tag(m))] = interval_json(pick(m));
  json strata = json::array();
  for (const auto& s : r.strata) {
    strata.push_back({{"z", s.label}, {"weight", round10(s.weight)}, {"quantities", quantities_json(s.quantities)}});
  }
  json alternatives = json::array();
  for (const auto& a : r.alternatives) alternatives.push_back({{"adjust", set_json(a.z)}, {"thm2", interval_json(a.backdoor)}});
  rep.result() = {{"adjust", set_json(r.z)},
                  {"checked", r.z_checked},
                  {"admissible", r.z_admissible},
                  {"n", r.n},
                  {"excluded_rows", r.excluded_rows},
                  {"do_x", round10(r.do_x.value)},
                  {"do_x_not", round10(r.do_x_not.value)},
                  {"quantities", quantities_json(r.quantities)},
                  {"intervals", intervals},
                  {"strata", strata},
                  {"alternatives", alternatives}};

  auto& out = rep.text();
  out << "adjustment set: " << format_node_set(r.z);
  if (r.z_checked) out << (r.z_admissible ? " (backdoor-admissible)" : " (NOT backdoor-admissible)");
  out << "\nrows used: " << r.n << " (excluded " << r.excluded_rows << ")\n";
  out << "P(y|do(x))  = " << fixed10(r.do_x.value) << "\nP(y|do(x')) = " << fixed10(r.do_x_not.value) << "\n\n";
  out << "method  lower         upper         binding\n";
  for (BoundMethod m : methods) {
    const PnsInterval& iv = pick(m);
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-7s %-13s %-13s ", std::string(method_tag(m)).c_str(), fixed10(iv.lower).c_str(),
                  fixed10(iv.upper).c_str());
    out << buf;
    if (iv.binding.size() == 1) {
      out << "max=" << lower_term_name(m, iv.binding[0].lower_arg) << " min=" << upper_term_name(m, iv.binding[0].upper_arg);
    } else {
      out << iv.binding.size() << " strata";
    }
    out << "\n";
    if (iv.binding.size() > 1) {
      for (const auto& b : iv.binding) {
        out << "        " << b.stratum << ": max=" << lower_term_name(m, b.lower_arg)
            << " min=" << upper_term_name(m, b.upper_arg) << "\n";
      }
    }
  }
  for (const auto& a : r.alternatives) {
    out << "thm2 with " << format_node_set(a.z) << ": [" << fixed10(a.backdoor.lower) << ", "
        << fixed10(a.backdoor.upper) << "]\n";
  }
}

struct SubgroupsOpts {
  std::string dataset, x, y;
  std::optional<std::string> graph, adjust;
  std::string vars;
  std::vector<std::string> specs;
  std::size_t depth = 1;
  std::size_t min_n = 0;
  double margin = 0.05;
  double confidence = 0.95;
  std::string out;
};

json subgroup_json(const SubgroupReport& r) {
  json constraints = json::array();
  for (const auto& c : r.spec.constraints) constraints.push_back({{"variable", c.variable}, {"levels", c.levels}});
  return {{"name", r.spec.name},
          {"constraints", constraints},
          {"rows", r.rows},
          {"n", r.n},
          {"required_n", r.required},
          {"meets_size", r.meets_size},
          {"margin", round10(r.margin)},
          {"do_x", round10(r.do_x)},
          {"do_x_not", round10(r.do_x_not)},
          {"interval", interval_json(r.interval)}};
}

void cmd_subgroups(const SubgroupsOpts& o, Reporter& rep) {
  const Event x = event_flag("--x", o.x);
  const Event y = event_flag("--y", o.y);
  if (o.vars.empty() && o.specs.empty()) throw UsageError("subgroups: give --vars or at least one --spec");
  std::vector<SubgroupSpec> specs;
  for (const auto& s : o.specs) {
    try {
      specs.push_back(parse_subgroup_spec(s));
    } catch (const Error& e) {
      throw UsageError("--spec: " + e.detail());
    }
  }
  const std::size_t required = required_n(o.margin, o.confidence);
  const DiscreteDataset d = read_dataset(o.dataset);
  std::optional<CausalGraph> g;
  if (o.graph) g = read_graph(*o.graph);
  const ResolvedZ z = resolve_z(o.adjust, g, x.begin()->first, y.begin()->first, 4);

  rep.config()["dataset"] = o.dataset;
  if (o.graph) rep.config()["graph"] = *o.graph;
  rep.config()["x"] = format_event(x);
  rep.config()["y"] = format_event(y);
  rep.config()["adjust"] = z.z;
  rep.config()["adjust_source"] = z.source;
  rep.config()["vars"] = split_list(o.vars);
  rep.config()["specs"] = o.specs;
  rep.config()["depth"] = o.depth;
  rep.config()["min_n"] = o.min_n;
  rep.config()["margin"] = o.margin;
  rep.config()["confidence"] = o.confidence;
  rep.config()["required_n"] = required;

  SubgroupConfig cfg{o.margin, o.confidence};
  std::vector<SubgroupReport> reports;
  for (const auto& s : specs) reports.push_back(analyze_subgroup(d, s, x, y, z.z, cfg));
  ScanResult scan;
  if (!o.vars.empty()) {
    ScanOptions so;
    so.depth = o.depth;
    so.min_n = o.min_n;
    so.config = cfg;
    const auto candidates = split_list(o.vars);
    scan = scan_subgroups(d, candidates, x, y, z.z, so);
    reports.insert(reports.end(), scan.reports.begin(), scan.reports.end());
  }

  json jr = json::array();
  for (const auto& r : reports) jr.push_back(subgroup_json(r));
  json skipped = json::array();
  for (const auto& s : scan.skipped) skipped.push_back({{"name", s.name}, {"reason", s.reason}});
  rep.result() = {{"required_n", required}, {"candidates", scan.candidates}, {"reports", jr}, {"skipped", skipped}};

  const std::string table = format_subgroup_table(reports);
  rep.text() << table;
  if (!scan.skipped.empty()) rep.text() << "# skipped " << scan.skipped.size() << " candidate groups\n";
  if (!o.out.empty()) {
    write_file(o.out + ".txt", table);
    json doc;
    doc["format"] = "pns-toolkit-report";
    doc["version"] = "v1";
    doc["command"] = "subgroups";
    doc["config"] = rep.config();
    doc["result"] = rep.result();
    write_file(o.out + ".json", dump_report(doc) + "\n");
  }
}

struct OracleOpts {
  std::optional<std::string> scm;
  bool random = false;
  std::size_t covariates = 2;
  std::uint64_t seed = 1;
  std::string role = "mixed";
  bool latent = false;
  std::string x = "X", y = "Y";
  std::string emit_scm;
  std::size_t sample_n = 0;
  std::uint64_t sample_seed = 1;
  std::string out;
  bool no_profile = false;
};

void cmd_oracle(const OracleOpts& o, Reporter& rep) {
  if (o.scm.has_value() == o.random) throw UsageError("oracle: give exactly one of --scm and --random");
  if (o.sample_n > 0 && o.out.empty()) throw UsageError("--sample needs --out");
  ScmSpec m;
  if (o.random) {
    RandomScmOptions ro;
    ro.covariates = o.covariates;
    if (o.role == "confounder") {
      ro.role = CovariateRole::Confounder;
    } else if (o.role == "outcome") {
      ro.role = CovariateRole::OutcomeOnly;
    } else if (o.role == "mixed") {
      ro.role = CovariateRole::Mixed;
    } else {
      throw UsageError("--role must be confounder, outcome or mixed");
    }
    ro.latent_confounding = o.latent;
    rep.config()["random"] = true;
    rep.config()["covariates"] = o.covariates;
    rep.config()["seed"] = o.seed;
    rep.config()["role"] = o.role;
    rep.config()["latent"] = o.latent;
    m = random_scm(ro, o.seed);
  } else {
    rep.config()["scm"] = *o.scm;
    m = read_scm(*o.scm);
  }
  rep.config()["prng"] = std::string(kPrngAlgorithm);
  if (!o.emit_scm.empty()) {
    write_file(o.emit_scm, write_scm_json(m));
    rep.config()["emit_scm"] = o.emit_scm;
    rep.text() << "wrote model to " << o.emit_scm << "\n";
  }
  if (o.sample_n > 0) {
    rep.config()["sample"] = o.sample_n;
    rep.config()["sample_seed"] = o.sample_seed;
    rep.config()["out"] = o.out;
    write_dataset(sample(m, o.sample_n, o.sample_seed), o.out);
    rep.text() << "wrote " << o.sample_n << " sampled rows to " << o.out << "\n";
  }
  json graph = json::array();
  for (const auto& [a, b] : m.graph().edges()) graph.push_back({a, b});
  rep.result()["graph"] = graph;
  rep.result()["latent"] = m.latent_nodes();
  if (o.no_profile) return;

  rep.config()["x"] = o.x;
  rep.config()["y"] = o.y;
  const auto prof = enumerate_counterfactuals(m, o.x, o.y);
  const auto q = prof.quantities();
  const auto tp = tian_pearl_bounds(q);
  rep.result()["states"] = prof.states;
  rep.result()["p_yx"] = round10(prof.p_yx);
  rep.result()["p_yxp"] = round10(prof.p_yxp);
  rep.result()["exact_pns"] = round10(prof.exact_pns);
  rep.result()["quantities"] = quantities_json(q);
  rep.result()["tp"] = interval_json(tp);
  auto& out = rep.text();
  out << "exogenous states: " << prof.states << "\n";
  out << "P(y_x)    = " << fixed10(prof.p_yx) << "\n";
  out << "P(y_x')   = " << fixed10(prof.p_yxp) << "\n";
  out << "PNS       = " << fixed10(prof.exact_pns) << "\n";
  out << "P(x,y)    = " << fixed10(q.p_xy) << "  P(x,y')  = " << fixed10(q.p_xy_not) << "\n";
  out << "P(x',y)   = " << fixed10(q.p_x_not_y) << "  P(x',y') = " << fixed10(q.p_x_not_y_not) << "\n";
  out << "tp bounds = [" << fixed10(tp.lower) << ", " << fixed10(tp.upper) << "]\n";
}

struct ValidateOpts {
  ValidationOptions v;
  bool no_sampled = false;
};

int cmd_validate(const ValidateOpts& o, Reporter& rep) {
  if (o.v.max_covariates > 4) throw UsageError("--covariates must be at most 4");
  rep.config()["seeds"] = o.v.seeds;
  rep.config()["covariates"] = o.v.max_covariates;
  rep.config()["base_seed"] = o.v.base_seed;
  rep.config()["tolerance"] = o.v.tolerance;
  rep.config()["sampled"] = !o.no_sampled;
  if (!o.no_sampled) {
    rep.config()["sampled_seeds"] = o.v.sampled_seeds;
    rep.config()["sample_size"] = o.v.sample_size;
  }
  rep.config()["prng"] = std::string(kPrngAlgorithm);
  const auto suites = run_validation(o.v, !o.no_sampled);
  std::size_t violations = 0;
  json js = json::array();
  auto& out = rep.text();
  for (const auto& s : suites) {
    violations += s.violations;
    js.push_back({{"suite", s.name}, {"checks", s.checks}, {"violations", s.violations}, {"note", s.note}, {"examples", s.examples}});
    char buf[160];
    std::snprintf(buf, sizeof buf, "%-20s checks=%-8zu violations=%-4zu %.2fs %s\n", s.name.c_str(), s.checks,
                  s.violations, s.seconds, s.note.c_str());
    out << buf;
    for (const auto& e : s.examples) out << "  " << e << "\n";
  }
  out << "violations=" << violations << "\n";
  rep.result() = {{"suites", js}, {"violations", violations}};
  return violations == 0 ? kExitOk : kExitViolations;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Interventional effects and PNS bounds from discrete observational data", "pns-toolkit"};
  app.require_subcommand(1);
  app.fallthrough();
  std::string format = "human";
  bool json_flag = false;
  int threads = 0;
  app.add_option("--format", format, "Output format")->check(CLI::IsMember({"human", "json"}));
  app.add_flag("--json", json_flag, "Same as --format json");
  app.add_option("--threads", threads, "Worker threads (default: PNS_TOOLKIT_THREADS or all cores)")
      ->check(CLI::PositiveNumber);

  IngestOpts ingest;
  auto* c_ingest = app.add_subcommand("ingest", "Read XPT/CSV files, merge on a key and recode");
  c_ingest->add_option("--xpt", ingest.xpt, "SAS transport files")->expected(1, -1);
  c_ingest->add_option("--csv", ingest.csv, "CSV files")->expected(1, -1);
  c_ingest->add_option("--key", ingest.key, "Respondent key")->capture_default_str();
  c_ingest->add_option("--recode", ingest.recode, "Recode config")->required();
  c_ingest->add_option("--out", ingest.out, "Dataset file to write")->required();

  DiscoverOpts discover;
  auto* c_discover = app.add_subcommand("discover", "Learn a CPDAG from a dataset");
  c_discover->add_option("--dataset", discover.dataset)->required();
  c_discover->add_option("--alpha", discover.alpha)->capture_default_str();
  c_discover->add_option("--max-cond", discover.max_cond)->capture_default_str();
  c_discover->add_option("--vars", discover.vars, "Comma-separated subset of variables");
  c_discover->add_option("--out", discover.out, "Graph file to write");
  c_discover->add_option("--dot", discover.dot, "Graphviz file to write");

  IdentifyOpts identify;
  auto* c_identify = app.add_subcommand("identify", "List minimal backdoor adjustment sets");
  c_identify->add_option("--graph", identify.graph)->required();
  c_identify->add_option("--x", identify.x)->required();
  c_identify->add_option("--y", identify.y)->required();
  c_identify->add_option("--max-size", identify.max_size)->capture_default_str();
  c_identify->add_option("--check", identify.check, "Also test this comma-separated set");

  DoOpts dopts;
  auto* c_do = app.add_subcommand("do", "Backdoor-adjusted interventional probabilities");
  c_do->add_option("--dataset", dopts.dataset)->required();
  c_do->add_option("--x", dopts.x, "Treatment event, e.g. X=1")->required();
  c_do->add_option("--y", dopts.y, "Outcome event, e.g. Y=1")->required();
  c_do->add_option("--adjust", dopts.adjust, "Comma-separated adjustment set (may be empty)");
  c_do->add_option("--graph", dopts.graph, "Graph used to pick the adjustment set");
  c_do->add_option("--smoothing", dopts.smoothing, "Additive smoothing")->capture_default_str();

  PnsOpts pns;
  auto* c_pns = app.add_subcommand("pns", "Bounds on the probability of necessity and sufficiency");
  c_pns->add_option("--dataset", pns.dataset)->required();
  c_pns->add_option("--x", pns.x)->required();
  c_pns->add_option("--y", pns.y)->required();
  c_pns->add_option("--graph", pns.graph);
  c_pns->add_option("--adjust", pns.adjust);
  c_pns->add_option("--method", pns.method, "tp, thm1, thm2 or all")->capture_default_str();
  c_pns->add_flag("--all-sets", pns.all_sets, "Also bound with every other minimal backdoor set");
  c_pns->add_option("--max-set-size", pns.max_set_size)->capture_default_str();

  SubgroupsOpts sub;
  auto* c_sub = app.add_subcommand("subgroups", "Per-subgroup do-estimates and PNS bounds");
  c_sub->add_option("--dataset", sub.dataset)->required();
  c_sub->add_option("--x", sub.x)->required();
  c_sub->add_option("--y", sub.y)->required();
  c_sub->add_option("--graph", sub.graph);
  c_sub->add_option("--adjust", sub.adjust);
  c_sub->add_option("--vars", sub.vars, "Candidate variables to scan");
  c_sub->add_option("--spec", sub.specs, "Explicit subgroup, e.g. Old:age60=1,gender=1");
  c_sub->add_option("--depth", sub.depth)->capture_default_str();
  c_sub->add_option("--min-n", sub.min_n)->capture_default_str();
  c_sub->add_option("--margin", sub.margin)->capture_default_str();
  c_sub->add_option("--confidence", sub.confidence)->capture_default_str();
  c_sub->add_option("--out", sub.out, "Write <out>.txt and <out>.json");

  OracleOpts oracle;
  auto* c_oracle = app.add_subcommand("oracle", "Exact counterfactual profile of a finite SCM");
  c_oracle->add_option("--scm", oracle.scm);
  c_oracle->add_flag("--random", oracle.random);
  c_oracle->add_option("--covariates", oracle.covariates)->capture_default_str();
  c_oracle->add_option("--seed", oracle.seed)->capture_default_str();
  c_oracle->add_option("--role", oracle.role, "confounder, outcome or mixed")->capture_default_str();
  c_oracle->add_flag("--latent", oracle.latent, "Add a latent X-Y confounder");
  c_oracle->add_option("--x", oracle.x)->capture_default_str();
  c_oracle->add_option("--y", oracle.y)->capture_default_str();
  c_oracle->add_option("--emit-scm", oracle.emit_scm);
  c_oracle->add_option("--sample", oracle.sample_n, "Rows to sample");
  c_oracle->add_option("--sample-seed", oracle.sample_seed)->capture_default_str();
  c_oracle->add_option("--out", oracle.out, "Dataset file for --sample");
  c_oracle->add_flag("--no-profile", oracle.no_profile, "Skip enumeration");

  ValidateOpts val;
  auto* c_val = app.add_subcommand("validate", "Oracle property suites");
  c_val->add_option("--seeds", val.v.seeds)->capture_default_str();
  c_val->add_option("--covariates", val.v.max_covariates, "Maximum covariates per model")->capture_default_str();
  c_val->add_option("--base-seed", val.v.base_seed)->capture_default_str();
  c_val->add_option("--sampled-seeds", val.v.sampled_seeds)->capture_default_str();
  c_val->add_option("--sample-size", val.v.sample_size)->capture_default_str();
  c_val->add_flag("--no-sampled", val.no_sampled, "Skip the sampled adjustment suite");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  if (!rev.empty()) rev.pop_back();
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  if (threads > 0) {
    set_thread_count(threads);
  } else if (auto env = threads_from_env()) {
    set_thread_count(*env);
  }

  const auto* sc = app.get_subcommands().front();
  Reporter rep(out, json_flag || format == "json", sc->get_name());
  int status = kExitOk;
  try {
    if (sc == c_ingest) cmd_ingest(ingest, rep);
    if (sc == c_discover) cmd_discover(discover, rep);
    if (sc == c_identify) cmd_identify(identify, rep);
    if (sc == c_do) cmd_do(dopts, rep);
    if (sc == c_pns) cmd_pns(pns, rep);
    if (sc == c_sub) cmd_subgroups(sub, rep);
    if (sc == c_oracle) cmd_oracle(oracle, rep);
    if (sc == c_val) status = cmd_validate(val, rep);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << e.what() << "\n";
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitData;
  }
  rep.finish();
  return status;
}

}  // namespace pnskit::cli
