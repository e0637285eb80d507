#include <fstream>
#include <sstream>

#include "gridins/model.hpp"
#include "json.hpp"

namespace gridins {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& where, const std::string& what) {
  throw ParseError(where + ": " + what);
}

const json& member(const json& obj, const std::string& where, const char* key) {
  if (!obj.is_object()) fail(where, "expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) fail(where, std::string("missing key '") + key + "'");
  return *it;
}

void reject_unknown_keys(const json& obj, const std::string& where,
                         std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) fail(where, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : allowed)
      if (it.key() == k) { known = true; break; }
    if (!known) fail(where, "unknown key '" + it.key() + "'");
  }
}

double as_number(const json& v, const std::string& where) {
  if (!v.is_number()) fail(where, "expected a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& where) {
  if (!v.is_number_integer()) fail(where, "expected an integer");
  return v.get<int>();
}

std::string as_string(const json& v, const std::string& where) {
  if (!v.is_string()) fail(where, "expected a string");
  return v.get<std::string>();
}

bool as_bool(const json& v, const std::string& where) {
  if (!v.is_boolean()) fail(where, "expected a boolean");
  return v.get<bool>();
}

JobThreads parse_job_threads(const std::string& s, const std::string& where) {
  if (s == "J1") return JobThreads::J1;
  if (s == "J2") return JobThreads::J2;
  if (s == "J3") return JobThreads::J3;
  fail(where, "expected one of J1, J2, J3 but got '" + s + "'");
}

AnomalyKind parse_anomaly(const std::string& s, const std::string& where) {
  if (s == "ROB") return AnomalyKind::Rob;
  if (s == "DoS") return AnomalyKind::Dos;
  if (s == "other") return AnomalyKind::Other;
  fail(where, "expected one of ROB, DoS, other but got '" + s + "'");
}

GridModel parse_grid(const json& g) {
  GridModel grid;
  reject_unknown_keys(g, "grid", {"buses", "lines", "tgs"});
  const json& buses = member(g, "grid", "buses");
  if (!buses.is_array()) fail("grid.buses", "expected an array");
  for (size_t i = 0; i < buses.size(); ++i) {
    const std::string where = "grid.buses[" + std::to_string(i) + "]";
    const json& b = buses[i];
    reject_unknown_keys(b, where, {"id", "substation_id", "load_capacity",
                                   "generation_capacity"});
    Bus bus;
    bus.id = as_string(member(b, where, "id"), where + ".id");
    bus.substation_id =
        as_string(member(b, where, "substation_id"), where + ".substation_id");
    bus.load_capacity =
        as_number(member(b, where, "load_capacity"), where + ".load_capacity");
    bus.generation_capacity = as_number(member(b, where, "generation_capacity"),
                                        where + ".generation_capacity");
    grid.buses.push_back(std::move(bus));
  }

  const json& lines = member(g, "grid", "lines");
  if (!lines.is_array()) fail("grid.lines", "expected an array");
  for (size_t i = 0; i < lines.size(); ++i) {
    const std::string where = "grid.lines[" + std::to_string(i) + "]";
    const json& l = lines[i];
    reject_unknown_keys(l, where,
                        {"from_bus", "to_bus", "susceptance", "thermal_limit"});
    Line line;
    line.from_bus = as_string(member(l, where, "from_bus"), where + ".from_bus");
    line.to_bus = as_string(member(l, where, "to_bus"), where + ".to_bus");
    line.susceptance =
        as_number(member(l, where, "susceptance"), where + ".susceptance");
    line.thermal_limit =
        as_number(member(l, where, "thermal_limit"), where + ".thermal_limit");
    grid.lines.push_back(std::move(line));
  }

  const json& tgs = member(g, "grid", "tgs");
  if (!tgs.is_array()) fail("grid.tgs", "expected an array");
  for (size_t i = 0; i < tgs.size(); ++i) {
    const std::string where = "grid.tgs[" + std::to_string(i) + "]";
    const json& t = tgs[i];
    reject_unknown_keys(t, where, {"id", "substation_ids", "control_center_id"});
    TransmissionGrid tg;
    tg.id = as_string(member(t, where, "id"), where + ".id");
    const json& subs = member(t, where, "substation_ids");
    if (!subs.is_array()) fail(where + ".substation_ids", "expected an array");
    for (size_t j = 0; j < subs.size(); ++j)
      tg.substation_ids.push_back(as_string(
          subs[j], where + ".substation_ids[" + std::to_string(j) + "]"));
    tg.control_center_id = as_string(member(t, where, "control_center_id"),
                                     where + ".control_center_id");
    grid.tgs.push_back(std::move(tg));
  }
  return grid;
}

AttackGraph parse_attack_graph(const json& g) {
  AttackGraph graph;
  reject_unknown_keys(g, "attack_graph", {"nodes", "edges", "entry_nodes"});
  const json& nodes = member(g, "attack_graph", "nodes");
  if (!nodes.is_array()) fail("attack_graph.nodes", "expected an array");
  for (size_t i = 0; i < nodes.size(); ++i) {
    const std::string where = "attack_graph.nodes[" + std::to_string(i) + "]";
    const json& n = nodes[i];
    reject_unknown_keys(n, where, {"id", "host_id", "cvss_score", "anomaly_kind"});
    VulnerabilityNode node;
    node.id = as_string(member(n, where, "id"), where + ".id");
    node.host_id = as_string(member(n, where, "host_id"), where + ".host_id");
    node.cvss_score =
        as_number(member(n, where, "cvss_score"), where + ".cvss_score");
    node.anomaly_kind = parse_anomaly(
        as_string(member(n, where, "anomaly_kind"), where + ".anomaly_kind"),
        where + ".anomaly_kind");
    graph.nodes.push_back(std::move(node));
  }

  const json& edges = member(g, "attack_graph", "edges");
  if (!edges.is_array()) fail("attack_graph.edges", "expected an array");
  for (size_t i = 0; i < edges.size(); ++i) {
    const std::string where = "attack_graph.edges[" + std::to_string(i) + "]";
    const json& e = edges[i];
    if (!e.is_array() || e.size() != 2)
      fail(where, "expected a [from, to] pair");
    graph.edges.emplace_back(as_string(e[0], where + "[0]"),
                             as_string(e[1], where + "[1]"));
  }

  const json& entries = member(g, "attack_graph", "entry_nodes");
  if (!entries.is_array()) fail("attack_graph.entry_nodes", "expected an array");
  for (size_t i = 0; i < entries.size(); ++i)
    graph.entry_nodes.push_back(as_string(
        entries[i], "attack_graph.entry_nodes[" + std::to_string(i) + "]"));
  return graph;
}

ScenarioConfig parse_scenario(const json& s) {
  ScenarioConfig sc;
  reject_unknown_keys(
      s, "scenario",
      {"job_threads", "smart_monitoring", "correlation", "risk_level",
       "epidemic", "horizon_years", "steps_per_year", "voll", "seed",
       "reachability_gating", "elements", "power_base_mw"});

  if (s.contains("job_threads")) {
    const json& jt = s["job_threads"];
    if (jt.is_string()) {
      sc.default_job_threads =
          parse_job_threads(jt.get<std::string>(), "scenario.job_threads");
    } else if (jt.is_object()) {
      for (auto it = jt.begin(); it != jt.end(); ++it) {
        const std::string where = "scenario.job_threads." + it.key();
        JobThreads v = parse_job_threads(as_string(*it, where), where);
        if (it.key() == "default")
          sc.default_job_threads = v;
        else
          sc.job_threads_overrides[it.key()] = v;
      }
    } else {
      fail("scenario.job_threads", "expected a string or an object");
    }
  }

  if (s.contains("smart_monitoring")) {
    const json& sm = s["smart_monitoring"];
    if (sm.is_boolean()) {
      sc.default_smart_monitoring = sm.get<bool>();
    } else if (sm.is_object()) {
      for (auto it = sm.begin(); it != sm.end(); ++it) {
        const std::string where = "scenario.smart_monitoring." + it.key();
        bool v = as_bool(*it, where);
        if (it.key() == "default")
          sc.default_smart_monitoring = v;
        else
          sc.smart_monitoring_overrides[it.key()] = v;
      }
    } else {
      fail("scenario.smart_monitoring", "expected a boolean or an object");
    }
  }

  if (s.contains("correlation"))
    sc.correlation = as_number(s["correlation"], "scenario.correlation");
  if (s.contains("risk_level"))
    sc.risk_level = as_number(s["risk_level"], "scenario.risk_level");

  if (s.contains("epidemic")) {
    const json& e = s["epidemic"];
    reject_unknown_keys(e, "scenario.epidemic",
                        {"epsilon", "c", "z_epi", "r_epi"});
    if (e.contains("epsilon"))
      sc.epidemic.reproduction_hours =
          as_number(e["epsilon"], "scenario.epidemic.epsilon");
    if (e.contains("c"))
      sc.epidemic.coupling = as_number(e["c"], "scenario.epidemic.c");
    if (e.contains("z_epi"))
      sc.epidemic.external_infection_hours =
          as_number(e["z_epi"], "scenario.epidemic.z_epi");
    if (e.contains("r_epi"))
      sc.epidemic.external_recovery_hours =
          as_number(e["r_epi"], "scenario.epidemic.r_epi");
  }

  if (s.contains("horizon_years"))
    sc.horizon_years = as_int(s["horizon_years"], "scenario.horizon_years");
  if (s.contains("steps_per_year"))
    sc.steps_per_year = as_int(s["steps_per_year"], "scenario.steps_per_year");
  if (s.contains("voll")) sc.voll = as_number(s["voll"], "scenario.voll");
  if (s.contains("seed")) {
    if (!s["seed"].is_number_integer())
      fail("scenario.seed", "expected an integer");
    sc.seed = s["seed"].get<std::int64_t>();
  }
  if (s.contains("reachability_gating"))
    sc.reachability_gating =
        as_bool(s["reachability_gating"], "scenario.reachability_gating");

  if (s.contains("elements")) {
    const json& rows = s["elements"];
    if (!rows.is_array()) fail("scenario.elements", "expected an array");
    for (size_t i = 0; i < rows.size(); ++i) {
      const std::string where = "scenario.elements[" + std::to_string(i) + "]";
      const json& r = rows[i];
      reject_unknown_keys(r, where, {"element", "lambda", "mu", "state"});
      ElementRate row;
      row.element = as_string(member(r, where, "element"), where + ".element");
      row.failure_rate = as_number(member(r, where, "lambda"), where + ".lambda");
      row.repair_rate = as_number(member(r, where, "mu"), where + ".mu");
      row.state = as_string(member(r, where, "state"), where + ".state");
      sc.elements.push_back(std::move(row));
    }
  }

  if (s.contains("power_base_mw"))
    sc.power_base_mw = as_number(s["power_base_mw"], "scenario.power_base_mw");
  return sc;
}

}  // namespace

LoadedModel load_model(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ParseError("config: top level must be an object");
  reject_unknown_keys(doc, "config", {"grid", "attack_graph", "scenario"});

  LoadedModel m;
  m.grid = parse_grid(member(doc, "config", "grid"));
  m.attack_graph = parse_attack_graph(member(doc, "config", "attack_graph"));
  m.scenario = parse_scenario(member(doc, "config", "scenario"));

  m.grid.finalize();
  m.attack_graph.finalize(m.grid);
  m.scenario.validate(m.grid);
  return m;
}

LoadedModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("config: cannot open file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return load_model(buf.str());
}

std::string serialize_model(const LoadedModel& m) {
  json doc;
  json buses = json::array();
  for (const auto& b : m.grid.buses)
    buses.push_back({{"id", b.id},
                     {"substation_id", b.substation_id},
                     {"load_capacity", b.load_capacity},
                     {"generation_capacity", b.generation_capacity}});
  json lines = json::array();
  for (const auto& l : m.grid.lines)
    lines.push_back({{"from_bus", l.from_bus},
                     {"to_bus", l.to_bus},
                     {"susceptance", l.susceptance},
                     {"thermal_limit", l.thermal_limit}});
  json tgs = json::array();
  for (const auto& t : m.grid.tgs)
    tgs.push_back({{"id", t.id},
                   {"substation_ids", t.substation_ids},
                   {"control_center_id", t.control_center_id}});
  doc["grid"] = {{"buses", buses}, {"lines", lines}, {"tgs", tgs}};

  json nodes = json::array();
  for (const auto& n : m.attack_graph.nodes)
    nodes.push_back({{"id", n.id},
                     {"host_id", n.host_id},
                     {"cvss_score", n.cvss_score},
                     {"anomaly_kind", to_string(n.anomaly_kind)}});
  json edges = json::array();
  for (const auto& [a, b] : m.attack_graph.edges)
    edges.push_back(json::array({a, b}));
  doc["attack_graph"] = {{"nodes", nodes},
                         {"edges", edges},
                         {"entry_nodes", m.attack_graph.entry_nodes}};

  const ScenarioConfig& sc = m.scenario;
  json jt;
  if (sc.job_threads_overrides.empty()) {
    jt = to_string(sc.default_job_threads);
  } else {
    jt = json::object();
    jt["default"] = to_string(sc.default_job_threads);
    for (const auto& [host, v] : sc.job_threads_overrides)
      jt[host] = to_string(v);
  }
  json sm;
  if (sc.smart_monitoring_overrides.empty()) {
    sm = sc.default_smart_monitoring;
  } else {
    sm = json::object();
    sm["default"] = sc.default_smart_monitoring;
    for (const auto& [host, v] : sc.smart_monitoring_overrides) sm[host] = v;
  }
  json elements = json::array();
  for (const auto& r : sc.elements)
    elements.push_back({{"element", r.element},
                        {"lambda", r.failure_rate},
                        {"mu", r.repair_rate},
                        {"state", r.state}});
  json scenario = {{"job_threads", jt},
                   {"smart_monitoring", sm},
                   {"correlation", sc.correlation},
                   {"risk_level", sc.risk_level},
                   {"epidemic",
                    {{"epsilon", sc.epidemic.reproduction_hours},
                     {"c", sc.epidemic.coupling},
                     {"z_epi", sc.epidemic.external_infection_hours},
                     {"r_epi", sc.epidemic.external_recovery_hours}}},
                   {"horizon_years", sc.horizon_years},
                   {"steps_per_year", sc.steps_per_year},
                   {"voll", sc.voll},
                   {"reachability_gating", sc.reachability_gating},
                   {"elements", elements}};
  if (sc.seed.has_value()) scenario["seed"] = *sc.seed;
  if (sc.power_base_mw.has_value())
    scenario["power_base_mw"] = *sc.power_base_mw;
  doc["scenario"] = scenario;

  return doc.dump(2) + "\n";
}

}  // namespace gridins
