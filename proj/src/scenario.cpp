#include "epinet/scenario.hpp"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <toml.hpp>

#include "epinet/error.hpp"

namespace epinet {

const char* policy_kind_name(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::none: return "none";
    case PolicyKind::threshold: return "threshold";
    case PolicyKind::schedule: return "schedule";
    case PolicyKind::sweep: return "sweep";
    case PolicyKind::best_response: return "best-response";
  }
  return "none";
}

Schedule Scenario::schedule() const {
  const double T = epidemic.horizon;
  switch (policy.kind) {
    case PolicyKind::none: return Schedule::constant(0.0, T);
    case PolicyKind::schedule: return Schedule(policy.breakpoints, policy.values, T);
    default: return Schedule::threshold(policy.tau, epidemic.nu, T);
  }
}

namespace {

std::string where(std::string_view file, const toml::source_region& src) {
  std::string out(file);
  if (src.begin.line > 0) out += ":" + std::to_string(src.begin.line);
  return out + ": ";
}

// Typed access to one table; remembers which keys were consumed so that any
// leftover key is reported as unknown.
class Reader {
 public:
  Reader(const toml::table& table, std::string name, std::string_view file)
      : table_(table), name_(std::move(name)), file_(file) {}

  const toml::node* find(const std::string& key) {
    used_.insert(key);
    return table_.get(key);
  }

  [[noreturn]] void fail(const toml::node& node, const std::string& what) const {
    throw ValidationError(where(file_, node.source()) + what);
  }

  std::string qualified(const std::string& key) const {
    return name_.empty() ? key : name_ + "." + key;
  }

  double number(const std::string& key, double fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<double>()) return *v;
    if (auto v = n->value_exact<std::int64_t>()) return static_cast<double>(*v);
    fail(*n, qualified(key) + " must be a number");
  }

  std::int64_t integer(const std::string& key, std::int64_t fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<std::int64_t>()) return *v;
    fail(*n, qualified(key) + " must be an integer");
  }

  int small_integer(const std::string& key, int fallback) {
    const std::int64_t v = integer(key, fallback);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max())
      fail(*table_.get(key), qualified(key) + " is out of range");
    return static_cast<int>(v);
  }

  bool boolean(const std::string& key, bool fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<bool>()) return *v;
    fail(*n, qualified(key) + " must be true or false");
  }

  std::string string(const std::string& key, const std::string& fallback) {
    const toml::node* n = find(key);
    if (!n) return fallback;
    if (auto v = n->value_exact<std::string>()) return *v;
    fail(*n, qualified(key) + " must be a string");
  }

  std::vector<double> numbers(const std::string& key) {
    std::vector<double> out;
    const toml::node* n = find(key);
    if (!n) return out;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, qualified(key) + " must be an array of numbers");
    for (const toml::node& e : *arr) {
      if (auto v = e.value_exact<double>()) out.push_back(*v);
      else if (auto w = e.value_exact<std::int64_t>()) out.push_back(static_cast<double>(*w));
      else fail(e, qualified(key) + " must contain numbers only");
    }
    return out;
  }

  std::vector<int> integers(const std::string& key) {
    std::vector<int> out;
    const toml::node* n = find(key);
    if (!n) return out;
    const toml::array* arr = n->as_array();
    if (!arr) fail(*n, qualified(key) + " must be an array of integers");
    for (const toml::node& e : *arr) {
      if (auto v = e.value_exact<std::int64_t>()) out.push_back(static_cast<int>(*v));
      else fail(e, qualified(key) + " must contain integers only");
    }
    return out;
  }

  const toml::table* subtable(const std::string& key) {
    const toml::node* n = find(key);
    if (!n) return nullptr;
    const toml::table* t = n->as_table();
    if (!t) fail(*n, qualified(key) + " must be a table");
    return t;
  }

  // A numeric key with an explicit range check reported at its line.
  void check(const std::string& key, bool ok, const std::string& message) {
    if (ok) return;
    const toml::node* n = table_.get(key);
    throw ValidationError((n ? where(file_, n->source()) : std::string(file_) + ": ") + message);
  }

  void finish() const {
    for (const auto& [k, v] : table_) {
      const std::string key(k.str());
      if (!used_.count(key))
        throw ValidationError(where(file_, k.source()) + "unknown key '" + qualified(key) + "'");
    }
  }

  const std::string& name() const { return name_; }
  std::string_view file() const { return file_; }

 private:
  const toml::table& table_;
  std::string name_;
  std::string_view file_;
  std::set<std::string> used_;
};

DistributionSpec read_distribution(const toml::table& t, std::string_view file) {
  Reader rd(t, "distribution", file);
  const std::string family = rd.string("family", "");
  const toml::table empty;
  const toml::table* params = rd.subtable("params");
  Reader p(params ? *params : empty, "distribution.params", file);
  DistributionSpec spec;
  if (family == "poisson") {
    PoissonSpec s;
    s.mean = p.number("lambda", s.mean);
    spec = s;
  } else if (family == "bimodal") {
    BimodalSpec s;
    s.low_mean = p.number("lambda", s.low_mean);
    s.high_degree = p.small_integer("L", s.high_degree);
    s.low_fraction = p.number("p", s.low_fraction);
    spec = s;
  } else if (family == "regular") {
    RegularSpec s;
    s.degree = p.small_integer("d", s.degree);
    spec = s;
  } else if (family == "powerlaw") {
    PowerLawSpec s;
    s.exponent = p.number("alpha", s.exponent);
    s.cutoff = p.number("kappa", s.cutoff);
    s.max_degree = p.small_integer("kmax", s.max_degree);
    spec = s;
  } else {
    const toml::node* n = t.get("family");
    throw ValidationError((n ? where(file, n->source()) : std::string(file) + ": ") +
                          "distribution.family must be one of poisson, bimodal, regular, powerlaw");
  }
  p.finish();
  rd.finish();
  return spec;
}

PolicyKind parse_kind(const std::string& s, Reader& rd) {
  if (s == "none") return PolicyKind::none;
  if (s == "threshold") return PolicyKind::threshold;
  if (s == "schedule") return PolicyKind::schedule;
  if (s == "sweep") return PolicyKind::sweep;
  if (s == "best-response") return PolicyKind::best_response;
  rd.check("kind", false,
           "policy.kind must be one of none, threshold, schedule, sweep, best-response");
  return PolicyKind::none;
}

Scenario read_scenario(const toml::table& root, std::string_view file) {
  Scenario sc;
  Reader top(root, "", file);
  sc.label = top.string("label", sc.label);

  const toml::table* dist = top.subtable("distribution");
  if (!dist) throw ValidationError(std::string(file) + ": missing required table [distribution]");
  sc.distribution = read_distribution(*dist, file);

  if (const toml::table* t = top.subtable("epidemic")) {
    Reader rd(*t, "epidemic", file);
    EpidemicParams& e = sc.epidemic;
    e.r = rd.number("r", e.r);
    e.gamma = rd.number("gamma", e.gamma);
    e.nu = rd.number("nu", e.nu);
    e.epsilon = rd.number("epsilon", e.epsilon);
    e.horizon = rd.number("T", e.horizon);
    e.dt = rd.number("dt", e.dt);
    rd.check("epsilon", e.epsilon > 0.0 && e.epsilon < 0.5,
             "epidemic.epsilon = " + std::to_string(e.epsilon) + " violates 0 < ε < 1/2");
    rd.check("r", e.r >= 0.0, "epidemic.r must be >= 0");
    rd.check("gamma", e.gamma >= 0.0, "epidemic.gamma must be >= 0");
    rd.check("nu", e.nu >= 0.0, "epidemic.nu must be >= 0");
    rd.check("dt", e.dt > 0.0, "epidemic.dt must be > 0");
    rd.check("T", e.horizon >= e.dt, "epidemic.T must be >= dt");
    rd.finish();
  }

  if (const toml::table* t = top.subtable("xi")) {
    Reader rd(*t, "xi", file);
    sc.xi.slope = rd.number("a", sc.xi.slope);
    sc.xi.intercept = rd.number("b", sc.xi.intercept);
    sc.xi.table = rd.numbers("table");
    rd.finish();
  }

  if (const toml::table* t = top.subtable("policy")) {
    Reader rd(*t, "policy", file);
    PolicySpec& p = sc.policy;
    p.kind = parse_kind(rd.string("kind", "none"), rd);
    p.tau = rd.number("tau", p.tau);
    p.breakpoints = rd.numbers("breakpoints");
    p.values = rd.numbers("values");
    if (const toml::table* g = rd.subtable("tau_grid")) {
      Reader gr(*g, "policy.tau_grid", file);
      p.tau_grid.start = gr.number("start", p.tau_grid.start);
      p.tau_grid.stop = gr.number("stop", p.tau_grid.stop);
      p.tau_grid.step = gr.number("step", p.tau_grid.step);
      gr.check("step", p.tau_grid.step > 0.0, "policy.tau_grid.step must be > 0");
      gr.finish();
    }
    p.sweep.damping = rd.number("damping", p.sweep.damping);
    p.sweep.tol = rd.number("tol", p.sweep.tol);
    p.sweep.max_iter = rd.small_integer("max_iter", p.sweep.max_iter);
    p.survival_factor = rd.boolean("survival_factor", p.survival_factor);
    p.degrees = rd.integers("degrees");
    rd.check("tau", p.tau >= 0.0, "policy.tau must be >= 0");
    rd.check("damping", p.sweep.damping > 0.0 && p.sweep.damping <= 1.0,
             "policy.damping must lie in (0, 1]");
    rd.check("tol", p.sweep.tol > 0.0, "policy.tol must be > 0");
    rd.check("max_iter", p.sweep.max_iter >= 1, "policy.max_iter must be >= 1");
    rd.finish();
  }

  if (const toml::table* t = top.subtable("costs")) {
    Reader rd(*t, "costs", file);
    sc.costs.c_I = rd.number("c_I", sc.costs.c_I);
    sc.costs.c_V = rd.number("c_V", sc.costs.c_V);
    rd.check("c_I", sc.costs.c_I >= 0.0, "costs.c_I must be >= 0");
    rd.check("c_V", sc.costs.c_V >= 0.0, "costs.c_V must be >= 0");
    rd.finish();
  }

  if (const toml::table* t = top.subtable("simulation")) {
    Reader rd(*t, "simulation", file);
    SimulationSpec s;
    s.n = rd.small_integer("n", s.n);
    s.replicas = rd.small_integer("replicas", s.replicas);
    s.graphs = rd.small_integer("graphs", s.graphs);
    const std::int64_t seed = rd.integer("seed", static_cast<std::int64_t>(s.seed));
    rd.check("seed", seed >= 0, "simulation.seed must be >= 0");
    s.seed = static_cast<std::uint64_t>(seed);
    s.sample_dt = rd.number("sample_dt", s.sample_dt);
    s.max_attempts = rd.small_integer("max_attempts", s.max_attempts);
    s.events = rd.boolean("events", s.events);
    rd.check("n", s.n >= 2, "simulation.n must be >= 2");
    rd.check("replicas", s.replicas >= 1, "simulation.replicas must be >= 1");
    rd.check("graphs", s.graphs >= 1, "simulation.graphs must be >= 1");
    rd.check("sample_dt", s.sample_dt > 0.0, "simulation.sample_dt must be > 0");
    rd.check("max_attempts", s.max_attempts >= 1, "simulation.max_attempts must be >= 1");
    rd.finish();
    sc.simulation = s;
  }

  if (const toml::table* t = top.subtable("output")) {
    Reader rd(*t, "output", file);
    sc.output_dir = rd.string("dir", sc.output_dir);
    rd.finish();
  }
  top.finish();
  return sc;
}

std::string prefixed(std::string_view file, const std::string& what) {
  return std::string(file) + ": " + what;
}

}  // namespace

void validate_scenario(const Scenario& sc) {
  sc.epidemic.validate();
  sc.costs.validate();
  const DegreeDistribution dist = build_distribution(sc.distribution);
  sc.xi.validate(dist.k_max());
  const Schedule schedule = sc.schedule();
  schedule.validate(sc.epidemic.nu);
  const PolicySpec& p = sc.policy;
  if (p.tau > sc.epidemic.horizon) throw ValidationError("policy.tau must lie within [0, T]");
  if (p.kind == PolicyKind::schedule && p.breakpoints.empty())
    throw ValidationError("policy kind 'schedule' needs breakpoints and values");
  const double stop = p.tau_grid.stop > 0.0 ? p.tau_grid.stop : sc.epidemic.horizon;
  if (p.tau_grid.start < 0.0 || stop > sc.epidemic.horizon + 1e-12 || stop < p.tau_grid.start)
    throw ValidationError("policy.tau_grid must lie within [0, T]");
  for (int k : p.degrees)
    if (k < 0 || k > dist.k_max())
      throw ValidationError("policy.degrees must lie in the degree support [0, " +
                            std::to_string(dist.k_max()) + "]");
}

Scenario parse_scenario_string(std::string_view text, std::string_view source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& err) {
    const auto& b = err.source().begin;
    throw ValidationError(std::string(source) + ":" + std::to_string(b.line) + ":" +
                          std::to_string(b.column) + ": " + std::string(err.description()));
  }
  Scenario sc = read_scenario(root, source);
  try {
    validate_scenario(sc);
  } catch (const ValidationError& e) {
    throw ValidationError(prefixed(source, e.what()));
  }
  return sc;
}

Scenario parse_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_scenario_string(buf.str(), path.string());
}

namespace {

std::string num(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string quoted(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

template <class T, class F>
std::string list(const std::vector<T>& xs, F fmt) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + fmt(xs[i]);
  return out + "]";
}

}  // namespace

std::string serialize_scenario(const Scenario& sc) {
  std::ostringstream o;
  o << "label = " << quoted(sc.label) << "\n\n[distribution]\n";
  o << "family = " << quoted(family_name(sc.distribution)) << "\n";
  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, PoissonSpec>) {
          o << "params = { lambda = " << num(s.mean) << " }\n";
        } else if constexpr (std::is_same_v<T, BimodalSpec>) {
          o << "params = { lambda = " << num(s.low_mean) << ", L = " << s.high_degree
            << ", p = " << num(s.low_fraction) << " }\n";
        } else if constexpr (std::is_same_v<T, RegularSpec>) {
          o << "params = { d = " << s.degree << " }\n";
        } else {
          o << "params = { alpha = " << num(s.exponent) << ", kappa = " << num(s.cutoff)
            << ", kmax = " << s.max_degree << " }\n";
        }
      },
      sc.distribution);
  const EpidemicParams& e = sc.epidemic;
  o << "\n[epidemic]\nr = " << num(e.r) << "\ngamma = " << num(e.gamma) << "\nnu = " << num(e.nu)
    << "\nepsilon = " << num(e.epsilon) << "\nT = " << num(e.horizon) << "\ndt = " << num(e.dt)
    << "\n";
  o << "\n[xi]\na = " << num(sc.xi.slope) << "\nb = " << num(sc.xi.intercept) << "\n";
  if (!sc.xi.table.empty()) o << "table = " << list(sc.xi.table, num) << "\n";
  const PolicySpec& p = sc.policy;
  o << "\n[policy]\nkind = " << quoted(policy_kind_name(p.kind)) << "\ntau = " << num(p.tau)
    << "\n";
  if (!p.breakpoints.empty()) o << "breakpoints = " << list(p.breakpoints, num) << "\n";
  if (!p.values.empty()) o << "values = " << list(p.values, num) << "\n";
  o << "tau_grid = { start = " << num(p.tau_grid.start) << ", stop = " << num(p.tau_grid.stop)
    << ", step = " << num(p.tau_grid.step) << " }\n";
  o << "damping = " << num(p.sweep.damping) << "\ntol = " << num(p.sweep.tol)
    << "\nmax_iter = " << p.sweep.max_iter
    << "\nsurvival_factor = " << (p.survival_factor ? "true" : "false") << "\n";
  if (!p.degrees.empty())
    o << "degrees = " << list(p.degrees, [](int k) { return std::to_string(k); }) << "\n";
  o << "\n[costs]\nc_I = " << num(sc.costs.c_I) << "\nc_V = " << num(sc.costs.c_V) << "\n";
  if (sc.simulation) {
    const SimulationSpec& s = *sc.simulation;
    o << "\n[simulation]\nn = " << s.n << "\nreplicas = " << s.replicas << "\ngraphs = " << s.graphs
      << "\nseed = " << s.seed << "\nsample_dt = " << num(s.sample_dt)
      << "\nmax_attempts = " << s.max_attempts << "\nevents = " << (s.events ? "true" : "false")
      << "\n";
  }
  o << "\n[output]\ndir = " << quoted(sc.output_dir) << "\n";
  return o.str();
}

std::string scenario_hash(const Scenario& sc) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : serialize_scenario(sc)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace epinet
