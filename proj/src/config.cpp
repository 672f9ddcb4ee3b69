#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "ampse/error.hpp"
#include "ampse/harness.hpp"

namespace ampse {

namespace {

using nlohmann::json;

const std::pair<ExperimentKind, const char*> kKindNames[] = {
    {ExperimentKind::cs_mc, "cs_mc"},
    {ExperimentKind::se_only, "se_only"},
    {ExperimentKind::sweep, "sweep"},
    {ExperimentKind::embed_check, "embed_check"},
    {ExperimentKind::general_se_check, "general_se_check"},
};

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) throw InvalidArgument(where + ": unknown key '" + key + "'");
  }
}

template <class T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <class T>
void read_optional(const json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

json tolerances_json(const Tolerances& t) {
  return {{"mc_rel", t.mc_rel},         {"mc_sigmas", t.mc_sigmas},     {"embed", t.embed},
          {"diagonal", t.diagonal},     {"stat_sigmas", t.stat_sigmas}, {"moment_rel", t.moment_rel}};
}

Tolerances tolerances_from(const json& j) {
  reject_unknown(j, {"mc_rel", "mc_sigmas", "embed", "diagonal", "stat_sigmas", "moment_rel"}, "tolerances");
  Tolerances t;
  read(j, "mc_rel", t.mc_rel);
  read(j, "mc_sigmas", t.mc_sigmas);
  read(j, "embed", t.embed);
  read(j, "diagonal", t.diagonal);
  read(j, "stat_sigmas", t.stat_sigmas);
  read(j, "moment_rel", t.moment_rel);
  return t;
}

json sweep_json(const SweepConfig& s) {
  json j = {{"deltas", s.deltas},
            {"threshold", s.threshold},
            {"bisect", s.bisect},
            {"lo", s.lo},
            {"hi", s.hi},
            {"steps", s.steps},
            {"max_iterations", s.max_iterations},
            {"stop_tol", s.stop_tol},
            {"mc_deltas", s.mc_deltas},
            {"require_decreasing", s.require_decreasing},
            {"critical_min", nullptr},
            {"critical_max", nullptr}};
  if (s.critical_min) j["critical_min"] = *s.critical_min;
  if (s.critical_max) j["critical_max"] = *s.critical_max;
  return j;
}

SweepConfig sweep_from(const json& j) {
  reject_unknown(j,
                 {"deltas", "threshold", "bisect", "lo", "hi", "steps", "max_iterations", "stop_tol", "mc_deltas",
                  "require_decreasing", "critical_min", "critical_max"},
                 "sweep");
  SweepConfig s;
  read(j, "deltas", s.deltas);
  read(j, "threshold", s.threshold);
  read(j, "bisect", s.bisect);
  read(j, "lo", s.lo);
  read(j, "hi", s.hi);
  read(j, "steps", s.steps);
  read(j, "max_iterations", s.max_iterations);
  read(j, "stop_tol", s.stop_tol);
  read(j, "mc_deltas", s.mc_deltas);
  read(j, "require_decreasing", s.require_decreasing);
  read_optional(j, "critical_min", s.critical_min);
  read_optional(j, "critical_max", s.critical_max);
  return s;
}

json general_json(const GeneralSeCheckConfig& g) {
  auto side = json::array();
  for (const auto& s : g.side_info) side.push_back({{"kind", s.kind}, {"variance", s.variance}});
  return {{"orbit", g.orbit},
          {"dimension", g.dimension},
          {"group_fractions", g.group_fractions},
          {"side_info", side},
          {"family", {{"kind", g.family.kind}, {"gain", g.family.gain}, {"side", g.family.side}}},
          {"initial", g.initial},
          {"test_functions", g.test_functions},
          {"mc_samples", g.mc_samples},
          {"diagonal_identity", g.diagonal_identity},
          {"diagonal_iterations", g.diagonal_iterations}};
}

GeneralSeCheckConfig general_from(const json& j) {
  reject_unknown(j,
                 {"orbit", "dimension", "group_fractions", "side_info", "family", "initial", "test_functions",
                  "mc_samples", "diagonal_identity", "diagonal_iterations"},
                 "general_se");
  GeneralSeCheckConfig g;
  read(j, "orbit", g.orbit);
  read(j, "dimension", g.dimension);
  read(j, "group_fractions", g.group_fractions);
  if (j.contains("side_info")) {
    g.side_info.clear();
    for (const auto& s : j.at("side_info")) {
      reject_unknown(s, {"kind", "variance"}, "general_se.side_info");
      SideInfoSpec spec;
      read(s, "kind", spec.kind);
      read(s, "variance", spec.variance);
      g.side_info.push_back(spec);
    }
  } else {
    g.side_info.assign(g.group_fractions.size(), SideInfoSpec{});
  }
  if (j.contains("family")) {
    const auto& f = j.at("family");
    reject_unknown(f, {"kind", "gain", "side"}, "general_se.family");
    read(f, "kind", g.family.kind);
    read(f, "gain", g.family.gain);
    read(f, "side", g.family.side);
  }
  read(j, "initial", g.initial);
  read(j, "test_functions", g.test_functions);
  read(j, "mc_samples", g.mc_samples);
  read(j, "diagonal_identity", g.diagonal_identity);
  read(j, "diagonal_iterations", g.diagonal_iterations);
  return g;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw InvalidArgument("config: " + message);
}

}  // namespace

std::string to_string(ExperimentKind kind) {
  for (const auto& [k, name] : kKindNames)
    if (k == kind) return name;
  throw InvalidArgument("unknown experiment kind");
}

ExperimentKind parse_kind(const std::string& name) {
  for (const auto& [k, n] : kKindNames)
    if (name == n) return k;
  throw InvalidArgument("unknown experiment kind '" + name + "'");
}

void to_json(json& j, const ExperimentConfig& c) {
  j = {{"name", c.name},
       {"kind", to_string(c.kind)},
       {"prior", c.prior},
       {"coupling", c.coupling},
       {"m0", c.m0},
       {"n0", c.n0},
       {"noise_var", c.noise_var},
       {"iterations", c.iterations},
       {"trials", c.trials},
       {"base_seed", c.base_seed},
       {"threads", c.threads},
       {"output", c.output},
       {"tolerances", tolerances_json(c.tolerances)},
       {"sweep", sweep_json(c.sweep)},
       {"general_se", general_json(c.general_se)},
       {"embed", {{"degenerate", c.embed.degenerate}}}};
}

void from_json(const json& j, ExperimentConfig& c) {
  reject_unknown(j,
                 {"name", "kind", "prior", "coupling", "m0", "n0", "noise_var", "iterations", "trials", "base_seed",
                  "threads", "output", "tolerances", "sweep", "general_se", "embed"},
                 "config");
  c = ExperimentConfig{};
  read(j, "name", c.name);
  if (j.contains("kind")) c.kind = parse_kind(j.at("kind").get<std::string>());
  read(j, "prior", c.prior);
  read(j, "coupling", c.coupling);
  read(j, "m0", c.m0);
  read(j, "n0", c.n0);
  read(j, "noise_var", c.noise_var);
  read(j, "iterations", c.iterations);
  read(j, "trials", c.trials);
  read(j, "base_seed", c.base_seed);
  read(j, "threads", c.threads);
  read(j, "output", c.output);
  if (j.contains("tolerances")) c.tolerances = tolerances_from(j.at("tolerances"));
  if (j.contains("sweep")) c.sweep = sweep_from(j.at("sweep"));
  if (j.contains("general_se")) c.general_se = general_from(j.at("general_se"));
  if (j.contains("embed")) {
    reject_unknown(j.at("embed"), {"degenerate"}, "embed");
    read(j.at("embed"), "degenerate", c.embed.degenerate);
  }
}

ExperimentConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
  try {
    return j.get<ExperimentConfig>();
  } catch (const json::exception& e) {
    throw InvalidArgument(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string canonical_config(const ExperimentConfig& c) {
  json j = c;
  // Neither changes any result.
  j.erase("threads");
  j.erase("output");
  return j.dump();
}

std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char ch : canonical_config(c)) {
    h ^= ch;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate_config(const ExperimentConfig& c) {
  c.prior.validate();
  const CouplingMatrix w = c.coupling.build();
  require(c.m0 >= 1 && c.n0 >= 1, "m0 and n0 must be positive");
  require(std::isfinite(c.noise_var) && c.noise_var >= 0.0, "noise_var must be a finite nonnegative number");
  require(c.iterations >= 1, "iterations must be at least 1");
  require(c.trials >= 1, "trials must be at least 1");
  require(c.threads >= 1, "threads must be at least 1");
  const auto& t = c.tolerances;
  for (double v : {t.mc_rel, t.embed, t.diagonal, t.moment_rel})
    require(std::isfinite(v) && v > 0.0, "tolerances must be positive");
  for (double v : {t.mc_sigmas, t.stat_sigmas})
    require(std::isfinite(v) && v >= 0.0, "sigma multiples must be nonnegative");

  switch (c.kind) {
    case ExperimentKind::cs_mc:
    case ExperimentKind::se_only:
      break;
    case ExperimentKind::sweep: {
      const auto& s = c.sweep;
      for (double d : s.deltas) require(d > 0.0 && std::isfinite(d), "sweep deltas must be positive");
      for (double d : s.mc_deltas) require(d > 0.0 && std::isfinite(d), "sweep mc_deltas must be positive");
      require(s.threshold > 0.0, "sweep threshold must be positive");
      require(s.max_iterations >= 1, "sweep max_iterations must be at least 1");
      require(s.stop_tol >= 0.0, "sweep stop_tol must be nonnegative");
      if (s.bisect) {
        require(0.0 < s.lo && s.lo < s.hi, "sweep requires 0 < lo < hi");
        require(s.steps >= 1, "sweep steps must be at least 1");
      }
      require(!s.deltas.empty() || s.bisect, "sweep needs a grid or bisection");
      break;
    }
    case ExperimentKind::embed_check:
      require(c.m0 * w.rows() <= 200, "embed_check needs m <= 200");
      break;
    case ExperimentKind::general_se_check: {
      const auto& g = c.general_se;
      require(g.orbit || g.diagonal_identity, "general_se_check has nothing to do");
      if (g.orbit) {
        require(g.dimension >= 2, "general_se.dimension must be at least 2");
        require(!g.group_fractions.empty(), "general_se.group_fractions must not be empty");
        double sum = 0.0;
        for (double f : g.group_fractions) {
          require(f > 0.0, "general_se.group_fractions must be positive");
          sum += f;
        }
        require(std::abs(sum - 1.0) <= 1e-12, "general_se.group_fractions must sum to one");
        require(g.side_info.size() == g.group_fractions.size(), "general_se.side_info needs one entry per group");
        for (const auto& s : g.side_info) {
          require(s.kind == "none" || s.kind == "gaussian" || s.kind == "rademacher",
                  "general_se.side_info kind must be none, gaussian or rademacher");
          require(s.variance > 0.0, "general_se.side_info variance must be positive");
        }
        require(g.family.kind == "identity" || g.family.kind == "tanh", "general_se.family kind must be identity or tanh");
        require(g.initial == "ones" || g.initial == "gaussian", "general_se.initial must be ones or gaussian");
        for (const auto& f : g.test_functions)
          require(f == "x" || f == "x2" || f == "abs", "general_se.test_functions entries must be x, x2 or abs");
        require(g.mc_samples >= 1000, "general_se.mc_samples must be at least 1000");
      }
      if (g.diagonal_identity) require(g.diagonal_iterations >= 1, "general_se.diagonal_iterations must be positive");
      break;
    }
  }
}

bool Report::passed() const {
  if (!failures.empty()) return false;
  for (const auto& g : gates)
    if (!g.pass) return false;
  return true;
}

void Report::add(std::string name, double value, double limit, bool pass, std::string detail) {
  gates.push_back({std::move(name), value, limit, pass, std::move(detail)});
}

void print_report(std::ostream& os, const Report& r) {
  int failed = 0;
  for (const auto& g : r.gates) failed += g.pass ? 0 : 1;
  os << r.kind << " [" << r.config_hash << "]: " << r.gates.size() - failed << "/" << r.gates.size()
     << " gates pass";
  if (!r.failures.empty()) os << ", " << r.failures.size() << " trial failures";
  os << '\n';
  for (const auto& g : r.gates) {
    if (g.pass && r.gates.size() > 40) continue;
    os << (g.pass ? "  PASS " : "  FAIL ") << g.name << ": " << g.value << " vs " << g.limit;
    if (!g.detail.empty()) os << " (" << g.detail << ")";
    os << '\n';
  }
  for (const auto& f : r.failures) os << "  ERROR " << f << '\n';
}

}  // namespace ampse
