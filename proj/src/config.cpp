#include "tpbb/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "tpbb/errors.hpp"

namespace tpbb {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::string fmt_double(double v) {
  char buf[40];
  const auto r = std::to_chars(buf, buf + sizeof(buf), v);  // shortest round trip
  return std::string(buf, r.ptr);
}

double to_double(const std::string& key, const std::string& v) {
  double out = 0.0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end || !std::isfinite(out)) {
    throw ValidationError(key + ": expected a number, got '" + v + "'");
  }
  return out;
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto* end = v.data() + v.size();
  const auto [ptr, ec] = std::from_chars(v.data(), end, out);
  if (ec != std::errc() || ptr != end) {
    // Accept integral values written in floating-point form (e.g. 1e6).
    const double d = to_double(key, v);
    if (d != std::floor(d) || std::abs(d) > 9e15) throw ValidationError(key + ": expected an integer, got '" + v + "'");
    return static_cast<long long>(d);
  }
  return out;
}

Interval to_interval(const std::string& key, const std::string& v) {
  const auto comma = v.find(',');
  if (comma == std::string::npos) throw ValidationError(key + ": expected 'lo, hi'");
  return {to_double(key, trim(v.substr(0, comma))), to_double(key, trim(v.substr(comma + 1)))};
}

std::string_view estimator_name(PhiEstimatorKind k) {
  return k == PhiEstimatorKind::kFullDoubleSum ? "full" : "subsampled";
}

std::string_view evaluation_name(GridEvaluation e) {
  return e == GridEvaluation::kTabulated ? "tabulated" : "argmin";
}

void set_kernel_field(KernelSpec& k, const std::string& key, const std::string& field,
                      const std::string& value) {
  if (field == "kind") {
    // Reset the parameter to the variant's default until it is given.
    switch (parse_kernel_kind(value)) {
      case KernelKind::kZero:
        k = KernelSpec::Zero();
        break;
      case KernelKind::kConstant:
        k = {KernelKind::kConstant, 1.0};
        break;
      case KernelKind::kBoundedConfidence:
        k = {KernelKind::kBoundedConfidence, 0.0};
        break;
      case KernelKind::kParabolic:
        k = {KernelKind::kParabolic, 1.0};
        break;
    }
    return;
  }
  const double v = to_double(key, value);
  if (field == "c" && k.kind == KernelKind::kConstant) {
    k.param = v;
  } else if (field == "r" && k.kind == KernelKind::kBoundedConfidence) {
    k.param = v;
  } else if (field == "s" && k.kind == KernelKind::kParabolic) {
    k.param = v;
  } else {
    throw ValidationError(key + ": field not valid for kernel kind '" +
                          std::string(kernel_kind_name(k.kind)) + "' (set kind first)");
  }
}

void validate_kernel(const std::string& name, const KernelSpec& k) {
  switch (k.kind) {
    case KernelKind::kBoundedConfidence:
      if (!(k.param > 0.0)) throw ValidationError("kernels." + name + ".r must be > 0");
      break;
    case KernelKind::kParabolic:
      if (k.param != 1.0 && k.param != -1.0) throw ValidationError("kernels." + name + ".s must be +1 or -1");
      break;
    default:
      break;
  }
}

void apply_key(RunConfig& c, const std::string& section, const std::string& k, const std::string& v) {
  const std::string key = section + "." + k;
  if (section == "kernels") {
    const auto dot = k.find('.');
    if (dot == std::string::npos) throw ValidationError(key + ": expected <ff|fl|ll>.<field>");
    const std::string which = k.substr(0, dot);
    const std::string field = k.substr(dot + 1);
    KernelSpec* target = which == "ff" ? &c.kernels.ff : which == "fl" ? &c.kernels.fl
                       : which == "ll" ? &c.kernels.ll : nullptr;
    if (!target) throw ValidationError(key + ": unknown kernel '" + which + "'");
    set_kernel_field(*target, key, field, v);
    return;
  }
  if (section == "cost") {
    static const std::map<std::string, double CostParams::*> fields = {
        {"a_f", &CostParams::a_f},       {"a_l", &CostParams::a_l},
        {"gamma", &CostParams::gamma},   {"lambda", &CostParams::lambda},
        {"reference", &CostParams::reference}, {"dt", &CostParams::dt},
        {"u_min", &CostParams::u_min},   {"u_max", &CostParams::u_max}};
    const auto it = fields.find(k);
    if (it == fields.end()) throw ValidationError("unknown key " + key);
    c.cost.*(it->second) = to_double(key, v);
    return;
  }
  if (section == "scaling") {
    if (k == "epsilon") c.scaling.epsilon = to_double(key, v);
    else if (k == "dt") c.scaling.dt = to_double(key, v);
    else if (k == "final_time") c.scaling.final_time = to_double(key, v);
    else if (k == "control_samples") c.scaling.control_samples = static_cast<int>(to_integer(key, v));
    else if (k == "estimator") {
      if (v == "full") c.scaling.estimator = PhiEstimatorKind::kFullDoubleSum;
      else if (v == "subsampled") c.scaling.estimator = PhiEstimatorKind::kSubsampledPairs;
      else throw ValidationError(key + ": expected full|subsampled");
    } else if (k == "collisions") {
      if (v == "one_sided") c.scaling.symmetric_collisions = false;
      else if (v == "symmetric") c.scaling.symmetric_collisions = true;
      else throw ValidationError(key + ": expected one_sided|symmetric");
    } else throw ValidationError("unknown key " + key);
    return;
  }
  if (section == "populations") {
    if (k == "rho_f") c.populations.rho_f = to_double(key, v);
    else if (k == "rho_l") c.populations.rho_l = to_double(key, v);
    else if (k == "n_followers" || k == "n_leaders") {
      const long long n = to_integer(key, v);
      if (n < 1) throw ValidationError(key + " must be >= 1");
      (k == "n_followers" ? c.populations.n_followers : c.populations.n_leaders) = static_cast<std::size_t>(n);
    } else if (k == "followers_init") c.populations.followers_init = to_interval(key, v);
    else if (k == "leaders_init") c.populations.leaders_init = to_interval(key, v);
    else throw ValidationError("unknown key " + key);
    return;
  }
  if (section == "dp") {
    if (k == "nodes") c.dp.nodes = static_cast<int>(to_integer(key, v));
    else if (k == "control_nodes") c.dp.control_nodes = static_cast<int>(to_integer(key, v));
    else if (k == "tol") c.dp.tol = to_double(key, v);
    else if (k == "max_iter") c.dp.max_iter = static_cast<int>(to_integer(key, v));
    else if (k == "method") {
      if (v == "value_iter") c.dp.method = DpMethod::kValueIteration;
      else if (v == "policy_iter") c.dp.method = DpMethod::kPolicyIteration;
      else if (v == "riccati") c.dp.method = DpMethod::kRiccati;
      else throw ValidationError(key + ": expected value_iter|policy_iter|riccati");
    } else if (k == "evaluation") {
      if (v == "tabulated") c.dp.evaluation = GridEvaluation::kTabulated;
      else if (v == "argmin") c.dp.evaluation = GridEvaluation::kArgmin;
      else throw ValidationError(key + ": expected tabulated|argmin");
    } else if (k == "grid_file") c.dp.grid_file = v;
    else if (k == "cache_dir") c.dp.cache_dir = v;
    else throw ValidationError("unknown key " + key);
    return;
  }
  if (section == "control") {
    if (k != "source") throw ValidationError("unknown key " + key);
    if (v == "none") c.control = ControlSelector::kNone;
    else if (v == "feedback") c.control = ControlSelector::kFeedback;
    else throw ValidationError(key + ": expected none|feedback");
    return;
  }
  if (section == "output") {
    if (k == "directory") c.output.directory = v;
    else if (k == "stride") c.output.stride = static_cast<int>(to_integer(key, v));
    else if (k == "dx") c.output.dx = to_double(key, v);
    else if (k == "surface_points") c.output.surface_points = static_cast<int>(to_integer(key, v));
    else throw ValidationError("unknown key " + key);
    return;
  }
  if (section == "run") {
    if (k == "name") c.name = v;
    else if (k == "seed") c.seed = static_cast<std::uint64_t>(to_integer(key, v));
    else if (k == "workers") c.workers = static_cast<int>(to_integer(key, v));
    else if (k == "preset") {}  // handled before the other keys
    else throw ValidationError("unknown key " + key);
    return;
  }
  throw ValidationError("unknown section [" + section + "]");
}

RunConfig shared_defaults() {
  RunConfig c;
  c.populations.rho_f = 1.0;
  c.populations.rho_l = 0.5;
  c.populations.n_followers = 10000;
  c.populations.n_leaders = 5000;
  c.scaling.epsilon = 0.01;
  c.scaling.dt = 2.0 / 3.0 * 1e-2;
  c.scaling.control_samples = 64;
  c.output.dx = 0.025;
  c.cost.u_min = -1.0;
  c.cost.u_max = 1.0;
  c.cost.dt = 2.0 * c.scaling.epsilon;
  return c;
}

}  // namespace

std::string_view method_name(DpMethod m) {
  switch (m) {
    case DpMethod::kValueIteration:
      return "value_iter";
    case DpMethod::kPolicyIteration:
      return "policy_iter";
    case DpMethod::kRiccati:
      return "riccati";
  }
  return "unknown";
}

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {"test1", "test2", "test2-noleaders", "test3a", "test3b"};
  return names;
}

RunConfig preset(std::string_view name, bool paper_scale) {
  RunConfig c = shared_defaults();
  c.name = std::string(name);
  if (name == "test1") {
    c.kernels = {KernelSpec::Constant(1.0), KernelSpec::Constant(1.0), KernelSpec::Constant(1.0)};
    c.cost.a_f = 1.0;
    c.cost.a_l = 1.0;
    c.cost.gamma = 1.0;
    c.cost.lambda = 1.0;
    c.cost.reference = -0.5;
    c.scaling.final_time = 2.5;
    c.populations.followers_init = {-1.0, 1.0};
    c.populations.leaders_init = {0.15, 0.85};
    c.dp.method = DpMethod::kRiccati;
  } else if (name == "test2" || name == "test2-noleaders") {
    c.kernels = {KernelSpec::BoundedConfidence(0.3), KernelSpec::BoundedConfidence(0.8),
                 KernelSpec::Constant(1.0)};
    c.cost.a_f = 10.0;
    c.cost.a_l = 0.1;
    c.cost.gamma = 0.05;
    c.cost.lambda = 0.1;
    c.cost.reference = 0.25;
    c.scaling.final_time = 10.0;
    c.populations.followers_init = {-0.9, 1.3};
    c.populations.leaders_init = {0.0, 0.5};
    c.dp.method = DpMethod::kPolicyIteration;
    c.dp.tol = 1e-5;
    c.scaling.control_samples = paper_scale ? 200000 : 64;
    if (name == "test2-noleaders") {
      c.kernels.fl = KernelSpec::Zero();
      c.control = ControlSelector::kNone;
    }
  } else if (name == "test3a" || name == "test3b") {
    const int s = name == "test3a" ? 1 : -1;
    c.kernels = {KernelSpec::Parabolic(s), KernelSpec::Parabolic(-s), KernelSpec::Parabolic(1)};
    c.cost.a_f = 1.0;
    c.cost.a_l = 0.01;
    c.cost.gamma = 1.0;
    c.cost.lambda = 0.5;
    c.cost.reference = 0.0;
    c.scaling.final_time = 3.5;
    c.notes.push_back("final_time 3.5; runs to 2.5 are also common for this setup");
    c.populations.followers_init = {0.05, 0.55};
    c.populations.leaders_init = {-0.45, 0.05};
    c.dp.method = DpMethod::kPolicyIteration;
    c.scaling.control_samples = paper_scale ? 500000 : 64;
  } else {
    throw ValidationError("unknown preset '" + std::string(name) + "'");
  }
  if (paper_scale) {
    c.populations.n_followers = 1000000;
    c.populations.n_leaders = 500000;
    // Riccati feedback has no factorized average; pair subsampling keeps
    // leader collisions O(sigma).
    if (c.dp.method == DpMethod::kRiccati) c.scaling.estimator = PhiEstimatorKind::kSubsampledPairs;
  }
  return c;
}

void RunConfig::validate() const {
  validate_kernel("ff", kernels.ff);
  validate_kernel("fl", kernels.fl);
  validate_kernel("ll", kernels.ll);
  cost.validate();
  scaling.validate(populations.rho_f, populations.rho_l);
  if (populations.n_followers < 1 || populations.n_leaders < 1) {
    throw ValidationError("populations: sample counts must be >= 1");
  }
  if (!(populations.followers_init.lo < populations.followers_init.hi)) {
    throw ValidationError("populations.followers_init: requires lo < hi");
  }
  if (!(populations.leaders_init.lo < populations.leaders_init.hi)) {
    throw ValidationError("populations.leaders_init: requires lo < hi");
  }
  if (dp.nodes < 2) throw ValidationError("dp.nodes must be >= 2");
  if (dp.control_nodes < 3 || dp.control_nodes % 2 == 0) {
    throw ValidationError("dp.control_nodes must be odd and >= 3");
  }
  if (!(dp.tol > 0.0)) throw ValidationError("dp.tol must be > 0");
  if (dp.max_iter < 1) throw ValidationError("dp.max_iter must be >= 1");
  if (dp.method == DpMethod::kRiccati && !kernels.all_linear()) {
    throw ValidationError("dp.method = riccati requires constant kernels");
  }
  if (output.stride < 1) throw ValidationError("output.stride must be >= 1");
  if (output.surface_points < 1) throw ValidationError("output.surface_points must be >= 1");
  if (!(output.dx > 0.0)) throw ValidationError("output.dx must be > 0");
  const double bins = 2.0 / output.dx;
  if (std::abs(bins - std::round(bins)) > 1e-9 * bins) {
    throw ValidationError("output.dx must divide the domain width 2");
  }
  if (workers < 1) throw ValidationError("run.workers must be >= 1");
}

DpSetup RunConfig::dp_setup() const {
  DpSetup s;
  s.geometry = {dp.nodes, -1.0, 1.0};
  s.cost = cost;
  s.kernels = kernels;
  s.control_nodes = dp.control_nodes;
  return s;
}

SimulationSetup RunConfig::simulation_setup() const {
  SimulationSetup s;
  s.kernels = kernels;
  s.cost = cost;
  s.scaling = scaling;
  s.rho_f = populations.rho_f;
  s.rho_l = populations.rho_l;
  s.n_followers = populations.n_followers;
  s.n_leaders = populations.n_leaders;
  s.followers_init = populations.followers_init;
  s.leaders_init = populations.leaders_init;
  s.dx = output.dx;
  s.stride = output.stride;
  s.surface_points = output.surface_points;
  s.workers = workers;
  return s;
}

RunConfig parse_config(std::string_view text) {
  struct Entry {
    std::string section, key, value;
  };
  std::vector<Entry> entries;
  std::vector<std::string> header_notes;
  std::string section;
  std::istringstream in{std::string(text)};
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty()) continue;
    if (t[0] == '#' || t[0] == ';') {
      // Comments ahead of the first section are kept as notes.
      if (section.empty() && entries.empty()) header_notes.push_back(trim(std::string_view(t).substr(1)));
      continue;
    }
    if (t.front() == '[') {
      if (t.back() != ']') throw ValidationError("line " + std::to_string(lineno) + ": malformed section");
      section = trim(std::string_view(t).substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ValidationError("line " + std::to_string(lineno) + ": expected key = value");
    if (section.empty()) throw ValidationError("line " + std::to_string(lineno) + ": key outside a section");
    entries.push_back({section, trim(std::string_view(t).substr(0, eq)), trim(std::string_view(t).substr(eq + 1))});
  }

  RunConfig c = shared_defaults();
  bool dt_given = false;
  for (const auto& e : entries) {
    if (e.section == "run" && e.key == "preset") c = preset(e.value);
  }
  for (const auto& e : entries) {
    apply_key(c, e.section, e.key, e.value);
    if (e.section == "cost" && e.key == "dt") dt_given = true;
  }
  if (!dt_given) c.cost.dt = 2.0 * c.scaling.epsilon;
  if (!header_notes.empty()) c.notes = std::move(header_notes);
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot read config '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream os;
  for (const auto& note : c.notes) os << "# " << note << "\n";
  const auto kernel = [&](const char* which, const KernelSpec& k) {
    os << which << ".kind = " << kernel_kind_name(k.kind) << "\n";
    switch (k.kind) {
      case KernelKind::kConstant:
        os << which << ".c = " << fmt_double(k.param) << "\n";
        break;
      case KernelKind::kBoundedConfidence:
        os << which << ".r = " << fmt_double(k.param) << "\n";
        break;
      case KernelKind::kParabolic:
        os << which << ".s = " << fmt_double(k.param) << "\n";
        break;
      case KernelKind::kZero:
        break;
    }
  };
  os << "[run]\nname = " << c.name << "\nseed = " << c.seed << "\nworkers = " << c.workers << "\n\n";
  os << "[kernels]\n";
  kernel("ff", c.kernels.ff);
  kernel("fl", c.kernels.fl);
  kernel("ll", c.kernels.ll);
  os << "\n[cost]\n"
     << "a_f = " << fmt_double(c.cost.a_f) << "\n"
     << "a_l = " << fmt_double(c.cost.a_l) << "\n"
     << "gamma = " << fmt_double(c.cost.gamma) << "\n"
     << "lambda = " << fmt_double(c.cost.lambda) << "\n"
     << "reference = " << fmt_double(c.cost.reference) << "\n"
     << "dt = " << fmt_double(c.cost.dt) << "\n"
     << "u_min = " << fmt_double(c.cost.u_min) << "\n"
     << "u_max = " << fmt_double(c.cost.u_max) << "\n";
  os << "\n[scaling]\n"
     << "epsilon = " << fmt_double(c.scaling.epsilon) << "\n"
     << "dt = " << fmt_double(c.scaling.dt) << "\n"
     << "final_time = " << fmt_double(c.scaling.final_time) << "\n"
     << "control_samples = " << c.scaling.control_samples << "\n"
     << "estimator = " << estimator_name(c.scaling.estimator) << "\n"
     << "collisions = " << (c.scaling.symmetric_collisions ? "symmetric" : "one_sided") << "\n";
  os << "\n[populations]\n"
     << "rho_f = " << fmt_double(c.populations.rho_f) << "\n"
     << "rho_l = " << fmt_double(c.populations.rho_l) << "\n"
     << "n_followers = " << c.populations.n_followers << "\n"
     << "n_leaders = " << c.populations.n_leaders << "\n"
     << "followers_init = " << fmt_double(c.populations.followers_init.lo) << ", "
     << fmt_double(c.populations.followers_init.hi) << "\n"
     << "leaders_init = " << fmt_double(c.populations.leaders_init.lo) << ", "
     << fmt_double(c.populations.leaders_init.hi) << "\n";
  os << "\n[dp]\n"
     << "nodes = " << c.dp.nodes << "\n"
     << "control_nodes = " << c.dp.control_nodes << "\n"
     << "tol = " << fmt_double(c.dp.tol) << "\n"
     << "max_iter = " << c.dp.max_iter << "\n"
     << "method = " << method_name(c.dp.method) << "\n"
     << "evaluation = " << evaluation_name(c.dp.evaluation) << "\n";
  if (!c.dp.grid_file.empty()) os << "grid_file = " << c.dp.grid_file << "\n";
  os << "cache_dir = " << c.dp.cache_dir << "\n";
  os << "\n[control]\nsource = " << (c.control == ControlSelector::kNone ? "none" : "feedback") << "\n";
  os << "\n[output]\n"
     << "directory = " << c.output.directory << "\n"
     << "stride = " << c.output.stride << "\n"
     << "dx = " << fmt_double(c.output.dx) << "\n"
     << "surface_points = " << c.output.surface_points << "\n";
  return os.str();
}

std::uint64_t dp_digest(const RunConfig& c) {
  std::ostringstream os;
  const auto k = [&](const KernelSpec& s) { os << static_cast<int>(s.kind) << ":" << fmt_double(s.param) << ";"; };
  k(c.kernels.ff);
  k(c.kernels.fl);
  k(c.kernels.ll);
  for (double v : {c.cost.a_f, c.cost.a_l, c.cost.gamma, c.cost.lambda, c.cost.reference, c.cost.dt,
                   c.cost.u_min, c.cost.u_max, c.dp.tol}) {
    os << fmt_double(v) << ";";
  }
  os << c.dp.nodes << ";" << c.dp.control_nodes << ";" << c.dp.max_iter << ";" << method_name(c.dp.method);
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : os.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace tpbb
