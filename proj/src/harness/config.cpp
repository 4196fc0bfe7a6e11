#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include <fmt/format.h>

#include "radtrans/errors.hpp"
#include "radtrans/harness.hpp"
#include "internal.hpp"

namespace radtrans::harness {

using nlohmann::json;

namespace {

constexpr std::array<std::pair<SolverKind, std::string_view>, 9> kSolverNames{{
    {SolverKind::Ap, "ap"},
    {SolverKind::ApNlopacity, "ap_nlopacity"},
    {SolverKind::Diffusion3, "diffusion3"},
    {SolverKind::Diffusion3Nlopacity, "diffusion3_nlopacity"},
    {SolverKind::Diffusion2Stage, "diffusion2stage"},
    {SolverKind::ImplicitDiffusion, "implicit_diffusion"},
    {SolverKind::ImplicitDiffusionT7, "implicit_diffusion_T7"},
    {SolverKind::ExplicitTransport, "explicit_transport"},
    {SolverKind::IterativeImplicit, "iterative_implicit"},
}};

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void check_keys(const json& obj, const std::string& prefix,
                std::initializer_list<std::string_view> allowed) {
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError(join(prefix, item.key()), "unknown key");
    }
  }
}

const json& require_object(const json& parent, const std::string& key, const std::string& path) {
  if (!parent.contains(key)) throw ConfigError(path, "missing required key");
  const json& v = parent.at(key);
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  return v;
}

double number_value(const json& v, const std::string& path) {
  if (!v.is_number()) throw ConfigError(path, "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(path, "expected a finite number");
  return d;
}

double get_number(const json& obj, const std::string& key, const std::string& prefix,
                  std::optional<double> fallback) {
  const std::string path = join(prefix, key);
  if (!obj.contains(key)) {
    if (!fallback) throw ConfigError(path, "missing required key");
    return *fallback;
  }
  return number_value(obj.at(key), path);
}

std::size_t get_count(const json& obj, const std::string& key, std::optional<std::size_t> fallback) {
  if (!obj.contains(key)) {
    if (!fallback) throw ConfigError(key, "missing required key");
    return *fallback;
  }
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(key, "expected an integer");
  const auto n = v.get<long long>();
  if (n < 0) throw ConfigError(key, "must be >= 0");
  return static_cast<std::size_t>(n);
}

int get_int(const json& obj, const std::string& key, const std::string& prefix, int fallback) {
  const std::string path = join(prefix, key);
  if (!obj.contains(key)) return fallback;
  const json& v = obj.at(key);
  if (!v.is_number_integer()) throw ConfigError(path, "expected an integer");
  return v.get<int>();
}

std::string get_string(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.contains(key)) throw ConfigError(path, "missing required key");
  const json& v = obj.at(key);
  if (!v.is_string()) throw ConfigError(path, "expected a string");
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) throw ConfigError(path, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out.push_back(number_value(v[i], fmt::format("{}[{}]", path, i)));
  }
  return out;
}

SpatialOpacity parse_spatial_opacity(const json& v, const std::string& path) {
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  const std::string type = get_string(v, "type", join(path, "type"));
  if (type == "constant") {
    check_keys(v, path, {"type", "value"});
    return ConstantOpacity{get_number(v, "value", path, std::nullopt)};
  }
  if (type == "striped") {
    check_keys(v, path, {"type", "sigma0"});
    return StripedOpacity{get_number(v, "sigma0", path, std::nullopt)};
  }
  if (type == "vanishing") {
    check_keys(v, path, {"type"});
    return VanishingPolyOpacity{};
  }
  if (type == "tabulated") {
    check_keys(v, path, {"type", "values"});
    if (!v.contains("values")) throw ConfigError(join(path, "values"), "missing required key");
    return TabulatedOpacity{number_array(v.at("values"), join(path, "values"))};
  }
  throw ConfigError(join(path, "type"), "unknown opacity type '" + type + "'");
}

OpacityModel parse_opacity(const json& v) {
  const std::string path = "opacity";
  if (!v.is_object()) throw ConfigError(path, "expected an object");
  const std::string type = get_string(v, "type", "opacity.type");
  if (type == "temperature_dependent") {
    check_keys(v, path, {"type", "base", "value"});
    if (v.contains("base") && v.contains("value")) {
      throw ConfigError(path, "give either base or value, not both");
    }
    if (v.contains("value")) {
      return TemperatureDependentOpacity{ConstantOpacity{get_number(v, "value", path, std::nullopt)}};
    }
    if (!v.contains("base")) return TemperatureDependentOpacity{ConstantOpacity{1.0}};
    return TemperatureDependentOpacity{parse_spatial_opacity(v.at("base"), "opacity.base")};
  }
  return std::visit([](auto&& s) -> OpacityModel { return s; }, parse_spatial_opacity(v, path));
}

InitialCondition parse_ic(const json& v) {
  const std::string path = "ic";
  std::string type;
  if (v.is_string()) {
    type = v.get<std::string>();
  } else if (v.is_object()) {
    type = get_string(v, "type", "ic.type");
  } else {
    throw ConfigError(path, "expected a string or an object");
  }
  const json empty = json::object();
  const json& obj = v.is_object() ? v : empty;
  if (type == "compact_parabola") {
    check_keys(obj, path, {"type"});
    return CompactParabola{};
  }
  if (type == "sine_quarter_power") {
    check_keys(obj, path, {"type"});
    return SineQuarterPower{};
  }
  if (type == "flat_intensity") {
    check_keys(obj, path, {"type", "value", "temperature"});
    FlatIntensity f;
    f.value = get_number(obj, "value", path, f.value);
    f.temperature = get_number(obj, "temperature", path, f.temperature);
    return f;
  }
  if (type == "tanh") {
    check_keys(obj, path, {"type", "center", "steepness", "amplitude"});
    TanhTemperature t;
    t.center = get_number(obj, "center", path, t.center);
    t.steepness = get_number(obj, "steepness", path, t.steepness);
    t.amplitude = get_number(obj, "amplitude", path, t.amplitude);
    return t;
  }
  if (type == "uniform") {
    check_keys(obj, path, {"type", "temperature"});
    return UniformTemperature{get_number(obj, "temperature", path, std::nullopt)};
  }
  if (type == "custom") {
    check_keys(obj, path, {"type", "temperature"});
    if (!obj.contains("temperature")) throw ConfigError("ic.temperature", "missing required key");
    return CustomTemperature{number_array(obj.at("temperature"), "ic.temperature")};
  }
  throw ConfigError(v.is_object() ? "ic.type" : "ic", "unknown initial condition '" + type + "'");
}

BoundarySide parse_side(const json& v, const std::string& path) {
  BoundarySide side;
  std::string type;
  if (v.is_string()) {
    type = v.get<std::string>();
  } else if (v.is_object()) {
    type = get_string(v, "type", join(path, "type"));
  } else {
    throw ConfigError(path, "expected a string or an object");
  }
  const json empty = json::object();
  const json& obj = v.is_object() ? v : empty;
  if (type == "vacuum" || type == "zero_flux") {
    check_keys(obj, path, {"type"});
    side.kind = type == "vacuum" ? BoundarySide::Kind::Vacuum : BoundarySide::Kind::ZeroFlux;
    return side;
  }
  if (type == "incoming" || type == "temperature") {
    check_keys(obj, path, {"type", "value"});
    side.kind =
        type == "incoming" ? BoundarySide::Kind::Incoming : BoundarySide::Kind::Temperature;
    side.value = get_number(obj, "value", path, std::nullopt);
    return side;
  }
  throw ConfigError(v.is_object() ? join(path, "type") : path,
                    "unknown boundary type '" + type + "'");
}

json spatial_opacity_json(const SpatialOpacity& s) {
  return std::visit(
      [](const auto& o) -> json {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ConstantOpacity>) {
          return {{"type", "constant"}, {"value", o.value}};
        } else if constexpr (std::is_same_v<T, StripedOpacity>) {
          return {{"type", "striped"}, {"sigma0", o.sigma0}};
        } else if constexpr (std::is_same_v<T, VanishingPolyOpacity>) {
          return {{"type", "vanishing"}};
        } else {
          return {{"type", "tabulated"}, {"values", o.values}};
        }
      },
      s);
}

json side_json(const BoundarySide& s) {
  switch (s.kind) {
    case BoundarySide::Kind::Vacuum: return "vacuum";
    case BoundarySide::Kind::ZeroFlux: return "zero_flux";
    case BoundarySide::Kind::Incoming: return {{"type", "incoming"}, {"value", s.value}};
    case BoundarySide::Kind::Temperature: return {{"type", "temperature"}, {"value", s.value}};
  }
  return nullptr;
}

double side_temperature(const BoundarySide& s, const PhysicalConstants& k) {
  switch (s.kind) {
    case BoundarySide::Kind::Incoming: return std::pow(s.value / (k.a * k.c), 0.25);
    case BoundarySide::Kind::Temperature: return s.value;
    default: return 0.0;
  }
}

}  // namespace

std::string_view solver_name(SolverKind kind) noexcept {
  for (const auto& [k, name] : kSolverNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

SolverKind parse_solver(std::string_view name) {
  for (const auto& [k, n] : kSolverNames) {
    if (n == name) return k;
  }
  throw ConfigError("solver", fmt::format("unknown solver '{}'", name));
}

bool is_transport_solver(SolverKind kind) noexcept {
  return kind == SolverKind::Ap || kind == SolverKind::ApNlopacity ||
         kind == SolverKind::ExplicitTransport || kind == SolverKind::IterativeImplicit;
}

bool needs_temperature_dependent_opacity(SolverKind kind) noexcept {
  return kind == SolverKind::ApNlopacity || kind == SolverKind::Diffusion3Nlopacity ||
         kind == SolverKind::ImplicitDiffusionT7 || kind == SolverKind::IterativeImplicit;
}

double SimulationConfig::time_step() const {
  return dt ? *dt : cfl * (x_max - x_min) / static_cast<double>(nx);
}

PhysicalConstants SimulationConfig::physical_constants() const {
  PhysicalConstants k = constants;
  k.epsilon = epsilon;
  return k;
}

SimulationConfig parse_config(const json& doc) {
  if (!doc.is_object()) throw ConfigError("", "configuration must be a JSON object");
  check_keys(doc, "",
             {"solver", "nx", "nv", "epsilon", "cfl", "dt", "tmax", "domain", "constants",
              "opacity", "ic", "bc", "tolerances", "output"});
  SimulationConfig c;
  c.solver = parse_solver(get_string(doc, "solver", "solver"));
  c.nx = get_count(doc, "nx", std::nullopt);
  c.nv = get_count(doc, "nv", c.nv);
  c.epsilon = get_number(doc, "epsilon", "", c.epsilon);
  if (doc.contains("dt")) c.dt = get_number(doc, "dt", "", std::nullopt);
  c.cfl = get_number(doc, "cfl", "", c.dt ? std::optional<double>(c.cfl) : std::nullopt);
  c.tmax = get_number(doc, "tmax", "", std::nullopt);
  if (doc.contains("domain")) {
    const auto d = number_array(doc.at("domain"), "domain");
    if (d.size() != 2) throw ConfigError("domain", "expected [x_min, x_max]");
    c.x_min = d[0];
    c.x_max = d[1];
  }
  if (doc.contains("constants")) {
    const json& k = require_object(doc, "constants", "constants");
    check_keys(k, "constants", {"a", "c", "cv", "dd"});
    c.constants.a = get_number(k, "a", "constants", c.constants.a);
    c.constants.c = get_number(k, "c", "constants", c.constants.c);
    c.constants.cv = get_number(k, "cv", "constants", c.constants.cv);
    c.constants.dd = get_number(k, "dd", "constants", c.constants.dd);
  }
  if (!doc.contains("opacity")) throw ConfigError("opacity", "missing required key");
  c.opacity = parse_opacity(doc.at("opacity"));
  if (!doc.contains("ic")) throw ConfigError("ic", "missing required key");
  c.ic = parse_ic(doc.at("ic"));
  if (doc.contains("bc")) {
    const json& b = require_object(doc, "bc", "bc");
    check_keys(b, "bc", {"left", "right"});
    if (b.contains("left")) c.bc.left = parse_side(b.at("left"), "bc.left");
    if (b.contains("right")) c.bc.right = parse_side(b.at("right"), "bc.right");
  }
  if (doc.contains("tolerances")) {
    const json& t = require_object(doc, "tolerances", "tolerances");
    check_keys(t, "tolerances",
               {"newton", "linear", "fixedpoint", "sigma_floor", "max_newton_iterations",
                "max_fixedpoint_iterations", "blowup_factor"});
    auto& tol = c.tolerances;
    tol.newton = get_number(t, "newton", "tolerances", tol.newton);
    tol.linear = get_number(t, "linear", "tolerances", tol.linear);
    tol.fixed_point = get_number(t, "fixedpoint", "tolerances", tol.fixed_point);
    tol.sigma_floor = get_number(t, "sigma_floor", "tolerances", tol.sigma_floor);
    tol.max_newton_iterations =
        get_int(t, "max_newton_iterations", "tolerances", tol.max_newton_iterations);
    tol.max_fixed_point_iterations =
        get_int(t, "max_fixedpoint_iterations", "tolerances", tol.max_fixed_point_iterations);
    c.blowup_factor = get_number(t, "blowup_factor", "tolerances", c.blowup_factor);
  }
  if (doc.contains("output")) {
    const json& o = require_object(doc, "output", "output");
    check_keys(o, "output", {"snapshots"});
    if (o.contains("snapshots")) c.snapshots = number_array(o.at("snapshots"), "output.snapshots");
  }
  validate_config(c);
  return c;
}

SimulationConfig parse_config_text(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", std::string("invalid JSON: ") + e.what());
  }
  return parse_config(doc);
}

SimulationConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open configuration file " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

json config_to_json(const SimulationConfig& c) {
  json j;
  j["solver"] = std::string(solver_name(c.solver));
  j["nx"] = c.nx;
  j["nv"] = c.nv;
  j["epsilon"] = c.epsilon;
  j["cfl"] = c.cfl;
  if (c.dt) j["dt"] = *c.dt;
  j["tmax"] = c.tmax;
  j["domain"] = {c.x_min, c.x_max};
  j["constants"] = {{"a", c.constants.a}, {"c", c.constants.c}, {"cv", c.constants.cv},
                    {"dd", c.constants.dd}};
  if (const auto* td = std::get_if<TemperatureDependentOpacity>(&c.opacity)) {
    j["opacity"] = {{"type", "temperature_dependent"}, {"base", spatial_opacity_json(td->base)}};
  } else {
    j["opacity"] = std::visit(
        [](const auto& o) -> json {
          using T = std::decay_t<decltype(o)>;
          if constexpr (std::is_same_v<T, TemperatureDependentOpacity>) {
            return nullptr;
          } else {
            return spatial_opacity_json(o);
          }
        },
        c.opacity);
  }
  j["ic"] = std::visit(
      [](const auto& ic) -> json {
        using T = std::decay_t<decltype(ic)>;
        if constexpr (std::is_same_v<T, CompactParabola>) {
          return "compact_parabola";
        } else if constexpr (std::is_same_v<T, SineQuarterPower>) {
          return "sine_quarter_power";
        } else if constexpr (std::is_same_v<T, FlatIntensity>) {
          return {{"type", "flat_intensity"}, {"value", ic.value}, {"temperature", ic.temperature}};
        } else if constexpr (std::is_same_v<T, TanhTemperature>) {
          return {{"type", "tanh"},
                  {"center", ic.center},
                  {"steepness", ic.steepness},
                  {"amplitude", ic.amplitude}};
        } else if constexpr (std::is_same_v<T, UniformTemperature>) {
          return {{"type", "uniform"}, {"temperature", ic.temperature}};
        } else {
          return {{"type", "custom"}, {"temperature", ic.temperature}};
        }
      },
      c.ic);
  j["bc"] = {{"left", side_json(c.bc.left)}, {"right", side_json(c.bc.right)}};
  j["tolerances"] = {{"newton", c.tolerances.newton},
                     {"linear", c.tolerances.linear},
                     {"fixedpoint", c.tolerances.fixed_point},
                     {"sigma_floor", c.tolerances.sigma_floor},
                     {"max_newton_iterations", c.tolerances.max_newton_iterations},
                     {"max_fixedpoint_iterations", c.tolerances.max_fixed_point_iterations},
                     {"blowup_factor", c.blowup_factor}};
  j["output"] = {{"snapshots", c.snapshots}};
  return j;
}

void validate_config(const SimulationConfig& c) {
  const bool transport = is_transport_solver(c.solver);
  if (c.nx < 1) throw ConfigError("nx", "must be >= 1");
  if (transport && c.nx < 2) throw ConfigError("nx", "transport solvers need nx >= 2");
  if (c.nv < 1) throw ConfigError("nv", "must be >= 1");
  if (!(c.epsilon > 0.0)) throw ConfigError("epsilon", "must be > 0");
  if (!(c.cfl > 0.0)) throw ConfigError("cfl", "must be > 0");
  if (c.dt && !(*c.dt > 0.0)) throw ConfigError("dt", "must be > 0");
  if (!(c.tmax > 0.0)) throw ConfigError("tmax", "must be > 0");
  if (!(c.x_min < c.x_max)) throw ConfigError("domain", "requires x_min < x_max");
  const std::pair<const char*, double> constants[] = {
      {"constants.a", c.constants.a}, {"constants.c", c.constants.c},
      {"constants.cv", c.constants.cv}, {"constants.dd", c.constants.dd}};
  for (const auto& [key, value] : constants) {
    if (!(value > 0.0) || !std::isfinite(value)) throw ConfigError(key, "must be positive and finite");
  }
  const auto& t = c.tolerances;
  if (!(t.newton > 0.0)) throw ConfigError("tolerances.newton", "must be > 0");
  if (!(t.linear > 0.0)) throw ConfigError("tolerances.linear", "must be > 0");
  if (!(t.fixed_point > 0.0)) throw ConfigError("tolerances.fixedpoint", "must be > 0");
  if (!(t.sigma_floor > 0.0)) throw ConfigError("tolerances.sigma_floor", "must be > 0");
  if (t.max_newton_iterations < 1) {
    throw ConfigError("tolerances.max_newton_iterations", "must be >= 1");
  }
  if (t.max_fixed_point_iterations < 1) {
    throw ConfigError("tolerances.max_fixedpoint_iterations", "must be >= 1");
  }
  if (!(c.blowup_factor > 1.0)) throw ConfigError("tolerances.blowup_factor", "must be > 1");

  const bool td = is_temperature_dependent(c.opacity);
  if (c.solver != SolverKind::Diffusion2Stage && td != needs_temperature_dependent_opacity(c.solver)) {
    throw ConfigError("opacity", fmt::format("solver {} requires {} opacity", solver_name(c.solver),
                                             td ? "temperature-independent" : "temperature_dependent"));
  }
  const Grid1D grid = c.grid();
  std::vector<double> sigma;
  try {
    sigma = opacity_at_centers(c.opacity, grid);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("opacity", e.what());
  }
  if (!transport) {
    for (double s : sigma) {
      if (!(s > 0.0)) throw ConfigError("opacity", "diffusion solvers need sigma > 0 everywhere");
    }
  }
  try {
    initial_temperature(c.ic, grid, c.physical_constants());
  } catch (const std::invalid_argument& e) {
    throw ConfigError("ic", e.what());
  }
  for (const auto& [side, name] : {std::pair{c.bc.left, "bc.left"}, std::pair{c.bc.right, "bc.right"}}) {
    if (transport && side.kind == BoundarySide::Kind::ZeroFlux) {
      throw ConfigError(name, "zero_flux is only available to diffusion solvers");
    }
    if (!(side.value >= 0.0)) throw ConfigError(name, "value must be >= 0");
  }
  for (double s : c.snapshots) {
    if (!(s > 0.0 && s <= c.tmax)) throw ConfigError("output.snapshots", "times must lie in (0, tmax]");
  }
}

TransportBoundary transport_boundary(const SimulationConfig& c) {
  const double ac = c.constants.a * c.constants.c;
  auto intensity = [&](const BoundarySide& s, const char* name) {
    switch (s.kind) {
      case BoundarySide::Kind::Vacuum: return 0.0;
      case BoundarySide::Kind::Incoming: return s.value;
      case BoundarySide::Kind::Temperature: return ac * std::pow(s.value, 4.0);
      case BoundarySide::Kind::ZeroFlux: break;
    }
    throw ConfigError(name, "zero_flux is only available to diffusion solvers");
  };
  return TransportBoundary::isotropic(c.nv, intensity(c.bc.left, "bc.left"),
                                      intensity(c.bc.right, "bc.right"));
}

DiffusionBoundary diffusion_boundary(const SimulationConfig& c) {
  auto convert = [&](const BoundarySide& s) -> DiffusionBoundarySide {
    if (s.kind == BoundarySide::Kind::ZeroFlux) return ZeroFlux{};
    return Dirichlet{side_temperature(s, c.constants)};
  };
  return DiffusionBoundary{convert(c.bc.left), convert(c.bc.right)};
}

std::string stability_criterion(const SimulationConfig& c) {
  return fmt::format(
      "unstable when any field is non-finite or max T exceeds {:g} x max(initial max T, "
      "boundary temperature)",
      c.blowup_factor);
}

double boundary_temperature_bound(const SimulationConfig& c) {
  return std::max(side_temperature(c.bc.left, c.constants), side_temperature(c.bc.right, c.constants));
}

}  // namespace radtrans::harness
