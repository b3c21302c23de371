#include "fepi/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "fepi/error.hpp"

namespace fepi::io {

namespace {

void write_number(std::ostringstream& out, double x) {
  if (!std::isfinite(x)) {
    out << "null";
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  std::string s(buf);
  // Keep a marker that the value is floating point.
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  out << s;
}

void write(std::ostringstream& out, const json& v, int indent, int depth) {
  const std::string pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * (depth + 1)), ' ') : "";
  const std::string close_pad = indent > 0 ? std::string(static_cast<std::size_t>(indent * depth), ' ') : "";
  const char* nl = indent > 0 ? "\n" : "";
  const char* colon = indent > 0 ? ": " : ":";
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out << "{}";
        return;
      }
      out << '{' << nl;
      bool first = true;
      for (auto it = v.begin(); it != v.end(); ++it) {
        if (!first) out << ',' << nl;
        first = false;
        out << pad << json(it.key()).dump() << colon;
        write(out, it.value(), indent, depth + 1);
      }
      out << nl << close_pad << '}';
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out << "[]";
        return;
      }
      // Numeric arrays stay on one line.
      bool flat = true;
      for (const auto& e : v) flat = flat && e.is_primitive();
      out << '[';
      bool first = true;
      for (const auto& e : v) {
        if (!first) out << ',' << (flat && indent > 0 ? " " : "");
        if (!flat) out << nl << pad;
        first = false;
        write(out, e, indent, depth + 1);
      }
      if (!flat) out << nl << close_pad;
      out << ']';
      return;
    }
    case json::value_t::number_float:
      write_number(out, v.get<double>());
      return;
    default:
      out << v.dump();
  }
}

void flatten_into(const json& v, const std::string& prefix, std::vector<std::pair<std::string, json>>& out) {
  if (v.is_object()) {
    for (auto it = v.begin(); it != v.end(); ++it)
      flatten_into(it.value(), prefix.empty() ? it.key() : prefix + "." + it.key(), out);
  } else if (!v.is_array()) {
    out.emplace_back(prefix, v);
  }
}

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw Error(ErrorKind::parameter, path + ": " + message);
}

const json& field(const json& spec, const char* key, const std::string& path) {
  if (!spec.is_object() || !spec.contains(key)) fail(path, std::string("missing field '") + key + "'");
  return spec.at(key);
}

double number(const json& v, const std::string& path) {
  if (!v.is_number()) fail(path, "expected a number");
  return v.get<double>();
}

std::vector<double> numbers(const json& v, const std::string& path) {
  if (!v.is_array()) fail(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(number(v[i], path + "/" + std::to_string(i)));
  return out;
}

std::vector<double> optional_numbers(const json& spec, const char* key, const std::string& path) {
  return spec.contains(key) ? numbers(spec.at(key), path + "/" + key) : std::vector<double>{};
}

std::string text(const json& v, const std::string& path) {
  if (!v.is_string()) fail(path, "expected a string");
  return v.get<std::string>();
}

// Rethrows library parameter errors with the JSON path attached.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::parameter && e.kind() != ErrorKind::spec) throw;
    throw Error(e.kind(), path + ": " + e.what());
  }
}

}  // namespace

std::string dump(const json& value, int indent) {
  std::ostringstream out;
  write(out, value, indent, 0);
  return out.str();
}

std::vector<std::pair<std::string, json>> flatten(const json& value) {
  std::vector<std::pair<std::string, json>> out;
  flatten_into(value, "", out);
  return out;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + "\"";
}

Measure measure_from_json(const json& spec, const GridConfig& grid, const std::string& path) {
  if (!spec.is_object()) fail(path, "expected a measure object");
  if (spec.contains("point_mass")) {
    const double x = number(spec.at("point_mass"), path + "/point_mass");
    return at_path(path, [&] { return point_mass(x, grid); });
  }
  if (spec.contains("family")) {
    const std::string name = text(spec.at("family"), path + "/family");
    const auto params = optional_numbers(spec, "params", path);
    return at_path(path, [&] { return standard_family(parse_family(name), params, grid); });
  }
  if (spec.contains("mixture")) {
    const json& parts = spec.at("mixture");
    if (!parts.is_array() || parts.empty()) fail(path + "/mixture", "expected a nonempty array of measures");
    std::vector<Measure> comps;
    for (std::size_t i = 0; i < parts.size(); ++i)
      comps.push_back(measure_from_json(parts[i], grid, path + "/mixture/" + std::to_string(i)));
    const auto weights = numbers(field(spec, "weights", path), path + "/weights");
    return at_path(path, [&] { return mixture(comps, weights, grid); });
  }
  if (spec.contains("density")) {
    const double lo = number(field(spec, "lo", path), path + "/lo");
    const double hi = number(field(spec, "hi", path), path + "/hi");
    auto density = numbers(spec.at("density"), path + "/density");
    std::vector<Atom> atoms;
    if (spec.contains("atoms")) {
      const json& a = spec.at("atoms");
      if (!a.is_array()) fail(path + "/atoms", "expected an array of [location, weight] pairs");
      for (std::size_t i = 0; i < a.size(); ++i) {
        const auto pair = numbers(a[i], path + "/atoms/" + std::to_string(i));
        if (pair.size() != 2) fail(path + "/atoms/" + std::to_string(i), "expected [location, weight]");
        atoms.push_back({pair[0], pair[1]});
      }
    }
    return at_path(path, [&] { return Measure(lo, hi, std::move(density), std::move(atoms)); });
  }
  fail(path, "measure needs one of 'family', 'point_mass', 'mixture' or 'density'");
}

SetSpec set_from_json(const json& spec, std::size_t n, const std::string& path) {
  const std::string kind = text(field(spec, "kind", path), path + "/kind");
  const auto center = optional_numbers(spec, "center", path);
  return at_path(path, [&]() -> SetSpec {
    switch (parse_set_kind(kind)) {
      case SetKind::ball: {
        const std::size_t dim =
            spec.contains("n") ? static_cast<std::size_t>(number(spec.at("n"), path + "/n")) : n;
        const double r = spec.contains("radius") ? number(spec.at("radius"), path + "/radius") : 1.0;
        return SetSpec::ball(dim, r, center);
      }
      case SetKind::box:
        if (spec.contains("half_width")) {
          const double w = number(spec.at("half_width"), path + "/half_width");
          return SetSpec::box(std::vector<double>(n, w), center);
        }
        return SetSpec::box(numbers(field(spec, "half_widths", path), path + "/half_widths"), center);
      case SetKind::ellipsoid:
        return SetSpec::ellipsoid(numbers(field(spec, "semi_axes", path), path + "/semi_axes"), center);
      case SetKind::intersection: {
        const json& members = field(spec, "members", path);
        if (!members.is_array()) fail(path + "/members", "expected an array of sets");
        std::vector<SetSpec> parts;
        for (std::size_t i = 0; i < members.size(); ++i)
          parts.push_back(set_from_json(members[i], n, path + "/members/" + std::to_string(i)));
        return SetSpec::intersection(std::move(parts));
      }
      case SetKind::scaled:
        return SetSpec::scaled(set_from_json(field(spec, "base", path), n, path + "/base"),
                               number(field(spec, "factor", path), path + "/factor"));
    }
    fail(path, "unknown set kind");
  });
}

ThetaSpec theta_from_json(const json& spec, const std::string& path) {
  ThetaSpec t;
  if (spec.is_string()) {
    t.kind = at_path(path, [&] { return parse_theta_kind(spec.get<std::string>()); });
    return t;
  }
  const std::string kind = text(field(spec, "kind", path), path + "/kind");
  t.kind = at_path(path, [&] { return parse_theta_kind(kind); });
  if (spec.contains("value")) t.value = number(spec.at("value"), path + "/value");
  if (spec.contains("seed")) t.seed = static_cast<std::uint64_t>(number(spec.at("seed"), path + "/seed"));
  if (spec.contains("cell")) t.cell = number(spec.at("cell"), path + "/cell");
  if (spec.contains("id")) t.id = text(spec.at("id"), path + "/id");
  at_path(path, [&] {
    t.validate();
    return 0;
  });
  return t;
}

StepFunctionSpec step_from_json(const json& spec, const GridConfig& grid, const std::string& path) {
  if (!spec.is_object()) fail(path, "expected a step function object");
  if (spec.contains("quantile")) {
    const Measure mu = measure_from_json(spec.at("quantile"), grid, path + "/quantile");
    const std::size_t nodes =
        spec.contains("nodes") ? static_cast<std::size_t>(number(spec.at("nodes"), path + "/nodes")) : 1025;
    const std::string id = spec.contains("id") ? text(spec.at("id"), path + "/id") : "quantile";
    return at_path(path, [&] { return StepFunctionSpec::from_quantile(mu, nodes, id); });
  }
  if (spec.contains("affine")) {
    const auto ab = numbers(spec.at("affine"), path + "/affine");
    if (ab.size() != 2) fail(path + "/affine", "expected [a, b]");
    return at_path(path, [&] { return StepFunctionSpec::affine(ab[0], ab[1]); });
  }
  auto t = numbers(field(spec, "t", path), path + "/t");
  auto v = numbers(field(spec, "values", path), path + "/values");
  return at_path(path, [&] { return StepFunctionSpec::from_table(std::move(t), std::move(v)); });
}

json to_json(const Measure& mu, bool with_density) {
  json j;
  j["lo"] = mu.lo();
  j["hi"] = mu.hi();
  j["cells"] = mu.cells();
  j["mean"] = mu.mean();
  j["variance"] = mu.variance();
  j["atom_mass"] = mu.atom_mass();
  if (with_density) j["density"] = std::vector<double>(mu.density().begin(), mu.density().end());
  json atoms = json::array();
  for (const Atom& a : mu.atoms()) atoms.push_back({a.location, a.weight});
  j["atoms"] = atoms;
  return j;
}

json to_json(const SetSpec& s) {
  json j;
  j["kind"] = to_string(s.kind);
  j["n"] = s.n;
  switch (s.kind) {
    case SetKind::ball: j["radius"] = s.radius; break;
    case SetKind::box: j["half_widths"] = s.axes; break;
    case SetKind::ellipsoid: j["semi_axes"] = s.axes; break;
    case SetKind::intersection: {
      json m = json::array();
      for (const auto& p : s.parts) m.push_back(to_json(p));
      j["members"] = m;
      break;
    }
    case SetKind::scaled:
      j["base"] = to_json(s.parts.front());
      j["factor"] = s.factor;
      break;
  }
  if (!s.center.empty()) j["center"] = s.center;
  return j;
}

json to_json(const ThetaSpec& t) {
  json j;
  j["kind"] = to_string(t.kind);
  j["value"] = t.value;
  if (t.kind == ThetaKind::complement_fraction) {
    j["seed"] = t.seed;
    j["cell"] = t.cell;
  }
  if (t.kind == ThetaKind::custom) j["id"] = t.id;
  return j;
}

json to_json(const VolumeEstimate& v) {
  return {{"value", v.value}, {"stderr", v.std_error}, {"samples", v.samples}, {"method", to_string(v.method)}};
}

json to_json(const GateReport& g) {
  return {{"applied", g.applied},   {"measured", g.measured}, {"threshold", g.threshold},
          {"ci_halfwidth", g.ci_halfwidth}, {"passed", g.passed}, {"tie", g.tie}, {"rule", g.rule}};
}

json to_json(const CheckReport& r) {
  json ctx;
  ctx["n"] = r.context.n;
  if (r.context.rho) ctx["rho"] = *r.context.rho;
  if (r.context.delta) ctx["delta"] = *r.context.delta;
  if (r.context.gamma) ctx["gamma"] = *r.context.gamma;
  ctx["c"] = r.context.c;
  ctx["C"] = r.context.C;
  if (r.context.c_lemma) ctx["c_lemma"] = *r.context.c_lemma;
  if (r.context.c1) ctx["c1"] = *r.context.c1;
  json details;
  for (const auto& [k, v] : r.details) details[k] = v;
  return {{"check", r.check},
          {"lhs", r.lhs},
          {"rhs", r.rhs},
          {"deficit", r.deficit},
          {"ci_halfwidth", r.ci_halfwidth},
          {"verdict", to_string(r.verdict)},
          {"conclusion_holds", r.conclusion_holds},
          {"gate", to_json(r.gate)},
          {"context", ctx},
          {"details", details}};
}

json to_json(const EntropyValue& v) {
  return {{"value", v.value}, {"divergent", v.divergent}, {"error_estimate", v.error_estimate}, {"power", v.power()}};
}

json to_json(const FreeConvolutionResult& r, bool with_density) {
  return {{"measure", to_json(r.measure, with_density)},
          {"worst_residual", r.worst_residual},
          {"unconverged_points", r.unconverged_points},
          {"evaluated_points", r.evaluated_points},
          {"total_iterations", r.total_iterations},
          {"raw_mass", r.raw_mass},
          {"renormalization", r.renormalization},
          {"eta", r.eta},
          {"translation_shortcut", r.translation_shortcut}};
}

json to_json(const EntropyReport& r, bool with_density) {
  return {{"chi_alpha", r.chi_alpha},
          {"chi_beta", r.chi_beta},
          {"chi_sum", r.chi_sum},
          {"alpha_divergent", r.alpha_divergent},
          {"beta_divergent", r.beta_divergent},
          {"sum_divergent", r.sum_divergent},
          {"power_alpha", r.power_alpha},
          {"power_beta", r.power_beta},
          {"power_sum", r.power_sum},
          {"deficit", r.deficit},
          {"quadrature_error_estimate", r.quadrature_error_estimate},
          {"convolution", to_json(r.convolution, with_density)}};
}

json to_json(const RestrictedSumResult& r) {
  json levels = json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"cells_per_axis", l.cells_per_axis},
                      {"interior", l.interior},
                      {"marked", l.marked},
                      {"hole_fraction", l.hole_fraction}});
  return {{"theta_volume", to_json(r.theta_volume)},
          {"sum_volume", to_json(r.sum_volume)},
          {"volume_a", to_json(r.volume_a)},
          {"volume_b", to_json(r.volume_b)},
          {"theta_fraction", r.theta_fraction},
          {"fraction_stderr", r.fraction_stderr},
          {"hits", r.hits},
          {"sum_interior", r.sum_interior},
          {"sum_marked", r.sum_marked},
          {"grid_cells_per_axis", r.grid_cells_per_axis},
          {"low_bias", r.low_bias},
          {"acceptance_a", r.acceptance_a},
          {"acceptance_b", r.acceptance_b},
          {"levels", levels}};
}

json to_json(const BallExample& b) {
  return {{"theta_fraction", b.theta_fraction}, {"sum_radius", b.sum_radius}, {"equality_gap", b.equality_gap}};
}

json to_json(const CapFraction& c) {
  return {{"value", c.value},
          {"clamped", c.clamped},
          {"s", c.s},
          {"t", c.t},
          {"quadrature_error", c.quadrature_error},
          {"normalization_error", c.normalization_error}};
}

json to_json(const Lemma13Result& r) {
  return {{"c1_estimate", r.c1_estimate}, {"theta_bound", r.theta_bound}, {"implied_c", r.implied_c},
          {"tau", r.tau},                 {"argmin_r0", r.argmin_r0},     {"report", to_json(r.report)}};
}

json to_json(const Proportion& p) {
  return {{"value", p.value}, {"ci_lo", p.lo}, {"ci_hi", p.hi}, {"successes", p.successes}, {"trials", p.trials}};
}

json to_json(const ThetaFractionResult& r) {
  return {{"unweighted", to_json(r.unweighted)},
          {"weighted", r.weighted},
          {"ess", r.ess},
          {"any_norm_violation", r.any_norm_violation}};
}

json to_json(const OmegaVolumeResult& r) {
  return {{"value", r.value},       {"log_volume", r.log_volume}, {"log_ck", r.log_ck},
          {"log_box_integral", r.log_box_integral}, {"ess", r.ess}, {"samples", r.samples}};
}

json to_json(const SumContainmentResult& r) {
  return {{"pass", to_json(r.pass)},
          {"filtered", r.filtered},
          {"trials", r.trials},
          {"empty_filter", r.empty_filter},
          {"N", r.N},
          {"eps", r.eps},
          {"R", r.R},
          {"sum_moments", r.sum_moments}};
}

}  // namespace fepi::io
