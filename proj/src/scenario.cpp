#include "dpmarket/scenario.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <vector>

namespace dpmarket {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) {
    s.remove_prefix(1);
  }
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(const std::string& message) {
  throw ScenarioParseError("scenario: " + message);
}

double parse_number(std::string_view token, const std::string& field) {
  token = trim(token);
  if (token.empty()) fail("field '" + field + "': empty number");
  double value = 0.0;
  const auto* begin = token.data();
  const auto* end = token.data() + token.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    fail("field '" + field + "': cannot parse number '" + std::string(token) +
         "'");
  }
  return value;
}

std::vector<double> parse_list(std::string_view token,
                               const std::string& field) {
  token = trim(token);
  if (token.size() < 2 || token.front() != '[' || token.back() != ']') {
    fail("field '" + field + "': expected a bracketed list");
  }
  token = token.substr(1, token.size() - 2);
  std::vector<double> values;
  std::size_t start = 0;
  while (start <= token.size()) {
    const std::size_t comma = token.find(',', start);
    const std::string_view item = comma == std::string_view::npos
                                      ? token.substr(start)
                                      : token.substr(start, comma - start);
    if (!trim(item).empty()) values.push_back(parse_number(item, field));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  if (values.empty()) fail("field '" + field + "': list must be nonempty");
  return values;
}

// "[coeffs]: value" entries separated by ';'
std::vector<std::pair<std::vector<double>, double>> parse_keyed_entries(
    std::string_view token, const std::string& field) {
  std::vector<std::pair<std::vector<double>, double>> entries;
  std::size_t start = 0;
  const std::string text(token);
  while (start < text.size()) {
    std::size_t semi = text.find(';', start);
    if (semi == std::string::npos) semi = text.size();
    const std::string_view entry = trim(std::string_view(text).substr(
        start, semi - start));
    if (!entry.empty()) {
      const std::size_t colon = entry.rfind(':');
      if (colon == std::string_view::npos) {
        fail("field '" + field + "': expected '[coeffs]: value'");
      }
      entries.emplace_back(parse_list(entry.substr(0, colon), field),
                           parse_number(entry.substr(colon + 1), field));
    }
    start = semi + 1;
  }
  if (entries.empty()) fail("field '" + field + "': no entries");
  return entries;
}

}  // namespace

std::string_view sweep_variable_name(SweepVariable v) {
  switch (v) {
    case SweepVariable::K:
      return "k";
    case SweepVariable::Q:
      return "q";
    case SweepVariable::P:
      return "p";
    case SweepVariable::Gamma:
      return "gamma";
  }
  return "unknown";
}

ScenarioDocument parse_scenario(std::string_view text,
                                bool allow_out_of_range_p) {
  std::map<std::string, std::string, std::less<>> fields;
  std::vector<std::string> override_entries;

  std::size_t pos = 0;
  int line_no = 0;
  while (pos <= text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;

    const std::size_t hash = line.find('#');
    if (hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;

    const std::size_t eq = line.find('=');
    if (eq == std::string_view::npos) {
      fail("line " + std::to_string(line_no) + ": expected 'key = value'");
    }
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) {
      fail("line " + std::to_string(line_no) + ": empty key");
    }
    if (key == "sigma_min_override") {
      override_entries.push_back(value);
      continue;
    }
    if (!fields.emplace(key, value).second) {
      fail("duplicate key '" + key + "'");
    }
  }

  static const char* kKnownKeys[] = {
      "coeffs",         "privacy_weights", "gamma",        "sigma_min",
      "p",              "norm_kind",       "norm_weights", "intensity_kind",
      "intensity_value", "intensity_table", "sweep_var",    "sweep_lo",
      "sweep_hi",       "sweep_points",    "sweep_scale"};
  for (const auto& [key, value] : fields) {
    bool known = false;
    for (const char* k : kKnownKeys) known = known || key == k;
    if (!known) fail("unknown key '" + key + "'");
  }

  const auto required = [&](const char* key) -> const std::string& {
    const auto it = fields.find(key);
    if (it == fields.end()) fail("missing required key '" + std::string(key) + "'");
    return it->second;
  };
  const auto optional = [&](const char* key) -> const std::string* {
    const auto it = fields.find(key);
    return it == fields.end() ? nullptr : &it->second;
  };

  ScenarioDocument doc;
  doc.query.coeffs = parse_list(required("coeffs"), "coeffs");
  doc.scenario.privacy_weights =
      parse_list(required("privacy_weights"), "privacy_weights");
  doc.scenario.change_bound = parse_number(required("gamma"), "gamma");
  doc.scenario.sigma_min = parse_number(required("sigma_min"), "sigma_min");
  doc.scenario.exponent = parse_number(required("p"), "p");

  if (const std::string* norm = optional("norm_kind")) {
    if (*norm == "l2") {
      doc.query.norm_kind = NormKind::L2;
    } else if (*norm == "weighted_l2") {
      doc.query.norm_kind = NormKind::WeightedL2;
      doc.query.norm_weights =
          parse_list(required("norm_weights"), "norm_weights");
    } else {
      fail("field 'norm_kind': unknown value '" + *norm +
           "' (expected l2 or weighted_l2)");
    }
  } else if (optional("norm_weights")) {
    fail("field 'norm_weights': only valid with norm_kind = weighted_l2");
  }

  if (const std::string* kind = optional("intensity_kind")) {
    if (*kind == "log_support") {
      doc.query.intensity_kind = IntensityKind::LogSupport;
    } else if (*kind == "constant") {
      doc.query.intensity_kind = IntensityKind::Constant;
      doc.query.intensity_value =
          parse_number(required("intensity_value"), "intensity_value");
    } else if (*kind == "log_shift") {
      doc.query.intensity_kind = IntensityKind::LogShift;
      doc.query.intensity_value =
          parse_number(required("intensity_value"), "intensity_value");
    } else if (*kind == "table") {
      doc.query.intensity_kind = IntensityKind::Table;
      doc.query.intensity_table =
          parse_keyed_entries(required("intensity_table"), "intensity_table");
    } else {
      fail("field 'intensity_kind': unknown value '" + *kind + "'");
    }
  } else if (optional("intensity_value") || optional("intensity_table")) {
    fail("intensity_value/intensity_table require an intensity_kind");
  }

  for (const std::string& entry : override_entries) {
    const auto parsed = parse_keyed_entries(entry, "sigma_min_override");
    doc.scenario.sigma_min_overrides.insert(
        doc.scenario.sigma_min_overrides.end(), parsed.begin(), parsed.end());
  }

  if (const std::string* var = optional("sweep_var")) {
    SweepRequest sweep;
    if (*var == "k") {
      sweep.variable = SweepVariable::K;
    } else if (*var == "q") {
      sweep.variable = SweepVariable::Q;
    } else if (*var == "p") {
      sweep.variable = SweepVariable::P;
    } else if (*var == "gamma") {
      sweep.variable = SweepVariable::Gamma;
    } else {
      fail("field 'sweep_var': unknown value '" + *var +
           "' (expected k, q, p or gamma)");
    }
    sweep.grid.lo = parse_number(required("sweep_lo"), "sweep_lo");
    sweep.grid.hi = parse_number(required("sweep_hi"), "sweep_hi");
    const double points = parse_number(required("sweep_points"), "sweep_points");
    if (points < 2.0 || points != std::floor(points)) {
      fail("field 'sweep_points': expected an integer >= 2");
    }
    sweep.grid.points = static_cast<std::size_t>(points);
    if (const std::string* scale = optional("sweep_scale")) {
      if (*scale == "linear") {
        sweep.grid.scale = oracle::GridScale::Linear;
      } else if (*scale == "log") {
        sweep.grid.scale = oracle::GridScale::Logarithmic;
      } else {
        fail("field 'sweep_scale': expected linear or log");
      }
    }
    doc.sweep = sweep;
  } else if (optional("sweep_lo") || optional("sweep_hi") ||
             optional("sweep_points") || optional("sweep_scale")) {
    fail("sweep_* keys require sweep_var");
  }

  // invariant validation throws std::invalid_argument, not a parse error
  doc.query.validate();
  doc.scenario.validate(allow_out_of_range_p);
  if (doc.query.coeffs.size() != doc.scenario.privacy_weights.size()) {
    throw std::invalid_argument(
        "scenario: coeffs and privacy_weights lengths differ");
  }
  if (doc.sweep) doc.sweep->grid.validate();
  return doc;
}

ScenarioDocument load_scenario(const std::filesystem::path& path,
                               bool allow_out_of_range_p) {
  std::ifstream input(path);
  if (!input) {
    fail("cannot open file '" + path.string() + "'");
  }
  std::ostringstream buffer;
  buffer << input.rdbuf();
  return parse_scenario(buffer.str(), allow_out_of_range_p);
}

std::string format_double(double value) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

}  // namespace dpmarket
