#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <chrono>
#include <ctime>

#include "CLI11.hpp"

#include "evopagator/errors.hpp"
#include "evopagator/record.hpp"

namespace evo::cli {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

const std::vector<StudyKind> kAllStudies{StudyKind::kInvariants,      StudyKind::kConverge,
                                         StudyKind::kDysonCompare,    StudyKind::kRegularitySweep,
                                         StudyKind::kDomainEscape,    StudyKind::kClosedForm};

int as_int(const std::string& key, const json& v) {
  if (!v.is_number_integer()) throw ConfigError("'" + key + "' expects an integer");
  return v.get<int>();
}

double as_double(const std::string& key, const json& v) {
  if (!v.is_number()) throw ConfigError("'" + key + "' expects a number");
  return v.get<double>();
}

std::string as_string(const std::string& key, const json& v) {
  if (!v.is_string()) throw ConfigError("'" + key + "' expects a string");
  return v.get<std::string>();
}

using Setter = std::function<void(StudyConfig&, const std::string&, const json&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"model", [](StudyConfig& c, const std::string& k, const json& v) { c.model = as_string(k, v); }},
      {"dimension", [](StudyConfig& c, const std::string& k, const json& v) { c.dimension = as_int(k, v); }},
      {"horizon", [](StudyConfig& c, const std::string& k, const json& v) { c.horizon = as_double(k, v); }},
      {"time", [](StudyConfig& c, const std::string& k, const json& v) { c.time = as_double(k, v); }},
      {"start", [](StudyConfig& c, const std::string& k, const json& v) { c.start = as_double(k, v); }},
      {"grid_size", [](StudyConfig& c, const std::string& k, const json& v) { c.grid_size = as_int(k, v); }},
      {"half_period", [](StudyConfig& c, const std::string& k, const json& v) { c.half_period = as_double(k, v); }},
      {"alpha", [](StudyConfig& c, const std::string& k, const json& v) { c.alpha = as_double(k, v); }},
      {"alphas",
       [](StudyConfig& c, const std::string& k, const json& v) {
         if (!v.is_array()) throw ConfigError("'" + k + "' expects an array of numbers");
         c.alphas.clear();
         for (const auto& e : v) c.alphas.push_back(as_double(k, e));
       }},
      {"series_depth", [](StudyConfig& c, const std::string& k, const json& v) { c.series_depth = as_int(k, v); }},
      {"amplitude", [](StudyConfig& c, const std::string& k, const json& v) { c.amplitude = as_double(k, v); }},
      {"level_min", [](StudyConfig& c, const std::string& k, const json& v) { c.level_min = as_int(k, v); }},
      {"level_max", [](StudyConfig& c, const std::string& k, const json& v) { c.level_max = as_int(k, v); }},
      {"reference_level",
       [](StudyConfig& c, const std::string& k, const json& v) { c.reference_level = as_int(k, v); }},
      {"grid_exponents",
       [](StudyConfig& c, const std::string& k, const json& v) {
         if (!v.is_array()) throw ConfigError("'" + k + "' expects an array of integers");
         c.grid_exponents.clear();
         for (const auto& e : v) c.grid_exponents.push_back(as_int(k, e));
       }},
      {"samples", [](StudyConfig& c, const std::string& k, const json& v) { c.samples = as_int(k, v); }},
      {"families", [](StudyConfig& c, const std::string& k, const json& v) { c.families = as_int(k, v); }},
      {"dyson_order", [](StudyConfig& c, const std::string& k, const json& v) { c.dyson_order = as_int(k, v); }},
      {"quadrature_nodes",
       [](StudyConfig& c, const std::string& k, const json& v) { c.quadrature_nodes = as_int(k, v); }},
      {"quadrature_rule",
       [](StudyConfig& c, const std::string& k, const json& v) { c.quadrature_rule = as_string(k, v); }},
      {"residual_tolerance",
       [](StudyConfig& c, const std::string& k, const json& v) { c.residual_tolerance = as_double(k, v); }},
      {"ratio_slack", [](StudyConfig& c, const std::string& k, const json& v) { c.ratio_slack = as_double(k, v); }},
      {"seed",
       [](StudyConfig& c, const std::string& k, const json& v) {
         if (!v.is_number_unsigned()) throw ConfigError("'" + k + "' expects a non-negative integer");
         c.seed = v.get<std::uint64_t>();
       }},
      {"output", [](StudyConfig& c, const std::string& k, const json& v) { c.output = as_string(k, v); }},
  };
  return table;
}

/// Override values are JSON when they parse as JSON, plain strings otherwise.
json parse_value(const std::string& text) {
  json v = json::parse(text, nullptr, false);
  if (v.is_discarded()) return json(text);
  return v;
}

std::vector<StudyKind> selected(const std::string& subcommand) {
  if (subcommand == "all") return kAllStudies;
  if (auto k = parse_study_kind(subcommand)) return {*k};
  throw ConfigError("unknown subcommand '" + subcommand + "'");
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

namespace {

// Unknown keys are rejected even in sections that are not run.
void require_known(const std::string& key) {
  if (!setters().contains(key)) throw ConfigError("unknown configuration key '" + key + "'");
}

}  // namespace

void apply_key(StudyConfig& cfg, const std::string& key, const json& value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError("unknown configuration key '" + key + "'");
  it->second(cfg, key, value);
}

std::vector<StudyConfig> resolve_configs(const std::string& subcommand, const json& document,
                                         const std::vector<std::string>& overrides) {
  const auto studies = selected(subcommand);
  if (!document.is_object()) throw ConfigError("configuration must be a JSON object");
  for (const auto& [section, body] : document.items()) {
    if (!parse_study_kind(section)) throw ConfigError("unknown configuration section '" + section + "'");
    if (!body.is_object()) throw ConfigError("section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) require_known(key);
  }

  std::vector<std::pair<std::string, std::string>> parsed;
  for (const auto& o : overrides) {
    const auto eq = o.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("override '" + o + "' is not of the form key=value");
    std::string key = o.substr(0, eq);
    if (const auto dot = key.find('.'); dot != std::string::npos) {
      if (!parse_study_kind(key.substr(0, dot))) throw ConfigError("unknown study in override '" + key + "'");
      require_known(key.substr(dot + 1));
    } else {
      require_known(key);
    }
    parsed.emplace_back(std::move(key), o.substr(eq + 1));
  }

  std::vector<StudyConfig> out;
  for (StudyKind kind : studies) {
    StudyConfig cfg = default_config(kind);
    const std::string name = to_string(kind);
    if (document.contains(name)) {
      for (const auto& [key, value] : document.at(name).items()) apply_key(cfg, key, value);
    }
    for (const auto& [key, value] : parsed) {
      const auto dot = key.find('.');
      if (dot == std::string::npos) {
        apply_key(cfg, key, parse_value(value));
        continue;
      }
      if (key.substr(0, dot) == name) apply_key(cfg, key.substr(dot + 1), parse_value(value));
    }
    try {
      validate(cfg);
    } catch (const ConstructionError& e) {
      throw ConfigError(name + ": " + e.what());
    }
    out.push_back(std::move(cfg));
  }
  return out;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Frozen-coefficient propagators for non-autonomous linear evolution equations", "evopagator"};
  std::string config_path;
  std::string output_dir = "evopagator-out";
  bool no_timestamp = false;
  std::vector<std::string> overrides;
  app.add_option("--config", config_path, "JSON configuration with one section per study")->check(CLI::ExistingFile);
  app.add_option("--output-dir", output_dir, "Directory for CSV and summary output");
  app.add_flag("--no-timestamp", no_timestamp, "Omit the timestamp from summary.json");
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> commands{
      {"invariants", "Cocycle, inverse, quasi-contraction and graph-norm bound checks"},
      {"converge", "Product-formula convergence against an oracle"},
      {"dyson", "Dyson series against the product formula and exact solutions"},
      {"regularity", "Convergence order sweep over Hoelder-modulated families"},
      {"escape", "Derivative indicators for the kink and Weierstrass potentials"},
      {"closed-form", "Product formula and Dyson series against e^{A0 t} e^{B t}"},
      {"all", "Run every study"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->fallthrough();
    sub->add_option("overrides", overrides, "key=value or study.key=value overrides");
  }

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kConfigError;
  }
  const std::string subcommand = app.get_subcommands().front()->get_name();

  std::vector<StudyConfig> configs;
  try {
    json document = json::object();
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      document = json::parse(in, nullptr, false);
      if (document.is_discarded()) throw ConfigError("cannot parse " + config_path + " as JSON");
    }
    configs = resolve_configs(subcommand, document, overrides);
  } catch (const ConfigError& e) {
    err << "configuration error: " << e.what() << '\n';
    return kConfigError;
  }

  std::error_code ec;
  fs::create_directories(output_dir, ec);
  if (ec) {
    err << "configuration error: cannot create output directory " << output_dir << ": " << ec.message() << '\n';
    return kConfigError;
  }

  json summary = json::object();
  if (!no_timestamp) summary["generated_at"] = timestamp();
  bool violated = false;
  bool failed = false;
  for (const auto& cfg : configs) {
    const std::string name = to_string(cfg.study);
    const fs::path csv_path = fs::path(output_dir) / (cfg.output.empty() ? name + ".csv" : cfg.output);
    StudyResult result;
    try {
      result = run_study(cfg);
    } catch (const std::exception& e) {
      err << name << ": study aborted: " << e.what() << '\n';
      summary["studies"][name] = {{"aborted", e.what()}};
      failed = true;
      continue;
    }
    {
      std::ofstream csv(csv_path, std::ios::binary);
      write_csv(csv, result.records);
      if (!csv) {
        err << name << ": cannot write " << csv_path.string() << '\n';
        failed = true;
      }
    }
    summary["studies"][name] = result.summary;
    out << name << ": " << result.records.size() << " records, " << result.violations.size() << " violations -> "
        << csv_path.string() << '\n';
    for (std::size_t i : result.violations) {
      const auto& r = result.records[i];
      // Row numbers count the header as row 1.
      err << "invariant violation: " << csv_path.string() << ':' << i + 2 << " metric=" << r.metric
          << " level=" << r.level << " value=" << format_double(r.value) << " (" << r.provenance << ")\n";
    }
    violated = violated || !result.passed();
  }

  const fs::path summary_path = fs::path(output_dir) / "summary.json";
  std::ofstream js(summary_path, std::ios::binary);
  js << summary.dump(2) << '\n';
  if (!js) {
    err << "cannot write " << summary_path.string() << '\n';
    return kViolation;
  }
  return violated || failed ? kViolation : kOk;
}

}  // namespace evo::cli
