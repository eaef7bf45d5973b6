// bsslca: command-line front end.
//
// Exit codes: 0 success, 1 I/O failure, 2 validation or domain error.

#include "bsslca/bundled.hpp"
#include "bsslca/calibration.hpp"
#include "bsslca/engine.hpp"
#include "bsslca/error.hpp"
#include "bsslca/inventory.hpp"
#include "bsslca/modeshift.hpp"
#include "bsslca/report.hpp"
#include "bsslca/sweeps.hpp"

#include "CLI11.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace bss;

namespace {

struct Globals {
  std::string allocation = "paper";
  std::string format = "csv";
  std::string out;
  std::string constants;
};

// A named input and its bytes; feeds both parsing and the manifest hash.
struct Input {
  std::string name;
  std::string text;
};

std::string read_file(const std::string& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Input bundled_input(std::string_view name)
{
  return {"bundled:" + std::string(name), std::string(bundled::text(name))};
}

Json parse_json(const Input& in)
{
  try {
    return Json::parse(in.text);
  } catch (const Json::parse_error& e) {
    throw ValidationError("/", "malformed JSON in '" + in.name + "': " + e.what());
  }
}

// System argument: a bundled system name or a scenario file path.
Input system_input(const std::string& arg, const fs::path& base = {})
{
  if (auto kind = parse_system_kind(arg)) return bundled_input(nominal_file_name(*kind));
  if (arg == "autonomous_alternate_split") return bundled_input("autonomous_alternate_split.json");
  const fs::path p = fs::path(arg).is_absolute() || base.empty() ? fs::path(arg) : base / arg;
  return {p.string(), read_file(p.string())};
}

AllocationMode allocation(const Globals& g)
{
  auto m = parse_allocation_mode(g.allocation);
  if (!m) throw ValidationError("--allocation", "expected paper or strict");
  return *m;
}

Constants load_constants(const Globals& g, std::vector<Input>& inputs)
{
  std::string path = g.constants;
  if (path.empty()) {
    if (const char* env = std::getenv("BSSLCA_CONSTANTS")) path = env;
  }
  if (path.empty()) {
    if (!bundled::contains("constants.json")) {
      throw ValidationError("constants", "no calibrated constants available; run `bsslca calibrate --out FILE`");
    }
    inputs.push_back(bundled_input("constants.json"));
  } else {
    if (!fs::exists(path)) {
      throw ValidationError("constants", "constants file '" + path + "' not found; run `bsslca calibrate --out " +
                                             path + "` first");
    }
    inputs.push_back({path, read_file(path)});
  }
  return parse_constants(parse_json(inputs.back()));
}

RunManifest manifest(const std::string& command, const std::vector<Input>& inputs, const Globals& g,
                     std::string allocation_text)
{
  RunManifest m;
  m.command = command;
  std::vector<std::pair<std::string, std::string>> hashed;
  for (const auto& in : inputs) {
    m.inputs.push_back(in.name);
    hashed.emplace_back(in.name, in.text);
  }
  m.allocation = std::move(allocation_text);
  m.format = g.format;
  m.input_hash = hash_inputs(hashed);
  return m;
}

void write_text(const std::string& text, const std::string& out)
{
  if (out.empty() || out == "-") {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw IoError("cannot write to standard output");
    return;
  }
  std::ofstream f(out, std::ios::binary);
  if (!f) throw IoError("cannot write '" + out + "'");
  f << text;
  if (!f) throw IoError("cannot write '" + out + "'");
}

void emit(const Report& r, const Globals& g)
{
  if (g.format == "csv") write_text(to_csv(r), g.out);
  else if (g.format == "json") write_text(to_json_text(r), g.out);
  else throw ValidationError("--format", "expected csv or json");
}

std::vector<SystemDefinition> load_systems(const std::vector<Input>& inputs)
{
  std::vector<SystemDefinition> out;
  for (const auto& in : inputs) {
    try {
      out.push_back(load_system(parse_json(in)));
    } catch (const ValidationError& e) {
      throw ValidationError(in.name + ":" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
    }
  }
  return out;
}

std::vector<Input> system_inputs(const std::vector<std::string>& args)
{
  std::vector<Input> inputs;
  if (args.empty()) {
    for (auto k : {SystemKind::station_based, SystemKind::dockless, SystemKind::autonomous}) {
      inputs.push_back(bundled_input(nominal_file_name(k)));
    }
  }
  for (const auto& a : args) inputs.push_back(system_input(a));
  return inputs;
}

int cmd_evaluate(const Globals& g, const std::vector<std::string>& files)
{
  const auto mode = allocation(g);
  const auto inputs = system_inputs(files);
  std::vector<NamedBreakdown> rows;
  for (const auto& s : load_systems(inputs)) rows.push_back({s.name, evaluate(s, mode)});
  emit({manifest("evaluate", inputs, g, std::string(to_string(mode))), evaluate_table(rows)}, g);
  return 0;
}

int cmd_compare(const Globals& g, const std::string& baseline, std::vector<std::string> others)
{
  const auto mode = allocation(g);
  if (others.empty()) others = {"station_based", "dockless"};
  std::vector<Input> inputs{system_input(baseline)};
  for (const auto& o : others) inputs.push_back(system_input(o));
  const auto systems = load_systems(inputs);
  const double base_total = evaluate(systems[0], mode).total;
  std::vector<ComparisonReport> reports;
  std::vector<double> base_totals, other_totals;
  for (std::size_t i = 1; i < systems.size(); ++i) {
    const double other_total = evaluate(systems[i], mode).total;
    reports.push_back(compare_totals(systems[0].name, base_total, systems[i].name, other_total));
    base_totals.push_back(base_total);
    other_totals.push_back(other_total);
  }
  emit({manifest("compare", inputs, g, std::string(to_string(mode))),
        comparison_table(reports, base_totals, other_totals)},
       g);
  return 0;
}

int cmd_sweep(const Globals& g, const std::string& spec_arg)
{
  const auto mode = allocation(g);
  std::vector<Input> inputs;
  fs::path base;
  if (fs::exists(spec_arg)) {
    inputs.push_back({spec_arg, read_file(spec_arg)});
    base = fs::path(spec_arg).parent_path();
  } else if (bundled::contains("sweeps/" + spec_arg + ".json")) {
    inputs.push_back(bundled_input("sweeps/" + spec_arg + ".json"));
  } else {
    throw IoError("cannot read sweep spec '" + spec_arg + "'");
  }
  const auto spec = parse_sweep_spec(parse_json(inputs[0]));

  std::vector<Input> system_files;
  for (const auto& s : spec.systems) system_files.push_back(system_input(s, base));
  const auto systems = load_systems(system_files);
  inputs.insert(inputs.end(), system_files.begin(), system_files.end());

  std::optional<Constants> constants;
  const bool needs_constants =
      spec.alternate_autonomy_split ||
      (spec.parameter == "autonomy" &&
       std::any_of(spec.scenarios.begin(), spec.scenarios.end(),
                   [](const std::string& v) { return v.rfind("battery_", 0) == 0; }));
  if (needs_constants) constants = load_constants(g, inputs);

  const auto result = run_sweep(spec, systems, constants, mode);
  emit({manifest("sweep", inputs, g, std::string(to_string(mode))), sweep_table(result)}, g);
  return 0;
}

int cmd_breakeven(const Globals& g, bool allocation_given, const std::string& moving_arg,
                  std::vector<std::string> targets, std::optional<double> target_total)
{
  // Break-even defaults to passenger-km on both sides.
  const auto mode = allocation_given ? allocation(g) : AllocationMode::strict_pkm;
  std::vector<Input> inputs{system_input(moving_arg)};
  if (!target_total && targets.empty()) targets = {"station_based", "dockless"};
  for (const auto& t : targets) inputs.push_back(system_input(t));
  const auto systems = load_systems(inputs);
  const auto& moving = systems[0];

  std::vector<BreakevenRow> rows;
  const double floor = utilization_floor(moving, mode);
  if (target_total) {
    rows.push_back({moving.name, "value", *target_total, breakeven_utilization(moving, *target_total, mode), floor});
  }
  for (std::size_t i = 1; i < systems.size(); ++i) {
    const double t = evaluate(systems[i], mode).total;
    rows.push_back({moving.name, systems[i].name, t, breakeven_utilization(moving, t, mode), floor});
  }
  emit({manifest("breakeven", inputs, g, std::string(to_string(mode))), breakeven_table(rows)}, g);
  return 0;
}

int cmd_modeshift(const Globals& g, const std::string& profiles_path, const std::string& scenario_arg,
                  const std::string& share_sum_check)
{
  const auto mode = allocation(g);
  std::vector<Input> inputs;
  if (profiles_path.empty()) inputs.push_back(bundled_input("modeshift_profiles.csv"));
  else inputs.push_back({profiles_path, read_file(profiles_path)});
  // The bundled table reproduces published rows verbatim, some of which do
  // not sum to 100 %.
  auto check = profiles_path.empty() ? ShareSumCheck::warn : ShareSumCheck::reject;
  if (!share_sum_check.empty()) check = *parse_share_sum_check(share_sum_check);
  const auto rows = parse_profiles_csv(inputs[0].text, check);
  for (const auto& r : rows) {
    if (!r.share_sum_out_of_band) continue;
    double sum = 0.0;
    for (double s : r.profile.shares) sum += s;
    std::cerr << "bsslca: warning: profile '" << r.profile.label << "' shares sum to " << format_fixed4(sum)
              << ", outside [0.95, 1.05]\n";
  }

  const auto constants = load_constants(g, inputs);
  std::vector<DisplacedModeFactors> sets;
  std::vector<Scenario> scenarios;
  for (const auto& f : constants.factor_sets) {
    if (!scenario_arg.empty()) {
      auto sc = parse_scenario(scenario_arg);
      if (!sc) throw ValidationError("--scenario", "expected S1 or S2");
      if (f.scenario != *sc) continue;
    }
    sets.push_back(f);
    scenarios.push_back(f.scenario);
  }

  const auto system_files = system_inputs({});
  inputs.insert(inputs.end(), system_files.begin(), system_files.end());
  std::vector<SystemTotal> totals;
  std::vector<SystemKind> kinds;
  for (const auto& s : load_systems(system_files)) {
    totals.push_back({s.kind, evaluate(s, mode).total});
    kinds.push_back(s.kind);
  }
  const auto report = modeshift_table(totals, rows, sets);
  emit({manifest("modeshift", inputs, g, std::string(to_string(mode))), modeshift_report_table(report, kinds, scenarios)},
       g);
  return 0;
}

int cmd_calibrate(const Globals& g, const std::string& anchors_path, bool force, const std::string& emit_dir)
{
  std::vector<Input> inputs;
  AnchorSet anchors;
  if (anchors_path.empty()) {
    inputs.push_back(bundled_input("anchors.json"));
    anchors = parse_anchors(parse_json(inputs[0]), [&](const std::string& ref, ShareSumCheck check) {
      inputs.push_back(bundled_input(ref));
      return parse_profiles_csv(inputs.back().text, check);
    });
  } else {
    inputs.push_back({anchors_path, read_file(anchors_path)});
    const fs::path base = fs::path(anchors_path).parent_path();
    anchors = parse_anchors(parse_json(inputs[0]), [&](const std::string& ref, ShareSumCheck check) {
      const auto p = (base / ref).string();
      inputs.push_back({p, read_file(p)});
      return parse_profiles_csv(inputs.back().text, check);
    });
  }

  const auto bundle = calibrate_all(anchors);
  Json doc = constants_to_json(bundle);
  doc["manifest"] = to_json(manifest("calibrate", inputs, g, "paper"));

  if (!g.out.empty() && g.out != "-" && fs::exists(g.out) && !force) {
    throw ValidationError("--out", "'" + g.out + "' exists; pass --force to overwrite");
  }
  write_text(doc.dump(2) + "\n", g.out);

  if (!emit_dir.empty()) {
    fs::create_directories(emit_dir);
    for (const auto& s : bundle.systems) {
      const auto p = (fs::path(emit_dir) / (s.name + "_nominal.json")).string();
      if (fs::exists(p) && !force) throw ValidationError("--emit-scenarios", "'" + p + "' exists; pass --force");
      write_text(to_json(s).dump(2) + "\n", p);
      if (s.kind == SystemKind::autonomous && bundle.alternate_autonomy_split) {
        SystemDefinition alt = s;
        alt.name = s.name + "_alternate_split";
        alt.vehicle.autonomy = *bundle.alternate_autonomy_split;
        alt.comment = "Autonomy impact split so that a one-year lifetime reproduces the published +64.45 %. "
                      "Flagged configuration, not the nominal inventory.";
        const auto ap = (fs::path(emit_dir) / (alt.name + ".json")).string();
        if (fs::exists(ap) && !force) throw ValidationError("--emit-scenarios", "'" + ap + "' exists; pass --force");
        write_text(to_json(alt).dump(2) + "\n", ap);
      }
    }
  }

  for (const auto& e : bundle.errors) std::cerr << "bsslca: calibrate: " << e << "\n";
  for (const auto& r : bundle.results) {
    if (!r.conforming()) {
      std::cerr << "bsslca: calibrate: " << r.parameter << " non-conforming (residual " << r.residual
                << ", tolerance " << r.tolerance << ")\n";
    }
  }
  return bundle.errors.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{"Life-cycle emissions of bicycle-sharing systems per passenger-km"};
  app.set_version_flag("--version", BSSLCA_VERSION);
  app.require_subcommand(1);

  Globals g;
  app.add_option("--allocation", g.allocation, "Per-pkm allocation: paper or strict")
      ->check(CLI::IsMember({"paper", "strict"}));
  app.add_option("--format", g.format, "Report format")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--out", g.out, "Output path (default: standard output)");
  app.add_option("--constants", g.constants, "Calibrated constants file (default: $BSSLCA_CONSTANTS, then bundled)");
  app.fallthrough();

  std::vector<std::string> files;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Per-system emission breakdown");
  evaluate_cmd->add_option("scenarios", files, "Scenario files or bundled names (default: the three nominal systems)");

  std::string baseline = "autonomous";
  std::vector<std::string> others;
  auto* compare_cmd = app.add_subcommand("compare", "How much lower the baseline is than each other system");
  compare_cmd->add_option("baseline", baseline, "Baseline system");
  compare_cmd->add_option("others", others, "Systems to compare against");

  std::string spec;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a one-at-a-time parameter sweep");
  sweep_cmd->add_option("spec", spec, "Sweep spec file, or a bundled spec name (lifetime, utilization, ...)")
      ->required();

  std::string moving = "autonomous";
  std::vector<std::string> targets;
  double target_value = 0.0;
  auto* breakeven_cmd = app.add_subcommand("breakeven", "Utilization at which a system matches a target total");
  breakeven_cmd->add_option("--moving", moving, "System whose utilization varies");
  breakeven_cmd->add_option("--target", targets, "Systems whose nominal totals are the targets");
  auto* target_total_opt = breakeven_cmd->add_option("--target-total", target_value, "Explicit target, g/pkm");

  std::string profiles, scenario, share_sum_check;
  auto* modeshift_cmd = app.add_subcommand("modeshift", "Net impact against displaced-mode profiles");
  modeshift_cmd->add_option("--profiles", profiles, "Profiles CSV (default: bundled table)");
  modeshift_cmd->add_option("--scenario", scenario, "Only this electrification scenario")
      ->check(CLI::IsMember({"S1", "S2"}));
  modeshift_cmd->add_option("--share-sum-check", share_sum_check,
                            "Rows whose shares do not sum to 95-105 %: reject or warn (default: reject, warn for the "
                            "bundled table)")
      ->check(CLI::IsMember({"reject", "warn"}));

  std::string anchors, emit_dir;
  bool force = false;
  auto* calibrate_cmd = app.add_subcommand("calibrate", "Back-solve model constants from published anchors");
  calibrate_cmd->add_option("--anchors", anchors, "Anchors file (default: bundled)");
  calibrate_cmd->add_flag("--force", force, "Overwrite existing output files");
  calibrate_cmd->add_option("--emit-scenarios", emit_dir, "Also write calibrated scenario files to this directory");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*evaluate_cmd) return cmd_evaluate(g, files);
    if (*compare_cmd) return cmd_compare(g, baseline, others);
    if (*sweep_cmd) return cmd_sweep(g, spec);
    if (*breakeven_cmd) {
      const bool allocation_given = app.get_option("--allocation")->count() > 0;
      return cmd_breakeven(g, allocation_given, moving, targets,
                           target_total_opt->count() ? std::optional<double>(target_value) : std::nullopt);
    }
    if (*modeshift_cmd) return cmd_modeshift(g, profiles, scenario, share_sum_check);
    if (*calibrate_cmd) return cmd_calibrate(g, anchors, force, emit_dir);
  } catch (const IoError& e) {
    std::cerr << "bsslca: " << e.what() << "\n";
    return 1;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "bsslca: " << e.what() << "\n";
    return 1;
  } catch (const NoSolutionError& e) {
    std::cerr << "bsslca: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "bsslca: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
