// tdram: ternary 3T DRAM cell simulator command line.
//
// Subcommands: simulate, measure, mc, netlist-check.
// Exit codes: 0 success, 1 parse/usage error, 2 solver non-convergence,
// 3 I/O error. Diagnostics go to stderr; metrics are only printed on
// success paths.

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "tdram/builders.hpp"
#include "tdram/io.hpp"
#include "tdram/measure.hpp"
#include "tdram/montecarlo.hpp"
#include "tdram/parser.hpp"
#include "tdram/text.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 1;
constexpr int kExitSolver = 2;
constexpr int kExitIo = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

double eng(const std::string& text, const std::string& flag) {
  double v = 0.0;
  std::string err;
  if (!tdram::parse_eng_number(text, &v, &err))
    throw UsageError(flag + ": " + err);
  return v;
}

std::vector<int> parse_sequence(const std::string& text) {
  std::vector<int> seq;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.size() != 1 || item[0] < '0' || item[0] > '2')
      throw UsageError("invalid trit '" + item + "' in --sequence (trits are 0, 1 or 2)");
    seq.push_back(item[0] - '0');
  }
  if (seq.empty()) throw UsageError("--sequence must list at least one trit");
  return seq;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  if (in.bad()) throw IoError("failed reading " + path);
  return os.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot create " + path);
  out << content;
  if (!out) throw IoError("failed writing " + path);
}

// Deck selection and cell parameter overrides shared by simulate/measure.
struct DeckOptions {
  std::string netlist_path;
  bool cell = false;
  std::string sequence = "0,1,2";
  std::string vdd, cycle, edge, cs, cbl, temp, kon, ioff, ss;
  int tubes = 0;

  void attach(CLI::App* cmd, bool allow_netlist = true) {
    if (allow_netlist) cmd->add_option("--netlist", netlist_path, "netlist file to simulate");
    cmd->add_flag("--cell", cell, "build the 3T ternary DRAM cell deck");
    cmd->add_option("--sequence", sequence, "trit sequence for --cell (default 0,1,2)");
    cmd->add_option("--vdd", vdd, "supply voltage override");
    cmd->add_option("--cycle", cycle, "cycle time override");
    cmd->add_option("--edge", edge, "stimulus edge time override");
    cmd->add_option("--cs", cs, "storage capacitance override");
    cmd->add_option("--cbl", cbl, "bit-line capacitance override");
    cmd->add_option("--temp", temp, "ambient temperature, C");
    cmd->add_option("--kon", kon, "per-tube transconductance scale override");
    cmd->add_option("--ioff", ioff, "per-tube off current override");
    cmd->add_option("--ss", ss, "subthreshold swing override, mV/dec");
    cmd->add_option("--tubes", tubes, "tubes per device");
  }

  tdram::CellParams params() const {
    tdram::CellParams p;
    if (!vdd.empty()) p.vdd = eng(vdd, "--vdd");
    if (!cycle.empty()) p.cycle_time = eng(cycle, "--cycle");
    if (!edge.empty()) p.edge_time = eng(edge, "--edge");
    if (!cs.empty()) p.c_s = eng(cs, "--cs");
    if (!cbl.empty()) p.c_bl = eng(cbl, "--cbl");
    if (!temp.empty()) p.temperature_c = eng(temp, "--temp");
    if (!kon.empty()) p.k_on = eng(kon, "--kon");
    if (!ioff.empty()) p.i_off = eng(ioff, "--ioff");
    if (!ss.empty()) p.ss_mv_per_dec = eng(ss, "--ss") * 1e3;  // flag takes mV
    if (tubes > 0) p.tubes = tubes;
    return p;
  }
};

tdram::SolverConfig solver_config(const std::string& dt, const std::string& tstop,
                                  const std::string& method, double default_tstop) {
  tdram::SolverConfig cfg;
  if (!dt.empty()) cfg.dt = eng(dt, "--dt");
  cfg.t_stop = tstop.empty() ? default_tstop : eng(tstop, "--tstop");
  if (method == "be")
    cfg.method = tdram::SolverConfig::Method::BackwardEuler;
  else if (method == "trap" || method.empty())
    cfg.method = tdram::SolverConfig::Method::Trapezoidal;
  else
    throw UsageError("--method must be trap or be");
  return cfg;
}

int run_simulate(const DeckOptions& deck, const std::string& dt, const std::string& tstop,
                 const std::string& method, const std::string& out_path) {
  tdram::Circuit circuit;
  double default_tstop = 0.0;
  if (deck.cell) {
    const auto p = deck.params();
    const auto cell = tdram::build_dram_cell(p, parse_sequence(deck.sequence));
    circuit = cell.circuit;
    default_tstop = static_cast<double>(cell.sequence.size()) * p.cycle_time;
  } else if (!deck.netlist_path.empty()) {
    circuit = tdram::parse_netlist(read_file(deck.netlist_path));
    default_tstop = 10e-9;
  } else {
    throw UsageError("give either --netlist <file> or --cell");
  }

  const auto cfg = solver_config(dt, tstop, method, default_tstop);
  const auto wf = tdram::transient(circuit, cfg);
  const std::string csv = tdram::waveform_to_csv(wf);
  if (out_path.empty())
    std::cout << csv;
  else
    write_file(out_path, csv);
  std::cerr << "simulated " << wf.samples() << " samples over "
            << tdram::format_double(cfg.t_stop) << " s\n";
  return kExitOk;
}

int run_measure(const DeckOptions& deck, const std::string& dt, const std::string& tstop,
                const std::string& method, bool with_sense, const std::string& variant_name,
                const std::string& json_path) {
  const auto p = deck.params();
  const auto sequence = parse_sequence(deck.sequence);
  const auto cell = with_sense ? tdram::build_cell_with_sense(p, sequence, true)
                               : tdram::build_dram_cell(p, sequence);

  tdram::SenseMetricVariant variant = tdram::SenseMetricVariant::Excursion;
  if (variant_name == "final-value")
    variant = tdram::SenseMetricVariant::FinalValue;
  else if (!variant_name.empty() && variant_name != "excursion")
    throw UsageError("--metric-variant must be excursion or final-value");

  const double deck_time = static_cast<double>(sequence.size()) * p.cycle_time;
  const auto cfg = solver_config(dt, tstop, method, deck_time);
  const auto wf = tdram::transient(cell.circuit, cfg);

  nlohmann::ordered_json j;
  std::ostringstream text;
  double current_sum = 0.0, power_sum = 0.0;
  const int cycles = static_cast<int>(sequence.size());

  for (int c = 0; c < cycles; ++c) {
    tdram::CycleMeasurements m;
    std::string read_error;
    m.written_trit = sequence[static_cast<std::size_t>(c)];
    m.write_time_s = tdram::write_delay(wf, cell, c);
    try {
      m.read_sense_time_s = tdram::read_sense_time(wf, cell, m.written_trit, c, variant);
    } catch (const tdram::ExcursionNeverReached& ex) {
      m.read_sense_time_s = std::numeric_limits<double>::quiet_NaN();
      read_error = ex.what();
    }
    m.avg_current_a = tdram::cycle_current(wf, cell, c);
    m.avg_power_w = tdram::cycle_power(wf, cell, c);
    current_sum += m.avg_current_a;
    power_sum += m.avg_power_w;

    const std::string key = "cycle" + std::to_string(c);
    text << key << ".written_trit = " << m.written_trit << '\n';
    text << key << ".write_time_s = " << tdram::format_double(m.write_time_s) << '\n';
    text << key << ".read_sense_time_s = " << tdram::format_double(m.read_sense_time_s) << '\n';
    text << key << ".avg_current_a = " << tdram::format_double(m.avg_current_a) << '\n';
    text << key << ".avg_power_w = " << tdram::format_double(m.avg_power_w) << '\n';
    text << key << ".stored_x_v = "
         << tdram::format_double(tdram::stored_voltage(wf, cell, c)) << '\n';

    nlohmann::ordered_json cj;
    cj["written_trit"] = m.written_trit;
    cj["write_time_s"] = m.write_time_s;
    cj["read_sense_time_s"] =
        read_error.empty() ? nlohmann::ordered_json(m.read_sense_time_s) : nlohmann::ordered_json();
    if (!read_error.empty()) cj["read_sense_error"] = read_error;
    cj["avg_current_a"] = m.avg_current_a;
    cj["avg_power_w"] = m.avg_power_w;
    cj["stored_x_v"] = tdram::stored_voltage(wf, cell, c);

    if (with_sense) {
      const double t_read = tdram::read_start_time(wf, cell, c);
      const double t_end = (c + 1) * p.cycle_time;
      try {
        const int sensed = tdram::classify_read(wf, "sout", t_read, t_end, p.vdd);
        text << key << ".sense_read_trit = " << sensed << '\n';
        cj["sense_read_trit"] = sensed;
      } catch (const tdram::AmbiguousRead& ex) {
        text << key << ".sense_read_trit = ambiguous\n";
        cj["sense_read_error"] = ex.what();
      }
      text << key << ".sense_time_" << m.written_trit << " = "
           << tdram::format_double(m.read_sense_time_s) << '\n';
    }
    j["cycles"].push_back(std::move(cj));
  }

  text << "deck.avg_current_a_mean = " << tdram::format_double(current_sum / cycles) << '\n';
  text << "deck.avg_power_w_mean = " << tdram::format_double(power_sum / cycles) << '\n';
  text << "deck.avg_power_w_vdd_x_current = "
       << tdram::format_double(p.vdd * current_sum / cycles) << '\n';
  j["deck"] = {{"avg_current_a_mean", current_sum / cycles},
               {"avg_power_w_mean", power_sum / cycles},
               {"avg_power_w_vdd_x_current", p.vdd * current_sum / cycles}};

  if (with_sense) {
    const char* branch = "msh";
    const auto& ib = wf.branch(branch);
    double avg = 0.0;
    for (std::size_t k = 1; k < wf.samples(); ++k)
      avg += 0.5 * (std::abs(ib[k - 1]) + std::abs(ib[k])) *
             (wf.time()[k] - wf.time()[k - 1]);
    avg /= wf.time().back() - wf.time().front();
    text << "sense.supply_current_a = " << tdram::format_double(avg) << '\n';
    text << "sense.supply_power_w = " << tdram::format_double(p.vdd * avg) << '\n';
    j["sense"] = {{"supply_current_a", avg}, {"supply_power_w", p.vdd * avg}};
  }

  std::cout << text.str();
  if (!json_path.empty()) write_file(json_path, j.dump(2) + "\n");
  return kExitOk;
}

std::uint64_t pick_seed(const std::string& seed_flag) {
  if (!seed_flag.empty()) return std::stoull(seed_flag);
  if (const char* env = std::getenv("TDRAM_SEED"); env && *env) return std::stoull(env);
  const auto seed = static_cast<std::uint64_t>(
      std::chrono::steady_clock::now().time_since_epoch().count());
  std::cerr << "no --seed given; using seed " << seed << '\n';
  return seed;
}

std::vector<tdram::VariationSpec> specs_from_names(const tdram::CellParams& p,
                                                   const std::string& vary,
                                                   double sigma_temp, double sigma_pct) {
  auto all = tdram::default_variation_specs(p);
  for (auto& s : all) {
    if (s.parameter == tdram::VariedParameter::Temperature)
      s.three_sigma = sigma_temp;
    else
      s.three_sigma = sigma_pct / 100.0 * s.nominal;
  }
  if (vary.empty() || vary == "all") return all;

  std::vector<tdram::VariationSpec> out;
  std::stringstream ss(vary);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item == "temp")
      out.push_back(all[0]);
    else if (item == "vdd")
      out.push_back(all[1]);
    else if (item == "l")
      out.push_back(all[2]);
    else if (item == "tox")
      out.push_back(all[3]);
    else
      throw UsageError("--vary accepts temp, vdd, l, tox (got '" + item + "')");
  }
  if (out.empty()) throw UsageError("--vary selected no parameters");
  return out;
}

void print_mc_summary(const tdram::McReport& report) {
  std::cout << "seed " << report.seed << ", trials " << report.requested << ", failed "
            << report.failed_count << '\n';
  std::cout << "metric                        mean          stddev        min           max\n";
  for (const auto& [key, s] : report.summary) {
    std::cout << key;
    for (std::size_t i = key.size(); i < 30; ++i) std::cout << ' ';
    std::cout << tdram::format_double(s.mean) << "  " << tdram::format_double(s.stddev) << "  "
              << tdram::format_double(s.min) << "  " << tdram::format_double(s.max) << '\n';
  }
  if (report.failed_count > 0) {
    std::cout << "failed trials:\n";
    for (const auto& t : report.trials)
      if (t.failed) std::cout << "  trial " << t.index << ": " << t.error << '\n';
  }
}

int run_mc(const DeckOptions& deck, int trials, const std::string& seed_flag,
           const std::string& vary, double sigma_temp, double sigma_pct, int threads,
           bool sensitivity, const std::string& out_json, const std::string& out_csv) {
  if (trials < 1) throw UsageError("--trials must be at least 1");
  const auto p = deck.params();
  const auto seed = pick_seed(seed_flag);

  if (sensitivity) {
    // One single-parameter sweep per knob, then rank by metric spread.
    const char* names[4] = {"temp", "vdd", "l", "tox"};
    const tdram::VariedParameter params[4] = {
        tdram::VariedParameter::Temperature, tdram::VariedParameter::SupplyVoltage,
        tdram::VariedParameter::ChannelLength, tdram::VariedParameter::OxideThickness};
    std::vector<std::pair<tdram::VariedParameter, tdram::McReport>> reports;
    for (int i = 0; i < 4; ++i) {
      auto specs = specs_from_names(p, names[i], sigma_temp, sigma_pct);
      reports.emplace_back(params[i], tdram::run_mc(p, specs, trials, seed, threads));
      std::cerr << "swept " << names[i] << '\n';
    }
    const auto ranking = tdram::sensitivity_rank(reports);
    nlohmann::ordered_json j;
    std::cout << "sensitivity ranking (largest spread first):\n";
    for (const auto& [metric, order] : ranking) {
      std::cout << "  " << metric << ":";
      nlohmann::ordered_json arr = nlohmann::ordered_json::array();
      for (auto param : order) {
        std::cout << ' ' << tdram::parameter_name(param);
        arr.push_back(tdram::parameter_name(param));
      }
      std::cout << '\n';
      j["ranking"][metric] = std::move(arr);
    }
    for (std::size_t i = 0; i < reports.size(); ++i)
      j["sweeps"][tdram::parameter_name(reports[i].first)] =
          nlohmann::ordered_json::parse(tdram::to_json(reports[i].second));
    if (!out_json.empty()) write_file(out_json, j.dump(2) + "\n");
    return kExitOk;
  }

  const auto specs = specs_from_names(p, vary, sigma_temp, sigma_pct);
  const auto report = tdram::run_mc(p, specs, trials, seed, threads);
  print_mc_summary(report);
  if (!out_json.empty()) write_file(out_json, tdram::to_json(report));
  if (!out_csv.empty()) write_file(out_csv, tdram::trials_csv(report));
  return kExitOk;
}

int run_netlist_check(const std::string& path) {
  const auto text = read_file(path);
  tdram::Circuit c;
  try {
    c = tdram::parse_netlist(text);
  } catch (const tdram::ParseError& ex) {
    std::cerr << path << ": " << ex.what() << '\n';
    return kExitParse;
  }
  const auto diags = tdram::validate(c);
  if (!diags.empty()) {
    for (const auto& d : diags) std::cerr << path << ": " << d.message << '\n';
    return kExitParse;
  }
  std::cout << "ok: " << c.nodes.size() << " nodes, " << c.elements.size() << " elements\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ternary 3T DRAM cell simulator"};
  app.require_subcommand(1);

  DeckOptions sim_deck, meas_deck, mc_deck;
  std::string dt, tstop, method, out_path, json_path, variant;
  bool with_sense = false;

  auto* sim = app.add_subcommand("simulate", "run a transient and emit a waveform CSV");
  sim_deck.attach(sim);
  sim->add_option("--dt", dt, "time step (default 0.1p)");
  sim->add_option("--tstop", tstop, "stop time (default: one cycle per trit)");
  sim->add_option("--method", method, "integration method: trap (default) or be");
  sim->add_option("--out", out_path, "output CSV path (default stdout)");

  auto* meas = app.add_subcommand("measure", "extract cell timing/current/power metrics");
  meas_deck.attach(meas, /*allow_netlist=*/false);
  meas->add_option("--dt", dt, "time step (default 0.1p)");
  meas->add_option("--tstop", tstop, "stop time override");
  meas->add_option("--method", method, "integration method: trap (default) or be");
  meas->add_flag("--with-sense", with_sense, "attach the ternary sense circuitry");
  meas->add_option("--metric-variant", variant, "read metric: excursion (default) or final-value");
  meas->add_option("--json", json_path, "also write the report as JSON");

  int trials = 0, threads = 0;
  std::string seed_flag, vary, out_json, out_csv;
  double sigma_temp = 15.0, sigma_pct = 10.0;
  bool sensitivity = false;

  auto* mc = app.add_subcommand("mc", "Monte Carlo process-variation study");
  mc_deck.attach(mc, /*allow_netlist=*/false);
  mc->add_option("--trials", trials, "number of trials")->required();
  mc->add_option("--seed", seed_flag, "RNG seed (fallback: TDRAM_SEED, then clock)");
  mc->add_option("--vary", vary, "parameters to vary: all (default) or csv of temp,vdd,l,tox");
  mc->add_option("--sigma-temp", sigma_temp, "temperature 3-sigma half-width, C (default 15)");
  mc->add_option("--sigma-pct", sigma_pct, "relative 3-sigma for vdd/l/tox, %% (default 10)");
  mc->add_option("--threads", threads, "worker threads (default: hardware)");
  mc->add_flag("--sensitivity", sensitivity, "run one sweep per parameter and rank spreads");
  mc->add_option("--out-json", out_json, "write the full report as JSON");
  mc->add_option("--out-csv", out_csv, "write one CSV row per trial");

  std::string check_path;
  auto* check = app.add_subcommand("netlist-check", "parse and validate a netlist");
  check->add_option("--netlist", check_path, "netlist file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitParse;
  }

  try {
    if (sim->parsed()) return run_simulate(sim_deck, dt, tstop, method, out_path);
    if (meas->parsed())
      return run_measure(meas_deck, dt, tstop, method, with_sense, variant, json_path);
    if (mc->parsed())
      return run_mc(mc_deck, trials, seed_flag, vary, sigma_temp, sigma_pct, threads, sensitivity,
                    out_json, out_csv);
    if (check->parsed()) return run_netlist_check(check_path);
  } catch (const UsageError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitParse;
  } catch (const tdram::ParseError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitParse;
  } catch (const tdram::NonConvergence& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitSolver;
  } catch (const IoError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitParse;
  } catch (const std::exception& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return kExitIo;
  }
  return kExitOk;
}
