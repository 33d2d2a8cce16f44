#include "tdram/montecarlo.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "tdram/text.hpp"

namespace tdram {

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(std::mt19937_64& rng) {
  // 53-bit mantissa draw in (0, 1]; avoids the zero that would break log().
  return (static_cast<double>(rng() >> 11) + 1.0) * 0x1p-53;
}

// Standard normal via Box-Muller, truncated to |z| <= 3 by rejection.
// Hand-rolled so the draw sequence is identical on every platform.
double truncated_normal(std::mt19937_64& rng) {
  for (;;) {
    const double u1 = uniform01(rng);
    const double u2 = uniform01(rng);
    const double z = std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    if (std::abs(z) <= 3.0) return z;
  }
}

const char* kTritSuffix[3] = {"_trit0", "_trit1", "_trit2"};

}  // namespace

const char* parameter_name(VariedParameter p) {
  switch (p) {
    case VariedParameter::Temperature: return "temperature";
    case VariedParameter::SupplyVoltage: return "supply_voltage";
    case VariedParameter::ChannelLength: return "channel_length";
    case VariedParameter::OxideThickness: return "oxide_thickness";
  }
  return "?";
}

std::vector<VariationSpec> default_variation_specs(const CellParams& p) {
  return {
      {VariedParameter::Temperature, p.temperature_c, 15.0},
      {VariedParameter::SupplyVoltage, p.vdd, 0.1 * p.vdd},
      {VariedParameter::ChannelLength, p.channel_length_nm, 0.1 * p.channel_length_nm},
      {VariedParameter::OxideThickness, p.oxide_thickness_nm, 0.1 * p.oxide_thickness_nm},
  };
}

std::vector<TrialParams> sample_trials(const CellParams& nominal,
                                       const std::vector<VariationSpec>& specs, int n,
                                       std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("trial count must be at least 1");
  for (const auto& s : specs)
    if (s.three_sigma < 0.0) throw std::invalid_argument("three_sigma must be non-negative");

  std::vector<TrialParams> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    std::mt19937_64 rng(splitmix64(seed ^ (0x9e3779b97f4a7c15ULL * (static_cast<std::uint64_t>(i) + 1))));
    TrialParams t{nominal.temperature_c, nominal.vdd, nominal.channel_length_nm,
                  nominal.oxide_thickness_nm};
    // Draw order is fixed by the spec list so (seed, i) pins every value.
    for (const auto& s : specs) {
      const double value = s.nominal + truncated_normal(rng) * (s.three_sigma / 3.0);
      switch (s.parameter) {
        case VariedParameter::Temperature: t.temperature_c = value; break;
        case VariedParameter::SupplyVoltage: t.vdd = value; break;
        case VariedParameter::ChannelLength: t.channel_length_nm = value; break;
        case VariedParameter::OxideThickness: t.oxide_thickness_nm = value; break;
      }
    }
    out.push_back(t);
  }
  return out;
}

const std::vector<int>& mc_sequence() {
  static const std::vector<int> seq{2, 0, 1, 0, 2};
  return seq;
}

int mc_cycle_for_trit(int trit) {
  switch (trit) {
    case 0: return 1;  // 2 -> 0
    case 1: return 2;  // 0 -> 1
    case 2: return 4;  // 0 -> 2
    default: throw std::invalid_argument("trit must be 0, 1 or 2");
  }
}

SolverConfig mc_default_solver(const CellParams& p) {
  SolverConfig cfg;
  cfg.dt = 0.25e-12;
  cfg.t_stop = static_cast<double>(mc_sequence().size()) * p.cycle_time;
  return cfg;
}

std::map<std::string, double> flatten_metrics(const std::array<CycleMeasurements, 3>& per_trit) {
  std::map<std::string, double> m;
  double current_sum = 0.0;
  for (int trit = 0; trit < 3; ++trit) {
    const auto& c = per_trit[static_cast<std::size_t>(trit)];
    m[std::string("write_time_s") + kTritSuffix[trit]] = c.write_time_s;
    m[std::string("read_sense_time_s") + kTritSuffix[trit]] = c.read_sense_time_s;
    m[std::string("avg_current_a") + kTritSuffix[trit]] = c.avg_current_a;
    m[std::string("avg_power_w") + kTritSuffix[trit]] = c.avg_power_w;
    current_sum += c.avg_current_a;
  }
  m["avg_current_a_mean"] = current_sum / 3.0;
  return m;
}

namespace {

CellParams apply_trial(const CellParams& nominal, const TrialParams& t) {
  CellParams p = nominal;
  p.temperature_c = t.temperature_c;
  p.vdd = t.vdd;
  p.channel_length_nm = t.channel_length_nm;
  p.oxide_thickness_nm = t.oxide_thickness_nm;
  return p;
}

std::array<CycleMeasurements, 3> measure_deck(const CellParams& p, const SolverConfig& cfg) {
  const DramCell cell = build_dram_cell(p, mc_sequence());
  const WaveformSet wf = transient(cell.circuit, cfg);
  std::array<CycleMeasurements, 3> out{};
  for (int trit = 0; trit < 3; ++trit) {
    CycleMeasurements m = measure_cycle(wf, cell, mc_cycle_for_trit(trit));
    m.written_trit = trit;
    out[static_cast<std::size_t>(trit)] = m;
  }
  return out;
}

}  // namespace

McReport run_mc(const CellParams& nominal, const std::vector<VariationSpec>& specs, int n,
                std::uint64_t seed, int threads, const SolverConfig* solver) {
  McReport report;
  report.seed = seed;
  report.requested = n;
  report.specs = specs;

  const SolverConfig cfg = solver ? *solver : mc_default_solver(nominal);

  report.nominal_metrics = flatten_metrics(measure_deck(nominal, cfg));

  const auto params = sample_trials(nominal, specs, n, seed);
  report.trials.resize(static_cast<std::size_t>(n));

  int n_threads = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  n_threads = std::max(1, std::min(n_threads, n));

  std::atomic<int> next{0};
  auto worker = [&]() {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) break;
      TrialResult& r = report.trials[static_cast<std::size_t>(i)];
      r.index = i;
      r.params = params[static_cast<std::size_t>(i)];
      try {
        r.per_trit = measure_deck(apply_trial(nominal, r.params), cfg);
      } catch (const std::exception& ex) {
        r.failed = true;
        r.error = ex.what();
      }
    }
  };

  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(n_threads));
    for (int i = 0; i < n_threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (const auto& r : report.trials)
    if (r.failed) ++report.failed_count;

  // Summaries in trial-index order so the reduction is deterministic.
  for (const auto& [key, nominal_value] : report.nominal_metrics) {
    MetricSummary s;
    double sum = 0.0;
    int count = 0;
    for (const auto& r : report.trials) {
      if (r.failed) continue;
      const double v = flatten_metrics(r.per_trit).at(key);
      if (count == 0) {
        s.min = s.max = v;
      } else {
        s.min = std::min(s.min, v);
        s.max = std::max(s.max, v);
      }
      sum += v;
      s.worst_case_deviation = std::max(s.worst_case_deviation, std::abs(v - nominal_value));
      ++count;
    }
    if (count > 0) {
      s.mean = sum / count;
      double sq = 0.0;
      for (const auto& r : report.trials) {
        if (r.failed) continue;
        const double d = flatten_metrics(r.per_trit).at(key) - s.mean;
        sq += d * d;
      }
      s.stddev = count > 1 ? std::sqrt(sq / (count - 1)) : 0.0;
    }
    report.summary[key] = s;
  }
  return report;
}

std::map<std::string, std::vector<VariedParameter>> sensitivity_rank(
    const std::vector<std::pair<VariedParameter, McReport>>& reports) {
  std::map<std::string, std::vector<VariedParameter>> out;
  if (reports.empty()) return out;
  for (const auto& [key, unused] : reports.front().second.summary) {
    (void)unused;
    std::vector<std::pair<double, std::size_t>> spread;
    for (std::size_t i = 0; i < reports.size(); ++i) {
      auto it = reports[i].second.summary.find(key);
      spread.emplace_back(it != reports[i].second.summary.end() ? it->second.stddev : 0.0, i);
    }
    std::stable_sort(spread.begin(), spread.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    std::vector<VariedParameter> order;
    for (const auto& [sd, idx] : spread) {
      (void)sd;
      order.push_back(reports[idx].first);
    }
    out[key] = std::move(order);
  }
  return out;
}

std::string to_json(const McReport& report) {
  nlohmann::ordered_json j;
  j["seed"] = report.seed;
  j["trials_requested"] = report.requested;
  j["failed_trials"] = report.failed_count;

  j["specs"] = nlohmann::ordered_json::array();
  for (const auto& s : report.specs)
    j["specs"].push_back({{"parameter", parameter_name(s.parameter)},
                          {"nominal", s.nominal},
                          {"three_sigma", s.three_sigma}});

  j["nominal"] = report.nominal_metrics;

  j["trials"] = nlohmann::ordered_json::array();
  for (const auto& r : report.trials) {
    nlohmann::ordered_json t;
    t["index"] = r.index;
    t["params"] = {{"temperature_c", r.params.temperature_c},
                   {"vdd_v", r.params.vdd},
                   {"channel_length_nm", r.params.channel_length_nm},
                   {"oxide_thickness_nm", r.params.oxide_thickness_nm}};
    if (r.failed) {
      t["failed"] = true;
      t["error"] = r.error;
    } else {
      t["metrics"] = flatten_metrics(r.per_trit);
    }
    j["trials"].push_back(std::move(t));
  }

  j["summary"] = nlohmann::ordered_json::object();
  for (const auto& [key, s] : report.summary)
    j["summary"][key] = {{"mean", s.mean},
                         {"stddev", s.stddev},
                         {"min", s.min},
                         {"max", s.max},
                         {"worst_case_deviation", s.worst_case_deviation}};
  return j.dump(2) + "\n";
}

std::string trials_csv(const McReport& report) {
  std::ostringstream os;
  os << "trial,temperature_c,vdd_v,channel_length_nm,oxide_thickness_nm";
  std::vector<std::string> keys;
  for (const auto& [key, v] : report.nominal_metrics) {
    (void)v;
    keys.push_back(key);
    os << ',' << key;
  }
  os << ",status\n";
  for (const auto& r : report.trials) {
    os << r.index << ',' << format_double(r.params.temperature_c) << ','
       << format_double(r.params.vdd) << ',' << format_double(r.params.channel_length_nm) << ','
       << format_double(r.params.oxide_thickness_nm);
    if (r.failed) {
      for (std::size_t i = 0; i < keys.size(); ++i) os << ',';
      os << ",failed\n";
    } else {
      const auto metrics = flatten_metrics(r.per_trit);
      for (const auto& key : keys) os << ',' << format_double(metrics.at(key));
      os << ",ok\n";
    }
  }
  return os.str();
}

}  // namespace tdram
