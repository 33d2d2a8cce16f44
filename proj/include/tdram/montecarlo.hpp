#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "tdram/builders.hpp"
#include "tdram/engine.hpp"
#include "tdram/measure.hpp"

namespace tdram {

enum class VariedParameter { Temperature, SupplyVoltage, ChannelLength, OxideThickness };

const char* parameter_name(VariedParameter p);

/// Gaussian variation of one parameter: mean = nominal, stddev =
/// three_sigma/3, samples rejected outside nominal +/- three_sigma.
struct VariationSpec {
  VariedParameter parameter;
  double nominal;
  double three_sigma;
};

/// The study defaults: temperature 25 C +/- 15 C absolute; supply, channel
/// length and oxide thickness +/- 10% of nominal.
std::vector<VariationSpec> default_variation_specs(const CellParams& p);

struct TrialParams {
  double temperature_c;
  double vdd;
  double channel_length_nm;
  double oxide_thickness_nm;
};

/// n independent parameter draws. Trial i is a pure function of (seed, i),
/// so trial order and execution order cannot change the result.
std::vector<TrialParams> sample_trials(const CellParams& nominal,
                                       const std::vector<VariationSpec>& specs, int n,
                                       std::uint64_t seed);

struct TrialResult {
  int index = 0;
  TrialParams params{};
  std::array<CycleMeasurements, 3> per_trit{};  // indexed by trit
  bool failed = false;
  std::string error;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
  double min = 0.0;
  double max = 0.0;
  double worst_case_deviation = 0.0;  // max |trial - nominal|
};

struct McReport {
  std::uint64_t seed = 0;
  int requested = 0;
  int failed_count = 0;
  std::vector<VariationSpec> specs;
  std::map<std::string, double> nominal_metrics;
  std::vector<TrialResult> trials;
  std::map<std::string, MetricSummary> summary;  // over non-failed trials
};

/// Flat metric map for one measured trial: write_time_s_trit{0,1,2},
/// read_sense_time_s_trit{0,1,2}, avg_current_a_trit{0,1,2},
/// avg_power_w_trit{0,1,2} and avg_current_a_mean.
std::map<std::string, double> flatten_metrics(const std::array<CycleMeasurements, 3>& per_trit);

/// Runs the variation study: per trial, rebuilds the cell deck with the
/// sampled parameters (temperature enters the device model, vdd rescales
/// the sources and precharge, channel length and oxide thickness scale the
/// effective transconductance), simulates the 2->0, 0->1 and 0->2 write
/// transitions plus the three reads, and aggregates. Failed trials are
/// recorded and excluded from summaries, never resampled.
/// threads = 0 picks the hardware concurrency. Results are bit-identical
/// for a given (seed, specs, n) regardless of thread count.
McReport run_mc(const CellParams& nominal, const std::vector<VariationSpec>& specs, int n,
                std::uint64_t seed, int threads = 0, const SolverConfig* solver = nullptr);

/// Per-metric ordering of parameters by trial spread (stddev), largest
/// first; ties keep declaration order.
std::map<std::string, std::vector<VariedParameter>> sensitivity_rank(
    const std::vector<std::pair<VariedParameter, McReport>>& reports);

/// Deck and measured-cycle layout used by every trial (and the nominal
/// reference run): writes 2, 0, 1, 0, 2 so cycles 1, 2 and 4 realize the
/// 2->0, 0->1 and 0->2 transitions.
const std::vector<int>& mc_sequence();
int mc_cycle_for_trit(int trit);

/// Solver settings used by the study when none are supplied.
SolverConfig mc_default_solver(const CellParams& p);

std::string to_json(const McReport& report);
std::string trials_csv(const McReport& report);

}  // namespace tdram
