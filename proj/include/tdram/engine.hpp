#pragma once

#include <cstdio>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "tdram/circuit.hpp"

namespace tdram {

struct SolverConfig {
  enum class Method { BackwardEuler, Trapezoidal };

  double dt = 0.1e-12;
  double t_stop = 0.0;
  Method method = Method::Trapezoidal;
  double v_tol = 1e-6;   // volts
  double i_tol = 1e-12;  // amps
  int max_newton = 50;
  double g_min = 1e-12;  // shunt to ground at every node
};

class NonConvergence : public std::runtime_error {
 public:
  NonConvergence(int iterations, std::string worst_node, double at_time)
      : std::runtime_error("newton failed to converge after " + std::to_string(iterations) +
                           " iterations (worst node \"" + worst_node + "\", " +
                           format_time(at_time) + ")"),
        iterations_(iterations),
        worst_node_(std::move(worst_node)),
        at_time_(at_time) {}

  int iterations() const { return iterations_; }
  const std::string& worst_node() const { return worst_node_; }
  double at_time() const { return at_time_; }

 private:
  static std::string format_time(double t) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "t=%.6g s", t);
    return buf;
  }

  int iterations_;
  std::string worst_node_;
  double at_time_;
};

/// Sampled node voltages and element branch currents over time. Branch sign
/// convention: positive current flows into an element's n_plus (or drain)
/// terminal.
class WaveformSet {
 public:
  WaveformSet() = default;
  WaveformSet(std::vector<std::string> node_names, std::vector<std::string> element_names);

  void append(double t, const std::vector<double>& node_v, const std::vector<double>& branch_i);

  std::size_t samples() const { return time_.size(); }
  const std::vector<double>& time() const { return time_; }
  const std::vector<std::string>& node_names() const { return node_names_; }
  const std::vector<std::string>& element_names() const { return element_names_; }

  bool has_node(const std::string& name) const;
  bool has_branch(const std::string& name) const;
  const std::vector<double>& node(const std::string& name) const;
  const std::vector<double>& branch(const std::string& name) const;

  /// Linear interpolation between samples; clamped at the ends.
  double node_at(const std::string& name, double t) const;
  double branch_at(const std::string& name, double t) const;

 private:
  const std::vector<double>& series_at(const std::vector<std::vector<double>>& store,
                                       const std::vector<std::string>& names,
                                       const std::string& name) const;
  double interp(const std::vector<double>& series, double t) const;

  std::vector<std::string> node_names_;
  std::vector<std::string> element_names_;
  std::vector<double> time_;
  std::vector<std::vector<double>> node_v_;   // [node][sample]
  std::vector<std::vector<double>> branch_i_; // [element][sample]
};

/// Solves the nonlinear nodal equations with all sources frozen at at_time.
/// Returns node name -> voltage (ground included at 0 V).
/// Falls back to source stepping when plain Newton fails; throws
/// NonConvergence when that fails too.
std::map<std::string, double> dc_operating_point(const Circuit& c, double at_time);

/// Fixed-step implicit transient from t = 0 to cfg.t_stop. The initial
/// condition is the DC operating point at t = 0. On a Newton failure the
/// step is halved locally, up to 8 times, before NonConvergence is thrown.
WaveformSet transient(const Circuit& c, const SolverConfig& cfg);

}  // namespace tdram
