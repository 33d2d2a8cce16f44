#include "tdram/engine.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>

namespace tdram {

WaveformSet::WaveformSet(std::vector<std::string> node_names,
                         std::vector<std::string> element_names)
    : node_names_(std::move(node_names)), element_names_(std::move(element_names)) {
  node_v_.resize(node_names_.size());
  branch_i_.resize(element_names_.size());
}

void WaveformSet::append(double t, const std::vector<double>& node_v,
                         const std::vector<double>& branch_i) {
  if (node_v.size() != node_names_.size() || branch_i.size() != element_names_.size())
    throw std::invalid_argument("waveform sample arity mismatch");
  if (!time_.empty() && t <= time_.back())
    throw std::invalid_argument("waveform time must be strictly increasing");
  for (double v : node_v)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite voltage sample");
  for (double i : branch_i)
    if (!std::isfinite(i)) throw std::invalid_argument("non-finite current sample");
  time_.push_back(t);
  for (std::size_t i = 0; i < node_v.size(); ++i) node_v_[i].push_back(node_v[i]);
  for (std::size_t i = 0; i < branch_i.size(); ++i) branch_i_[i].push_back(branch_i[i]);
}

bool WaveformSet::has_node(const std::string& name) const {
  return std::find(node_names_.begin(), node_names_.end(), name) != node_names_.end();
}

bool WaveformSet::has_branch(const std::string& name) const {
  return std::find(element_names_.begin(), element_names_.end(), name) != element_names_.end();
}

const std::vector<double>& WaveformSet::series_at(const std::vector<std::vector<double>>& store,
                                                  const std::vector<std::string>& names,
                                                  const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw std::out_of_range("no waveform series named \"" + name + "\"");
  return store[static_cast<std::size_t>(it - names.begin())];
}

const std::vector<double>& WaveformSet::node(const std::string& name) const {
  return series_at(node_v_, node_names_, name);
}

const std::vector<double>& WaveformSet::branch(const std::string& name) const {
  return series_at(branch_i_, element_names_, name);
}

double WaveformSet::interp(const std::vector<double>& series, double t) const {
  if (time_.empty()) throw std::out_of_range("empty waveform");
  if (t <= time_.front()) return series.front();
  if (t >= time_.back()) return series.back();
  auto it = std::upper_bound(time_.begin(), time_.end(), t);
  const std::size_t hi = static_cast<std::size_t>(it - time_.begin());
  const std::size_t lo = hi - 1;
  const double w = (t - time_[lo]) / (time_[hi] - time_[lo]);
  return series[lo] + w * (series[hi] - series[lo]);
}

double WaveformSet::node_at(const std::string& name, double t) const {
  return interp(node(name), t);
}

double WaveformSet::branch_at(const std::string& name, double t) const {
  return interp(branch(name), t);
}

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNewtonStepClamp = 0.25;  // volts per iteration per node

struct CompiledFet {
  int d, g, s;  // unknown indices, -1 for ground
  DeviceEval eval;
  std::size_t elem;
};

struct CompiledCap {
  int p, m;
  double c;
  std::size_t elem;
  double v_prev = 0.0;
  double i_prev = 0.0;
};

struct CompiledSrc {
  int p, m;
  const Stimulus* wf;
  int row;  // extra MNA unknown index
  std::size_t elem;
};

struct CompiledSw {
  int p, m;
  const Stimulus* ctrl;
  double threshold, g_on, g_off;
  std::size_t elem;
};

class Simulator {
 public:
  Simulator(const Circuit& c, const SolverConfig& cfg) : ckt_(c), cfg_(cfg) {
    auto diags = validate(c);
    if (!diags.empty())
      throw std::invalid_argument("circuit fails validation: " + diags.front().message);

    n_nodes_ = static_cast<int>(c.nodes.size()) - 1;  // ground excluded
    for (std::size_t ei = 0; ei < c.elements.size(); ++ei) {
      const Element& e = c.elements[ei];
      if (const auto* fet = std::get_if<CntfetElement>(&e)) {
        fets_.push_back({unknown(fet->drain), unknown(fet->gate), unknown(fet->source),
                         make_eval(fet->device, c.temperature_c), ei});
      } else if (const auto* cap = std::get_if<CapacitorElement>(&e)) {
        caps_.push_back({unknown(cap->n_plus), unknown(cap->n_minus), cap->farads, ei});
      } else if (const auto* src = std::get_if<VoltageSourceElement>(&e)) {
        const int row = n_nodes_ + static_cast<int>(srcs_.size());
        srcs_.push_back({unknown(src->n_plus), unknown(src->n_minus), &src->waveform, row, ei});
      } else if (const auto* sw = std::get_if<SwitchElement>(&e)) {
        const auto* ctrl = c.find_source(sw->ctrl_source);
        sws_.push_back({unknown(sw->n_plus), unknown(sw->n_minus), &ctrl->waveform,
                        sw->threshold, 1.0 / sw->on_resistance, 1.0 / sw->off_resistance, ei});
      }
    }
    n_ = n_nodes_ + static_cast<int>(srcs_.size());
  }

  VectorXd solve_dc(double at_time) {
    const auto states = switch_states(at_time);
    VectorXd x = VectorXd::Zero(n_);
    auto lin = linear_system(at_time, 0.0, /*transient=*/false, /*src_scale=*/1.0, states);
    if (auto sol = newton(lin, x)) return *sol;

    // Source stepping: ramp every source from zero to full value, warm
    // starting each stage from the previous solution.
    x.setZero();
    bool ok = true;
    for (int step = 1; step <= 10 && ok; ++step) {
      auto stage = linear_system(at_time, 0.0, false, step / 10.0, states);
      if (auto sol = newton(stage, x))
        x = *sol;
      else
        ok = false;
    }
    if (ok) return x;

    auto final_lin = linear_system(at_time, 0.0, false, 1.0, states);
    throw NonConvergence(cfg_.max_newton, worst_node(final_lin, x), at_time);
  }

  WaveformSet run_transient() {
    if (!(cfg_.dt > 0.0)) throw std::invalid_argument("dt must be positive");
    if (!(cfg_.t_stop > cfg_.dt)) throw std::invalid_argument("t_stop must exceed dt");
    if (!(cfg_.v_tol > 0.0) || !(cfg_.i_tol > 0.0))
      throw std::invalid_argument("tolerances must be positive");

    VectorXd x = solve_dc(0.0);
    sw_now_ = switch_states(0.0);
    for (auto& cap : caps_) {
      cap.v_prev = volt(x, cap.p) - volt(x, cap.m);
      cap.i_prev = 0.0;
    }

    std::vector<std::string> elem_names;
    elem_names.reserve(ckt_.elements.size());
    for (const auto& e : ckt_.elements) elem_names.push_back(element_name(e));
    WaveformSet wf(ckt_.nodes, elem_names);
    record(wf, 0.0, x);

    const long n_steps = static_cast<long>(std::floor(cfg_.t_stop / cfg_.dt + 1e-9));
    for (long k = 1; k <= n_steps; ++k) {
      const double t_from = (k - 1) * cfg_.dt;
      const double t_to = k * cfg_.dt;
      x = advance(x, t_from, t_to);
      record(wf, t_to, x);
    }
    return wf;
  }

 private:
  int unknown(const std::string& node) const {
    return ckt_.node_index(node) - 1;  // ground -> -1
  }

  static double volt(const VectorXd& x, int idx) { return idx < 0 ? 0.0 : x[idx]; }

  struct Linear {
    MatrixXd G;
    VectorXd b;
    double t;
    double h;        // 0 in DC mode
    bool transient;
  };

  bool switch_on(const CompiledSw& sw, double t) const {
    return sw.ctrl->value_at(t) >= sw.threshold;
  }

  std::vector<char> switch_states(double t) const {
    std::vector<char> s(sws_.size());
    for (std::size_t i = 0; i < sws_.size(); ++i) s[i] = switch_on(sws_[i], t);
    return s;
  }

  Linear linear_system(double t, double h, bool transient, double src_scale,
                       const std::vector<char>& sw_states, bool use_trap = false) const {
    Linear lin{MatrixXd::Zero(n_, n_), VectorXd::Zero(n_), t, h, transient};
    auto stamp_g = [&](int p, int m, double g) {
      if (p >= 0) lin.G(p, p) += g;
      if (m >= 0) lin.G(m, m) += g;
      if (p >= 0 && m >= 0) {
        lin.G(p, m) -= g;
        lin.G(m, p) -= g;
      }
    };

    for (int i = 0; i < n_nodes_; ++i) lin.G(i, i) += cfg_.g_min;

    for (std::size_t i = 0; i < sws_.size(); ++i)
      stamp_g(sws_[i].p, sws_[i].m, sw_states[i] ? sws_[i].g_on : sws_[i].g_off);

    if (transient) {
      for (const auto& cap : caps_) {
        const double g = (use_trap ? 2.0 : 1.0) * cap.c / h;
        const double hist = g * cap.v_prev + (use_trap ? cap.i_prev : 0.0);
        stamp_g(cap.p, cap.m, g);
        if (cap.p >= 0) lin.b[cap.p] += hist;
        if (cap.m >= 0) lin.b[cap.m] -= hist;
      }
    }

    for (const auto& src : srcs_) {
      if (src.p >= 0) {
        lin.G(src.p, src.row) += 1.0;
        lin.G(src.row, src.p) += 1.0;
      }
      if (src.m >= 0) {
        lin.G(src.m, src.row) -= 1.0;
        lin.G(src.row, src.m) -= 1.0;
      }
      lin.b[src.row] = src.wf->value_at(t) * src_scale;
    }
    return lin;
  }

  // Central-difference device linearization, 1 mV perturbation.
  void stamp_devices(const VectorXd& x, VectorXd& F, MatrixXd* J) const {
    constexpr double h = 1e-3;
    for (const auto& fet : fets_) {
      const double vd = volt(x, fet.d);
      const double vg = volt(x, fet.g);
      const double vs = volt(x, fet.s);
      auto current = [&](double dd, double dg, double ds) {
        return fet.eval.current((vg + dg) - (vs + ds), (vd + dd) - (vs + ds));
      };
      const double i = current(0, 0, 0);
      if (fet.d >= 0) F[fet.d] += i;
      if (fet.s >= 0) F[fet.s] -= i;
      if (!J) continue;
      const double gd = (current(h, 0, 0) - current(-h, 0, 0)) / (2.0 * h);
      const double gg = (current(0, h, 0) - current(0, -h, 0)) / (2.0 * h);
      const double gs = (current(0, 0, h) - current(0, 0, -h)) / (2.0 * h);
      auto stamp_row = [&](int row, double sign) {
        if (row < 0) return;
        if (fet.d >= 0) (*J)(row, fet.d) += sign * gd;
        if (fet.g >= 0) (*J)(row, fet.g) += sign * gg;
        if (fet.s >= 0) (*J)(row, fet.s) += sign * gs;
      };
      stamp_row(fet.d, +1.0);
      stamp_row(fet.s, -1.0);
    }
  }

  double node_residual_max(const VectorXd& F) const {
    double worst = 0.0;
    for (int i = 0; i < n_nodes_; ++i) worst = std::max(worst, std::abs(F[i]));
    return worst;
  }

  std::string worst_node(const Linear& lin, const VectorXd& x) const {
    VectorXd F = lin.G * x - lin.b;
    stamp_devices(x, F, nullptr);
    int worst = 0;
    for (int i = 1; i < n_nodes_; ++i)
      if (std::abs(F[i]) > std::abs(F[worst])) worst = i;
    return n_nodes_ > 0 ? ckt_.nodes[static_cast<std::size_t>(worst) + 1] : "0";
  }

  std::optional<VectorXd> newton(const Linear& lin, VectorXd x) const {
    double prev_dx = std::numeric_limits<double>::infinity();
    for (int it = 0; it < cfg_.max_newton; ++it) {
      MatrixXd J = lin.G;
      VectorXd F = lin.G * x - lin.b;
      stamp_devices(x, F, &J);
      if (it > 0 && prev_dx < cfg_.v_tol && node_residual_max(F) < cfg_.i_tol) return x;

      VectorXd dx = J.partialPivLu().solve(-F);
      if (!dx.allFinite()) return std::nullopt;
      double dx_max = 0.0;
      for (int i = 0; i < n_nodes_; ++i) {
        dx[i] = std::clamp(dx[i], -kNewtonStepClamp, kNewtonStepClamp);
        dx_max = std::max(dx_max, std::abs(dx[i]));
      }
      x += dx;
      prev_dx = dx_max;
    }
    return std::nullopt;
  }

  // Earliest switch state flip strictly inside (t, t + h], found by
  // bisection on the control predicate. Assumes at most one flip per
  // switch in the window (edges span hundreds of steps at sane dt).
  double flip_boundary(double t, double h) const {
    double earliest = t + h;
    for (const auto& sw : sws_) {
      const bool s0 = switch_on(sw, t);
      if (switch_on(sw, earliest) == s0) continue;
      double lo = t, hi = earliest;
      while (std::nextafter(lo, hi) < hi) {
        const double mid = 0.5 * (lo + hi);
        if (switch_on(sw, mid) == s0)
          lo = mid;
        else
          hi = mid;
      }
      earliest = hi;  // first instant carrying the new state
    }
    return earliest;
  }

  // One recorded step from t_from to t_to. Steps are split exactly at
  // switch transitions so the event timing is independent of dt, and are
  // halved locally on Newton failure (up to 8 times).
  VectorXd advance(VectorXd x, double t_from, double t_to) {
    double t = t_from;
    double h = t_to - t_from;
    int depth = 0;
    while (t < t_to - 1e-24) {
      double h_try = std::min(h, t_to - t);
      // Split only on flips meaningfully interior to the step; events within
      // 1e-16 s of a step edge stay merged.
      const double boundary = flip_boundary(t, h_try);
      if (boundary - t > 1e-16 && t + h_try - boundary > 1e-16) h_try = boundary - t;
      // state over (t, t+h_try): sample just inside the interval
      const auto states = switch_states(t + 0.5 * h_try);
      // Branch currents jump at a switch event, so the step that follows one
      // restarts the integrator with backward Euler instead of trusting the
      // pre-event trapezoidal history.
      const bool event = states != sw_now_;
      const bool use_trap =
          cfg_.method == SolverConfig::Method::Trapezoidal && !event;
      auto lin = linear_system(t + h_try, h_try, true, 1.0, states, use_trap);
      auto sol = newton(lin, x);
      if (!sol) {
        if (++depth > 8)
          throw NonConvergence(cfg_.max_newton, worst_node(lin, x), t + h_try);
        h = h_try / 2.0;
        continue;
      }
      x = *sol;
      sw_now_ = states;
      for (auto& cap : caps_) {
        const double g = (use_trap ? 2.0 : 1.0) * cap.c / h_try;
        const double v = volt(x, cap.p) - volt(x, cap.m);
        const double i = g * (v - cap.v_prev) - (use_trap ? cap.i_prev : 0.0);
        cap.v_prev = v;
        cap.i_prev = i;
      }
      t += h_try;
    }
    return x;
  }

  void record(WaveformSet& wf, double t, const VectorXd& x) const {
    std::vector<double> volts(ckt_.nodes.size(), 0.0);
    for (std::size_t ni = 1; ni < ckt_.nodes.size(); ++ni) volts[ni] = x[ni - 1];

    std::vector<double> currents(ckt_.elements.size(), 0.0);
    for (const auto& fet : fets_)
      currents[fet.elem] =
          fet.eval.current(volt(x, fet.g) - volt(x, fet.s), volt(x, fet.d) - volt(x, fet.s));
    for (const auto& cap : caps_) currents[cap.elem] = t == 0.0 ? 0.0 : cap.i_prev;
    for (const auto& src : srcs_) currents[src.elem] = x[src.row];
    for (std::size_t i = 0; i < sws_.size(); ++i) {
      const auto& sw = sws_[i];
      currents[sw.elem] = (sw_now_[i] ? sw.g_on : sw.g_off) * (volt(x, sw.p) - volt(x, sw.m));
    }
    wf.append(t, volts, currents);
  }

  const Circuit& ckt_;
  SolverConfig cfg_;
  int n_nodes_ = 0;
  int n_ = 0;
  std::vector<CompiledFet> fets_;
  std::vector<CompiledCap> caps_;
  std::vector<CompiledSrc> srcs_;
  std::vector<CompiledSw> sws_;
  std::vector<char> sw_now_;  // states used by the step in flight
};

}  // namespace

std::map<std::string, double> dc_operating_point(const Circuit& c, double at_time) {
  SolverConfig cfg;
  Simulator sim(c, cfg);
  const VectorXd x = sim.solve_dc(at_time);
  std::map<std::string, double> out;
  for (std::size_t i = 0; i < c.nodes.size(); ++i)
    out[c.nodes[i]] = i == 0 ? 0.0 : x[static_cast<int>(i) - 1];
  return out;
}

WaveformSet transient(const Circuit& c, const SolverConfig& cfg) {
  Simulator sim(c, cfg);
  return sim.run_transient();
}

}  // namespace tdram
