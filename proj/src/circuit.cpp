#include "tdram/circuit.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "tdram/text.hpp"

namespace tdram {

const std::string& element_name(const Element& e) {
  return std::visit([](const auto& el) -> const std::string& { return el.name; }, e);
}

std::vector<std::string> element_nodes(const Element& e) {
  return std::visit(
      [](const auto& el) -> std::vector<std::string> {
        using T = std::decay_t<decltype(el)>;
        if constexpr (std::is_same_v<T, CntfetElement>)
          return {el.drain, el.gate, el.source};
        else
          return {el.n_plus, el.n_minus};
      },
      e);
}

int Circuit::ensure_node(const std::string& name) {
  const int idx = node_index(name);
  if (idx >= 0) return idx;
  nodes.push_back(name);
  return static_cast<int>(nodes.size()) - 1;
}

int Circuit::node_index(const std::string& name) const {
  for (std::size_t i = 0; i < nodes.size(); ++i)
    if (nodes[i] == name) return static_cast<int>(i);
  return -1;
}

void Circuit::add(Element e) {
  for (const auto& n : element_nodes(e)) ensure_node(n);
  elements.push_back(std::move(e));
}

const VoltageSourceElement* Circuit::find_source(const std::string& name) const {
  for (const auto& e : elements)
    if (const auto* v = std::get_if<VoltageSourceElement>(&e); v && v->name == name)
      return v;
  return nullptr;
}

int Circuit::count_cntfets() const {
  return static_cast<int>(std::count_if(elements.begin(), elements.end(), [](const Element& e) {
    return std::holds_alternative<CntfetElement>(e);
  }));
}

std::vector<Diagnostic> validate(const Circuit& c) {
  std::vector<Diagnostic> out;
  auto report = [&out](std::string msg, std::string subject) {
    out.push_back({std::move(msg), std::move(subject)});
  };

  if (c.nodes.empty() || c.nodes[0] != "0")
    report("ground node \"0\" must be present at index 0", "0");

  std::set<std::string> node_names;
  for (const auto& n : c.nodes)
    if (!node_names.insert(n).second) report("duplicate node name", n);

  std::set<std::string> elem_names;
  std::set<std::string> touched;
  bool has_source = false;

  for (const auto& e : c.elements) {
    const std::string& name = element_name(e);
    if (!elem_names.insert(name).second) report("duplicate element name", name);
    for (const auto& n : element_nodes(e)) {
      if (!node_names.count(n))
        report("element " + name + " references undeclared node \"" + n + "\"", n);
      touched.insert(n);
    }

    if (const auto* fet = std::get_if<CntfetElement>(&e)) {
      try {
        validate(fet->device);
      } catch (const std::invalid_argument& ex) {
        report(std::string("device ") + name + ": " + ex.what(), name);
      }
    } else if (const auto* cap = std::get_if<CapacitorElement>(&e)) {
      if (!(cap->farads > 0.0)) report("capacitor " + name + " must have positive value", name);
    } else if (const auto* sw = std::get_if<SwitchElement>(&e)) {
      if (!(sw->on_resistance > 0.0))
        report("switch " + name + " needs positive on resistance", name);
      if (!(sw->on_resistance < sw->off_resistance))
        report("switch " + name + " needs on_resistance < off_resistance", name);
      if (!c.find_source(sw->ctrl_source))
        report("switch " + name + " control source \"" + sw->ctrl_source + "\" not found",
               sw->ctrl_source);
    } else if (std::holds_alternative<VoltageSourceElement>(e)) {
      has_source = true;
    }
  }

  if (!has_source) report("circuit has no voltage source", c.title);

  for (const auto& n : c.nodes)
    if (n != "0" && !touched.count(n))
      report("node \"" + n + "\" is not connected to any element", n);

  return out;
}

namespace {

void serialize_stimulus(std::ostringstream& os, const Stimulus& s) {
  if (s.is_dc()) {
    os << "dc " << format_double(s.dc_value());
    return;
  }
  os << "pwl(";
  bool first = true;
  for (const auto& [t, v] : s.points()) {
    if (!first) os << ' ';
    first = false;
    os << format_double(t) << ' ' << format_double(v);
  }
  os << ')';
}

}  // namespace

std::string serialize(const Circuit& c) {
  std::ostringstream os;
  if (!c.title.empty()) os << ".title " << c.title << '\n';
  if (c.temperature_c != 25.0) os << ".temp " << format_double(c.temperature_c) << '\n';
  for (const auto& e : c.elements) {
    if (const auto* fet = std::get_if<CntfetElement>(&e)) {
      const auto& d = fet->device;
      os << fet->name << ' ' << fet->drain << ' ' << fet->gate << ' ' << fet->source << ' '
         << (d.polarity == Polarity::N ? 'n' : 'p') << " chirality=" << d.chirality.n << ','
         << d.chirality.m;
      if (d.tubes != 1) os << " tubes=" << d.tubes;
      if (d.vth_override) os << " vth=" << format_double(*d.vth_override);
      if (d.channel_length_nm != kReferenceChannelNm)
        os << " l=" << format_double(d.channel_length_nm);
      if (d.oxide_thickness_nm != kReferenceOxideNm)
        os << " tox=" << format_double(d.oxide_thickness_nm);
      if (d.k_on != 40e-6) os << " kon=" << format_double(d.k_on);
      if (d.i_off != 1e-12) os << " ioff=" << format_double(d.i_off);
      if (d.ss_mv_per_dec != 70.0) os << " ss=" << format_double(d.ss_mv_per_dec);
      os << '\n';
    } else if (const auto* cap = std::get_if<CapacitorElement>(&e)) {
      os << cap->name << ' ' << cap->n_plus << ' ' << cap->n_minus << ' '
         << format_double(cap->farads) << '\n';
    } else if (const auto* src = std::get_if<VoltageSourceElement>(&e)) {
      os << src->name << ' ' << src->n_plus << ' ' << src->n_minus << ' ';
      serialize_stimulus(os, src->waveform);
      os << '\n';
    } else if (const auto* sw = std::get_if<SwitchElement>(&e)) {
      os << sw->name << ' ' << sw->n_plus << ' ' << sw->n_minus << " ctrl=" << sw->ctrl_source
         << " ron=" << format_double(sw->on_resistance)
         << " roff=" << format_double(sw->off_resistance)
         << " thresh=" << format_double(sw->threshold) << '\n';
    }
  }
  os << ".end\n";
  return os.str();
}

bool structurally_equal(const Circuit& a, const Circuit& b) {
  if (a.title != b.title || a.temperature_c != b.temperature_c) return false;
  if (a.nodes != b.nodes) return false;
  if (a.elements.size() != b.elements.size()) return false;
  for (std::size_t i = 0; i < a.elements.size(); ++i) {
    const Element& ea = a.elements[i];
    const Element& eb = b.elements[i];
    if (ea.index() != eb.index()) return false;
    bool same = std::visit(
        [&](const auto& x) {
          using T = std::decay_t<decltype(x)>;
          const auto& y = std::get<T>(eb);
          if constexpr (std::is_same_v<T, CntfetElement>) {
            const auto& dx = x.device;
            const auto& dy = y.device;
            return x.name == y.name && x.drain == y.drain && x.gate == y.gate &&
                   x.source == y.source && dx.polarity == dy.polarity &&
                   dx.chirality.n == dy.chirality.n && dx.chirality.m == dy.chirality.m &&
                   dx.tubes == dy.tubes && dx.channel_length_nm == dy.channel_length_nm &&
                   dx.oxide_thickness_nm == dy.oxide_thickness_nm && dx.k_on == dy.k_on &&
                   dx.i_off == dy.i_off && dx.ss_mv_per_dec == dy.ss_mv_per_dec &&
                   dx.vth_override == dy.vth_override;
          } else if constexpr (std::is_same_v<T, CapacitorElement>) {
            return x.name == y.name && x.n_plus == y.n_plus && x.n_minus == y.n_minus &&
                   x.farads == y.farads;
          } else if constexpr (std::is_same_v<T, VoltageSourceElement>) {
            return x.name == y.name && x.n_plus == y.n_plus && x.n_minus == y.n_minus &&
                   x.waveform == y.waveform;
          } else {
            return x.name == y.name && x.n_plus == y.n_plus && x.n_minus == y.n_minus &&
                   x.ctrl_source == y.ctrl_source && x.threshold == y.threshold &&
                   x.on_resistance == y.on_resistance && x.off_resistance == y.off_resistance;
          }
        },
        ea);
    if (!same) return false;
  }
  return true;
}

}  // namespace tdram
