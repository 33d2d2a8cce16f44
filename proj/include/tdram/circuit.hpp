#pragma once

#include <string>
#include <variant>
#include <vector>

#include "tdram/device.hpp"
#include "tdram/stimulus.hpp"

namespace tdram {

/// Circuit elements reference nodes by name; "0" is ground and is always
/// present in a Circuit's node table.

struct CntfetElement {
  std::string name;
  std::string drain, gate, source;
  CntfetDevice device;
};

struct CapacitorElement {
  std::string name;
  std::string n_plus, n_minus;
  double farads = 0.0;
};

struct VoltageSourceElement {
  std::string name;
  std::string n_plus, n_minus;
  Stimulus waveform;
};

/// Voltage-controlled ideal-ish switch: ron when the controlling source's
/// waveform is at or above threshold, roff otherwise. roff is large but
/// finite so the nodal matrix stays nonsingular.
struct SwitchElement {
  std::string name;
  std::string n_plus, n_minus;
  std::string ctrl_source;  // name of a VoltageSourceElement
  double threshold = 0.6;
  double on_resistance = 10e3;
  double off_resistance = 1e12;
};

using Element =
    std::variant<CntfetElement, CapacitorElement, VoltageSourceElement, SwitchElement>;

const std::string& element_name(const Element& e);
std::vector<std::string> element_nodes(const Element& e);

struct Circuit {
  std::string title;
  double temperature_c = 25.0;  // ambient seen by every device
  std::vector<std::string> nodes{"0"};
  std::vector<Element> elements;

  /// Registers the node if new, returns its index. Ground is index 0.
  int ensure_node(const std::string& name);
  /// Index of an existing node, -1 if absent.
  int node_index(const std::string& name) const;

  void add(Element e);

  const VoltageSourceElement* find_source(const std::string& name) const;

  int count_cntfets() const;
};

struct Diagnostic {
  std::string message;
  std::string subject;  // offending element or node name, when known
};

/// Structural checks: every element node registered, ground present, node
/// names unique, element names unique, at least one source, every non-ground
/// node touched by some element, element value invariants (capacitance > 0,
/// ron < roff, device invariants), switch ctrl references resolve.
/// Empty result means the circuit is well formed.
std::vector<Diagnostic> validate(const Circuit& c);

/// Canonical text form in the netlist grammar. Deterministic: identical
/// circuits serialize to identical bytes, and the output re-parses to a
/// structurally identical circuit.
std::string serialize(const Circuit& c);

bool structurally_equal(const Circuit& a, const Circuit& b);

}  // namespace tdram
