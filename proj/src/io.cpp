#include "tdram/io.hpp"

#include <charconv>
#include <sstream>
#include <vector>

namespace tdram {

namespace {

std::string format_scientific(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::scientific);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    auto pos = line.find(sep, start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

double parse_field(const std::string& s, std::size_t line_no) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw std::runtime_error("csv line " + std::to_string(line_no) + ": bad number '" + s + "'");
  return v;
}

}  // namespace

std::string waveform_to_csv(const WaveformSet& wf) {
  std::ostringstream os;
  os << "time_s";
  for (const auto& n : wf.node_names()) os << ",v_" << n;
  for (const auto& e : wf.element_names()) os << ",i_" << e;
  os << '\n';
  for (std::size_t k = 0; k < wf.samples(); ++k) {
    os << format_scientific(wf.time()[k]);
    for (const auto& n : wf.node_names()) os << ',' << format_scientific(wf.node(n)[k]);
    for (const auto& e : wf.element_names()) os << ',' << format_scientific(wf.branch(e)[k]);
    os << '\n';
  }
  return os.str();
}

WaveformSet waveform_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: empty input");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  const auto header = split(line, ',');
  if (header.empty() || header[0] != "time_s")
    throw std::runtime_error("csv: first column must be time_s");
  std::vector<std::string> nodes, elements;
  for (std::size_t i = 1; i < header.size(); ++i) {
    if (header[i].rfind("v_", 0) == 0)
      nodes.push_back(header[i].substr(2));
    else if (header[i].rfind("i_", 0) == 0)
      elements.push_back(header[i].substr(2));
    else
      throw std::runtime_error("csv: unknown column '" + header[i] + "'");
  }

  WaveformSet wf(nodes, elements);
  std::size_t line_no = 1;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = split(line, ',');
    if (fields.size() != header.size())
      throw std::runtime_error("csv line " + std::to_string(line_no) + ": expected " +
                               std::to_string(header.size()) + " fields, got " +
                               std::to_string(fields.size()));
    std::vector<double> node_v(nodes.size()), branch_i(elements.size());
    const double t = parse_field(fields[0], line_no);
    for (std::size_t i = 0; i < nodes.size(); ++i) node_v[i] = parse_field(fields[1 + i], line_no);
    for (std::size_t i = 0; i < elements.size(); ++i)
      branch_i[i] = parse_field(fields[1 + nodes.size() + i], line_no);
    wf.append(t, node_v, branch_i);
  }
  return wf;
}

}  // namespace tdram
