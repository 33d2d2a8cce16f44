#include "tdram/parser.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <set>
#include <vector>

#include "tdram/text.hpp"

namespace tdram {

namespace {

struct Token {
  std::string text;
  int line;
  int col;
};

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

// Splits one line into tokens, treating '(' and ')' as separators that
// vanish (so "pwl(0 0" tokenizes as "pwl" "0" "0").
std::vector<Token> tokenize_line(std::string_view text, int line_no) {
  std::vector<Token> out;
  std::string cur;
  int cur_col = 0;
  auto flush = [&]() {
    if (!cur.empty()) {
      out.push_back({cur, line_no, cur_col});
      cur.clear();
    }
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (std::isspace(static_cast<unsigned char>(c)) || c == '(' || c == ')') {
      flush();
    } else {
      if (cur.empty()) cur_col = static_cast<int>(i) + 1;
      cur += c;
    }
  }
  flush();
  return out;
}

double parse_number_tok(const Token& t) {
  double v = 0.0;
  std::string err;
  if (!parse_eng_number(t.text, &v, &err)) throw ParseError(t.line, t.col, err);
  return v;
}

int parse_int_tok(const Token& t, const char* what) {
  int v = 0;
  auto res = std::from_chars(t.text.data(), t.text.data() + t.text.size(), v);
  if (res.ec != std::errc{} || res.ptr != t.text.data() + t.text.size())
    throw ParseError(t.line, t.col, std::string("malformed ") + what + " '" + t.text + "'");
  return v;
}

// key=value tokens for device/switch parameter tails.
bool split_kv(const Token& t, std::string* key, Token* value) {
  auto pos = t.text.find('=');
  if (pos == std::string::npos) return false;
  *key = lower(t.text.substr(0, pos));
  *value = {t.text.substr(pos + 1), t.line, t.col + static_cast<int>(pos) + 1};
  return true;
}

Chirality parse_chirality(const Token& t) {
  auto comma = t.text.find(',');
  if (comma == std::string::npos)
    throw ParseError(t.line, t.col, "malformed chirality '" + t.text + "' (expected n,m)");
  Token tn{t.text.substr(0, comma), t.line, t.col};
  Token tm{t.text.substr(comma + 1), t.line, t.col + static_cast<int>(comma) + 1};
  Chirality c{parse_int_tok(tn, "chirality index"), parse_int_tok(tm, "chirality index")};
  try {
    validate(c);
  } catch (const std::invalid_argument& ex) {
    throw ParseError(t.line, t.col, std::string("malformed chirality: ") + ex.what());
  }
  return c;
}

}  // namespace

Circuit parse_netlist(std::string_view text) {
  Circuit circuit;
  std::set<std::string> names;
  std::vector<std::pair<SwitchElement, Token>> pending_switch_ctrl;

  int line_no = 0;
  std::size_t pos = 0;
  bool ended = false;
  while (pos <= text.size() && !ended) {
    auto nl = text.find('\n', pos);
    std::string_view line = text.substr(pos, nl == std::string_view::npos ? text.size() - pos
                                                                          : nl - pos);
    pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) continue;
    if (line[first] == '*') continue;

    auto tokens = tokenize_line(line, line_no);
    if (tokens.empty()) continue;
    const Token& head = tokens[0];
    const std::string head_lower = lower(head.text);

    if (head_lower[0] == '.') {
      if (head_lower == ".end") {
        ended = true;
      } else if (head_lower == ".title") {
        auto after = line.find(head.text) + head.text.size();
        auto start = line.find_first_not_of(" \t", after);
        circuit.title = start == std::string_view::npos ? "" : std::string(line.substr(start));
        while (!circuit.title.empty() &&
               (circuit.title.back() == '\r' || circuit.title.back() == ' '))
          circuit.title.pop_back();
      } else if (head_lower == ".temp") {
        if (tokens.size() != 2)
          throw ParseError(head.line, head.col, ".temp expects one value");
        circuit.temperature_c = parse_number_tok(tokens[1]);
      } else {
        throw ParseError(head.line, head.col, "unknown directive '" + head.text + "'");
      }
      continue;
    }

    const char letter = static_cast<char>(std::toupper(static_cast<unsigned char>(head.text[0])));
    const std::string name = head_lower;
    if (!names.insert(name).second)
      throw ParseError(head.line, head.col, "duplicate element name '" + name + "'");

    switch (letter) {
      case 'C': {
        if (tokens.size() != 4)
          throw ParseError(head.line, head.col,
                           "capacitor expects: C<name> <n+> <n-> <value>");
        CapacitorElement cap;
        cap.name = name;
        cap.n_plus = lower(tokens[1].text);
        cap.n_minus = lower(tokens[2].text);
        cap.farads = parse_number_tok(tokens[3]);
        if (!(cap.farads > 0.0))
          throw ParseError(tokens[3].line, tokens[3].col, "capacitance must be positive");
        circuit.add(cap);
        break;
      }
      case 'V': {
        if (tokens.size() < 5)
          throw ParseError(head.line, head.col,
                           "source expects: V<name> <n+> <n-> dc <v> | pwl(<t> <v> ...)");
        VoltageSourceElement src;
        src.name = name;
        src.n_plus = lower(tokens[1].text);
        src.n_minus = lower(tokens[2].text);
        const std::string kind = lower(tokens[3].text);
        if (kind == "dc") {
          if (tokens.size() != 5)
            throw ParseError(tokens[3].line, tokens[3].col, "dc expects a single value");
          src.waveform = Stimulus::dc(parse_number_tok(tokens[4]));
        } else if (kind == "pwl") {
          if ((tokens.size() - 4) % 2 != 0)
            throw ParseError(tokens[3].line, tokens[3].col,
                             "pwl expects an even list of time/value pairs");
          std::vector<std::pair<double, double>> pts;
          for (std::size_t i = 4; i + 1 < tokens.size(); i += 2)
            pts.emplace_back(parse_number_tok(tokens[i]), parse_number_tok(tokens[i + 1]));
          try {
            src.waveform = Stimulus::pwl(std::move(pts));
          } catch (const std::invalid_argument& ex) {
            throw ParseError(tokens[3].line, tokens[3].col, ex.what());
          }
        } else {
          throw ParseError(tokens[3].line, tokens[3].col,
                           "unknown source kind '" + tokens[3].text + "' (expected dc or pwl)");
        }
        circuit.add(src);
        break;
      }
      case 'S': {
        if (tokens.size() < 6)
          throw ParseError(head.line, head.col,
                           "switch expects: S<name> <n+> <n-> ctrl=<source> ron=<ohms> roff=<ohms>");
        SwitchElement sw;
        sw.name = name;
        sw.n_plus = lower(tokens[1].text);
        sw.n_minus = lower(tokens[2].text);
        bool have_ctrl = false, have_ron = false, have_roff = false;
        Token ctrl_tok = head;
        for (std::size_t i = 3; i < tokens.size(); ++i) {
          std::string key;
          Token value{"", 0, 0};
          if (!split_kv(tokens[i], &key, &value))
            throw ParseError(tokens[i].line, tokens[i].col,
                             "expected key=value, got '" + tokens[i].text + "'");
          if (key == "ctrl") {
            sw.ctrl_source = lower(value.text);
            ctrl_tok = value;
            have_ctrl = true;
          } else if (key == "ron") {
            sw.on_resistance = parse_number_tok(value);
            have_ron = true;
          } else if (key == "roff") {
            sw.off_resistance = parse_number_tok(value);
            have_roff = true;
          } else if (key == "thresh") {
            sw.threshold = parse_number_tok(value);
          } else {
            throw ParseError(tokens[i].line, tokens[i].col,
                             "unknown switch parameter '" + key + "'");
          }
        }
        if (!have_ctrl || !have_ron || !have_roff)
          throw ParseError(head.line, head.col, "switch requires ctrl=, ron= and roff=");
        if (!(sw.on_resistance < sw.off_resistance))
          throw ParseError(head.line, head.col, "switch needs ron < roff");
        pending_switch_ctrl.emplace_back(sw, ctrl_tok);
        circuit.add(sw);
        break;
      }
      case 'M': {
        if (tokens.size() < 6)
          throw ParseError(head.line, head.col,
                           "device expects: M<name> <d> <g> <s> <n|p> chirality=<n>,<m> ...");
        CntfetElement fet;
        fet.name = name;
        fet.drain = lower(tokens[1].text);
        fet.gate = lower(tokens[2].text);
        fet.source = lower(tokens[3].text);
        const std::string pol = lower(tokens[4].text);
        if (pol == "n")
          fet.device.polarity = Polarity::N;
        else if (pol == "p")
          fet.device.polarity = Polarity::P;
        else
          throw ParseError(tokens[4].line, tokens[4].col,
                           "polarity must be n or p, got '" + tokens[4].text + "'");
        bool have_chirality = false;
        for (std::size_t i = 5; i < tokens.size(); ++i) {
          std::string key;
          Token value{"", 0, 0};
          if (!split_kv(tokens[i], &key, &value))
            throw ParseError(tokens[i].line, tokens[i].col,
                             "expected key=value, got '" + tokens[i].text + "'");
          if (key == "chirality") {
            fet.device.chirality = parse_chirality(value);
            have_chirality = true;
          } else if (key == "tubes") {
            fet.device.tubes = parse_int_tok(value, "tube count");
          } else if (key == "vth") {
            fet.device.vth_override = parse_number_tok(value);
          } else if (key == "l") {
            fet.device.channel_length_nm = parse_number_tok(value);
          } else if (key == "tox") {
            fet.device.oxide_thickness_nm = parse_number_tok(value);
          } else if (key == "kon") {
            fet.device.k_on = parse_number_tok(value);
          } else if (key == "ioff") {
            fet.device.i_off = parse_number_tok(value);
          } else if (key == "ss") {
            fet.device.ss_mv_per_dec = parse_number_tok(value);
          } else {
            throw ParseError(tokens[i].line, tokens[i].col,
                             "unknown device parameter '" + key + "'");
          }
        }
        if (!have_chirality)
          throw ParseError(head.line, head.col, "device requires chirality=<n>,<m>");
        try {
          validate(fet.device);
        } catch (const std::invalid_argument& ex) {
          throw ParseError(head.line, head.col, ex.what());
        }
        circuit.add(fet);
        break;
      }
      default:
        throw ParseError(head.line, head.col,
                         std::string("unknown element letter '") + head.text[0] + "'");
    }
  }

  for (const auto& [sw, ctrl_tok] : pending_switch_ctrl) {
    if (!circuit.find_source(sw.ctrl_source))
      throw ParseError(ctrl_tok.line, ctrl_tok.col,
                       "switch " + sw.name + " references undefined control source '" +
                           sw.ctrl_source + "'");
  }

  return circuit;
}

}  // namespace tdram
