#pragma once

#include <string>

#include "tdram/engine.hpp"

namespace tdram {

/// Waveform CSV: header "time_s,v_<node>...,i_<element>...", one row per
/// sample, values in SI base units, shortest scientific notation.
std::string waveform_to_csv(const WaveformSet& wf);

/// Inverse of waveform_to_csv. Throws std::runtime_error on malformed input.
WaveformSet waveform_from_csv(const std::string& text);

}  // namespace tdram
