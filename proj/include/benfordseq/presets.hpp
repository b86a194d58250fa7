#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "benfordseq/recurrence.hpp"

namespace benfordseq {

// Ready-to-run configurations for the worked examples. Two shapes: a plain
// recurrence, or a main-term product r(n) = b1 * prod_{i=1..n} mu(i). The
// log10 variant reads mu_text as log10(mu(i)) and keeps the exponent in an
// integer/fraction split, for products whose factors overflow binary64.
enum class PresetKind { recurrence, main_term, main_term_log10 };

struct Preset {
  std::string name;
  std::string summary;
  PresetKind kind = PresetKind::recurrence;
  RecKind rec_kind = RecKind::linear;
  std::vector<std::string> coeff_text;
  std::vector<double> initial;
  std::string mu_text;
  double b1 = 1.0;
  std::int64_t default_horizon = 10000;
  std::int64_t max_horizon = 0;  // 0 means unbounded
  std::string expected;          // "benford" / "not_benford", informational
};

const std::vector<Preset>& list_presets();
const Preset* find_preset(std::string_view name);

// r(n) = b1 * prod_{i=1..n} mu(i), values[i] = r(i+1). In log10 mode b1 must
// be positive and the accumulator splits integer exponent from fractional
// part so the mod-1 structure survives arbitrarily large magnitudes.
SequenceSample product_sequence(const std::string& mu_text, double b1,
                                std::int64_t n_terms, std::uint64_t seed,
                                bool log10_domain);

// horizon <= 0 picks the preset default; horizons past max_horizon clamp,
// noted in the sample metadata.
SequenceSample run_preset(const Preset& p, std::int64_t horizon, std::uint64_t seed);

}  // namespace benfordseq
