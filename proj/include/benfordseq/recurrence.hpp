#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "benfordseq/expr.hpp"
#include "benfordseq/scinum.hpp"

namespace benfordseq {

enum class RecKind { linear, multiplicative };

// a_{n+1} = sum_i f_i(n) a_{n-i+1}            (linear)
// A_{n+1} = prod_i A_{n-i+1}^{f_i(n)}         (multiplicative, in log10 space)
// with depth L coefficients f_1..f_L and initial terms a_1..a_L.
struct RecurrenceSpec {
  RecKind kind = RecKind::linear;
  int depth = 0;
  std::vector<std::string> coeff_text;  // source text, kept for hashing/reports
  std::vector<Expr> coeffs;             // parsed form of coeff_text
  std::vector<SciNum> initial;
  std::int64_t horizon = 1000;  // total terms including the initial ones
  std::uint64_t seed = 0;

  bool any_random() const;
};

RecurrenceSpec make_spec(RecKind kind, std::vector<std::string> coeff_text,
                         std::vector<double> initial, std::int64_t horizon,
                         std::uint64_t seed);

std::uint64_t spec_hash(const RecurrenceSpec& s);

struct SampleMetadata {
  std::uint64_t spec_hash = 0;
  std::uint64_t seed = 0;
  std::string generator;  // kGeneratorId when any coefficient draws
  std::int64_t precision_loss = 0;
  std::int64_t zero_terms = 0;
  std::int64_t clamped_horizon = -1;  // preset runner notes a clamp here
  std::string label;                  // free-form source tag ("preset:...", "main-term")
  // Realized coefficient values, cached only for random coefficients so a
  // decomposition can share the exact same draws: realized[i][n] = f_{i+1}(n),
  // indexed directly by n (slots below `depth` unused).
  std::vector<std::vector<double>> realized;
};

struct SequenceSample {
  RecurrenceSpec spec;
  std::vector<SciNum> values;      // values[i] = a_{i+1}, i = 0..N-1
  std::vector<double> log10_frac;  // NaN where the term is zero
  SampleMetadata meta;

  std::int64_t size() const { return static_cast<std::int64_t>(values.size()); }
};

SequenceSample iterate_linear(const RecurrenceSpec& spec);
SequenceSample iterate_multiplicative(const RecurrenceSpec& spec);

// Exponent bookkeeping for depth-2 multiplicative specs: both sequences obey
// x_{n+1} = f_1(n) x_n + f_2(n) x_{n-1}, seeded x_1=0, x_2=1 and y_1=1, y_2=0,
// so that log10 A_n = x_n log10 A_2 + y_n log10 A_1.
std::pair<std::vector<double>, std::vector<double>> exponent_sequences(
    const RecurrenceSpec& spec, std::int64_t n_terms);

// Columns: n, sign, mantissa, exponent, log10_frac. Mantissa printed with
// 17 significant digits (bit-exact reload), log10_frac with %.17g.
void write_csv(const SequenceSample& sample, std::ostream& out);

nlohmann::json sample_to_json(const SequenceSample& sample);

// Reload of the analysis-relevant columns from either export format.
struct LoadedSequence {
  std::vector<double> log10_frac;  // zero terms skipped
  std::int64_t zero_terms = 0;
};
LoadedSequence load_sequence_csv(std::istream& in);
LoadedSequence load_sequence_json(const nlohmann::json& j);

}  // namespace benfordseq
