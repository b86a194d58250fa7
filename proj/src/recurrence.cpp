#include "benfordseq/recurrence.hpp"

#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "benfordseq/errors.hpp"
#include "benfordseq/hash.hpp"

namespace benfordseq {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void validate(const RecurrenceSpec& s) {
  if (s.depth < 1) throw UsageError("depth must be at least 1");
  if (static_cast<int>(s.coeffs.size()) != s.depth)
    throw UsageError("coefficient count must equal depth");
  if (static_cast<int>(s.initial.size()) != s.depth)
    throw UsageError("initial value count must equal depth");
  if (s.horizon < s.depth) throw UsageError("horizon shorter than the initial segment");
}

double eval_coeff(const RecurrenceSpec& s, int i, std::int64_t n) {
  EvalContext ctx{n, substream(s.seed, static_cast<std::uint64_t>(i)), 0};
  try {
    return eval(s.coeffs[i], ctx);
  } catch (const DomainError& e) {
    throw DomainError("coefficient f" + std::to_string(i + 1) + " at step n=" +
                      std::to_string(n) + ": " + e.what());
  }
}

}  // namespace

bool RecurrenceSpec::any_random() const {
  for (const auto& c : coeffs)
    if (has_random(c)) return true;
  return false;
}

RecurrenceSpec make_spec(RecKind kind, std::vector<std::string> coeff_text,
                         std::vector<double> initial, std::int64_t horizon,
                         std::uint64_t seed) {
  RecurrenceSpec s;
  s.kind = kind;
  s.depth = static_cast<int>(coeff_text.size());
  s.coeff_text = std::move(coeff_text);
  for (const auto& t : s.coeff_text) s.coeffs.push_back(parse_expr(t));
  for (double v : initial) s.initial.push_back(from_real(v));
  s.horizon = horizon;
  s.seed = seed;
  validate(s);
  return s;
}

std::uint64_t spec_hash(const RecurrenceSpec& s) {
  std::string key = s.kind == RecKind::linear ? "linear" : "multiplicative";
  key += '|';
  for (const auto& t : s.coeff_text) {
    key += t;
    key += ';';
  }
  key += '|';
  for (const auto& v : s.initial) {
    key += to_string(v);
    key += ';';
  }
  key += '|';
  key += std::to_string(s.horizon);
  key += '|';
  key += std::to_string(s.seed);
  return fnv1a64(key);
}

SequenceSample iterate_linear(const RecurrenceSpec& spec) {
  validate(spec);
  if (spec.kind != RecKind::linear) throw UsageError("iterate_linear needs a linear spec");
  SequenceSample out;
  out.spec = spec;
  out.meta.spec_hash = spec_hash(spec);
  out.meta.seed = spec.seed;
  const bool random = spec.any_random();
  if (random) {
    out.meta.generator = kGeneratorId;
    out.meta.realized.assign(spec.coeffs.size(),
                             std::vector<double>(static_cast<std::size_t>(spec.horizon), kNaN));
  }

  out.values = spec.initial;
  out.values.reserve(static_cast<std::size_t>(spec.horizon));
  for (std::int64_t n = spec.depth; n < spec.horizon; ++n) {
    // a_{n+1} = sum_i f_i(n) a_{n-i+1}; with 0-based storage the new term at
    // index n uses coefficient argument n (1-based current top index).
    SciNum acc = sci_zero();
    for (int i = 0; i < spec.depth; ++i) {
      double fi = eval_coeff(spec, i, n);
      if (!std::isfinite(fi))
        throw OverflowError("coefficient f" + std::to_string(i + 1) +
                            " overflowed at step n=" + std::to_string(n));
      if (random) out.meta.realized[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = fi;
      acc = add(acc, mul(from_real(fi), out.values[static_cast<std::size_t>(n - 1 - i)]),
                &out.meta.precision_loss);
    }
    out.values.push_back(acc);
  }

  out.log10_frac.reserve(out.values.size());
  for (const auto& v : out.values) {
    if (v.is_zero()) {
      ++out.meta.zero_terms;
      out.log10_frac.push_back(kNaN);
    } else {
      out.log10_frac.push_back(log10_frac(v));
    }
  }
  return out;
}

SequenceSample iterate_multiplicative(const RecurrenceSpec& spec) {
  validate(spec);
  if (spec.kind != RecKind::multiplicative)
    throw UsageError("iterate_multiplicative needs a multiplicative spec");
  SequenceSample out;
  out.spec = spec;
  out.meta.spec_hash = spec_hash(spec);
  out.meta.seed = spec.seed;
  const bool random = spec.any_random();
  if (random) {
    out.meta.generator = kGeneratorId;
    out.meta.realized.assign(spec.coeffs.size(),
                             std::vector<double>(static_cast<std::size_t>(spec.horizon), kNaN));
  }

  std::vector<double> logs;
  logs.reserve(static_cast<std::size_t>(spec.horizon));
  for (const auto& v : spec.initial) {
    if (v.sign != 1) throw DomainError("multiplicative specs need positive initial values");
    logs.push_back(log10_abs(v));
  }
  for (std::int64_t n = spec.depth; n < spec.horizon; ++n) {
    double l = 0.0;
    for (int i = 0; i < spec.depth; ++i) {
      double fi = eval_coeff(spec, i, n);
      if (random) out.meta.realized[static_cast<std::size_t>(i)][static_cast<std::size_t>(n)] = fi;
      l += fi * logs[static_cast<std::size_t>(n - 1 - i)];
    }
    if (!std::isfinite(l))
      throw OverflowError("log10 magnitude overflowed at step n=" + std::to_string(n + 1));
    // Once ulp(l) passes 1e-9 the stored fractional part is no longer
    // trustworthy for mod-1 analysis; the count flags those terms.
    if (std::fabs(l) * std::numeric_limits<double>::epsilon() > 1e-9)
      ++out.meta.precision_loss;
    logs.push_back(l);
  }

  out.values.reserve(logs.size());
  out.log10_frac.reserve(logs.size());
  for (std::size_t i = 0; i < logs.size(); ++i) {
    SciNum v;
    try {
      v = from_log10(logs[i], 1);
    } catch (const OverflowError&) {
      throw OverflowError("term magnitude exceeds the representable exponent range at n=" +
                          std::to_string(i + 1));
    }
    out.values.push_back(v);
    out.log10_frac.push_back(log10_frac(v));
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> exponent_sequences(
    const RecurrenceSpec& spec, std::int64_t n_terms) {
  validate(spec);
  if (spec.kind != RecKind::multiplicative)
    throw UsageError("exponent_sequences needs a multiplicative spec");
  if (spec.depth != 2) throw UsageError("exponent_sequences is defined for depth-2 specs");
  if (n_terms < 2) throw UsageError("need at least two terms");
  std::vector<double> x{0.0, 1.0}, y{1.0, 0.0};
  for (std::int64_t n = 2; n < n_terms; ++n) {
    double f1 = eval_coeff(spec, 0, n);
    double f2 = eval_coeff(spec, 1, n);
    double xn = f1 * x[static_cast<std::size_t>(n - 1)] + f2 * x[static_cast<std::size_t>(n - 2)];
    double yn = f1 * y[static_cast<std::size_t>(n - 1)] + f2 * y[static_cast<std::size_t>(n - 2)];
    if (!std::isfinite(xn) || !std::isfinite(yn))
      throw OverflowError("exponent sequence overflowed at step n=" + std::to_string(n + 1));
    x.push_back(xn);
    y.push_back(yn);
  }
  return {std::move(x), std::move(y)};
}

void write_csv(const SequenceSample& sample, std::ostream& out) {
  out << "n,sign,mantissa,exponent,log10_frac\n";
  char buf[128];
  for (std::int64_t i = 0; i < sample.size(); ++i) {
    const SciNum& v = sample.values[static_cast<std::size_t>(i)];
    double lf = sample.log10_frac[static_cast<std::size_t>(i)];
    if (std::isnan(lf)) {
      std::snprintf(buf, sizeof buf, "%lld,%d,%.17g,%lld,\n", static_cast<long long>(i + 1),
                    v.sign, v.mantissa, static_cast<long long>(v.exponent));
    } else {
      std::snprintf(buf, sizeof buf, "%lld,%d,%.17g,%lld,%.17g\n", static_cast<long long>(i + 1),
                    v.sign, v.mantissa, static_cast<long long>(v.exponent), lf);
    }
    out << buf;
  }
}

nlohmann::json sample_to_json(const SequenceSample& sample) {
  nlohmann::json j;
  j["spec"] = {{"kind", sample.spec.kind == RecKind::linear ? "linear" : "multiplicative"},
               {"depth", sample.spec.depth},
               {"coeffs", sample.spec.coeff_text},
               {"horizon", sample.spec.horizon},
               {"seed", sample.spec.seed}};
  std::vector<std::string> init;
  for (const auto& v : sample.spec.initial) init.push_back(to_string(v));
  j["spec"]["initial"] = init;
  j["metadata"] = {{"spec_hash", hash_hex(sample.meta.spec_hash)},
                   {"seed", sample.meta.seed},
                   {"generator", sample.meta.generator},
                   {"precision_loss", sample.meta.precision_loss},
                   {"zero_terms", sample.meta.zero_terms}};
  if (sample.meta.clamped_horizon >= 0)
    j["metadata"]["clamped_horizon"] = sample.meta.clamped_horizon;
  if (!sample.meta.label.empty()) j["metadata"]["label"] = sample.meta.label;
  std::vector<std::string> vals;
  vals.reserve(sample.values.size());
  for (const auto& v : sample.values) vals.push_back(to_string(v));
  j["values"] = vals;
  nlohmann::json fr = nlohmann::json::array();
  for (double f : sample.log10_frac) {
    if (std::isnan(f))
      fr.push_back(nullptr);
    else
      fr.push_back(f);
  }
  j["log10_frac"] = fr;
  return j;
}

LoadedSequence load_sequence_csv(std::istream& in) {
  LoadedSequence out;
  std::string line;
  std::size_t lineno = 0;
  // Leading '#' lines carry provenance comments (config hash).
  do {
    if (!std::getline(in, line)) throw ParseError("empty sequence file", lineno);
    ++lineno;
  } while (!line.empty() && line[0] == '#');
  if (line.rfind("n,sign,mantissa,exponent,log10_frac", 0) != 0)
    throw ParseError("unrecognized CSV header", lineno);
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    // Only the last two columns matter for analysis.
    std::size_t last = line.rfind(',');
    if (last == std::string::npos) throw ParseError("malformed CSV row", lineno);
    std::string frac = line.substr(last + 1);
    if (frac.empty()) {
      ++out.zero_terms;
      continue;
    }
    out.log10_frac.push_back(std::strtod(frac.c_str(), nullptr));
  }
  return out;
}

LoadedSequence load_sequence_json(const nlohmann::json& j) {
  LoadedSequence out;
  if (!j.contains("log10_frac")) throw ParseError("sequence JSON lacks log10_frac", 0);
  for (const auto& v : j.at("log10_frac")) {
    if (v.is_null())
      ++out.zero_terms;
    else
      out.log10_frac.push_back(v.get<double>());
  }
  return out;
}

}  // namespace benfordseq
