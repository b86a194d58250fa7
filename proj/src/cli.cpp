#include "benfordseq/cli.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "benfordseq/benford.hpp"
#include "benfordseq/binet.hpp"
#include "benfordseq/decompose.hpp"
#include "benfordseq/errors.hpp"
#include "benfordseq/expr.hpp"
#include "benfordseq/hash.hpp"
#include "benfordseq/presets.hpp"
#include "benfordseq/recurrence.hpp"
#include "benfordseq/scinum.hpp"

namespace benfordseq {
namespace {

using nlohmann::json;

// Everything a run can configure. A --config JSON file fills these first,
// then explicit flags overwrite; precedence is flag > file > built-in.
struct Options {
  std::string preset;
  std::string config_path;
  std::string kind = "linear";
  bool kind_set = false;
  int depth = 0;
  std::vector<std::string> coeff;
  std::vector<double> init;
  std::int64_t horizon = -1;  // -1: preset default / 1000 inline
  std::uint64_t seed = 0;

  std::string output;
  std::string format;  // "", "json", "csv"
  std::string input;
  std::string expect;
  std::string plot_data;
  Thresholds thr;

  std::string mode;  // decompose: "", "scan", "minimal"
  std::optional<double> c_pin, d_pin;
  bool compare_c = false;
  std::string diagnostics;
  std::string main_term_out;

  std::int64_t trials = 1000;
  std::string mc_mode;  // "", "chain", "sequence"
};

bool inline_spec_given(const Options& o) {
  return o.kind_set || !o.coeff.empty() || !o.init.empty();
}

double json_number(const json& v, const char* key) {
  if (!v.is_number()) throw UsageError(std::string("config field '") + key + "' must be a number");
  return v.get<double>();
}

// Strict reader: unknown keys are rejected so config typos surface instead of
// silently falling back to defaults.
void load_config_file(const std::string& path, Options& o) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file: " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config file: ") + e.what(), 0);
  }
  if (!j.is_object()) throw UsageError("config file must hold a JSON object");

  for (const auto& [key, v] : j.items()) {
    if (key == "preset") o.preset = v.get<std::string>();
    else if (key == "kind") { o.kind = v.get<std::string>(); o.kind_set = true; }
    else if (key == "depth") o.depth = v.get<int>();
    else if (key == "coeff") o.coeff = v.get<std::vector<std::string>>();
    else if (key == "init") o.init = v.get<std::vector<double>>();
    else if (key == "horizon") o.horizon = v.get<std::int64_t>();
    else if (key == "seed") o.seed = v.get<std::uint64_t>();
    else if (key == "output") o.output = v.get<std::string>();
    else if (key == "format") o.format = v.get<std::string>();
    else if (key == "input") o.input = v.get<std::string>();
    else if (key == "expect") o.expect = v.get<std::string>();
    else if (key == "plot_data") o.plot_data = v.get<std::string>();
    else if (key == "mode") o.mode = v.get<std::string>();
    else if (key == "c") o.c_pin = json_number(v, "c");
    else if (key == "d") o.d_pin = json_number(v, "d");
    else if (key == "compare_c") o.compare_c = v.get<bool>();
    else if (key == "diagnostics") o.diagnostics = v.get<std::string>();
    else if (key == "main_term") o.main_term_out = v.get<std::string>();
    else if (key == "trials") o.trials = v.get<std::int64_t>();
    else if (key == "mc_mode") o.mc_mode = v.get<std::string>();
    else if (key == "thresholds") {
      if (!v.is_object()) throw UsageError("config field 'thresholds' must be an object");
      for (const auto& [tk, tv] : v.items()) {
        if (tk == "digit_dev") o.thr.digit_dev = json_number(tv, "digit_dev");
        else if (tk == "dstar") o.thr.dstar = json_number(tv, "dstar");
        else if (tk == "weyl") o.thr.weyl = json_number(tv, "weyl");
        else if (tk == "weyl_m") o.thr.weyl_m = tv.get<int>();
        else if (tk == "min_points") o.thr.min_points = tv.get<std::int64_t>();
        else throw UsageError("unknown threshold field '" + tk + "' in config file");
      }
    } else {
      throw UsageError("unknown field '" + key + "' in config file");
    }
  }
}

RecKind parse_kind(const std::string& s) {
  if (s == "linear") return RecKind::linear;
  if (s == "multiplicative") return RecKind::multiplicative;
  throw UsageError("unknown recurrence kind '" + s + "' (linear | multiplicative)");
}

// The resolved spec source: either a preset or an inline recurrence.
struct SpecSource {
  const Preset* preset = nullptr;
  RecKind kind = RecKind::linear;
  std::vector<std::string> coeff;
  std::vector<double> init;
  std::int64_t horizon = 0;  // effective total terms (preset defaults applied)
  std::uint64_t seed = 0;

  bool is_product() const {
    return preset && preset->kind != PresetKind::recurrence;
  }
};

SpecSource resolve_spec(const Options& o) {
  if (!o.preset.empty() && inline_spec_given(o))
    throw UsageError("--preset cannot be combined with --kind/--coeff/--init");

  SpecSource s;
  s.seed = o.seed;
  if (!o.preset.empty()) {
    s.preset = find_preset(o.preset);
    if (!s.preset) {
      std::string names;
      for (const auto& p : list_presets()) names += (names.empty() ? "" : ", ") + p.name;
      throw UsageError("unknown preset '" + o.preset + "' (available: " + names + ")");
    }
    s.kind = s.preset->rec_kind;
    s.coeff = s.preset->coeff_text;
    s.init = s.preset->initial;
    // Clamping stays inside run_preset so the sample metadata records it.
    s.horizon = o.horizon > 0 ? o.horizon : s.preset->default_horizon;
  } else if (inline_spec_given(o)) {
    if (o.coeff.empty()) throw UsageError("inline spec needs at least one --coeff");
    int depth = o.depth > 0 ? o.depth : static_cast<int>(o.coeff.size());
    if (depth != static_cast<int>(o.coeff.size()))
      throw UsageError("--depth disagrees with the number of --coeff flags");
    if (static_cast<int>(o.init.size()) != depth)
      throw UsageError("need exactly one --init per coefficient (depth " +
                       std::to_string(depth) + ", got " + std::to_string(o.init.size()) + ")");
    s.kind = parse_kind(o.kind);
    s.coeff = o.coeff;
    s.init = o.init;
    s.horizon = o.horizon > 0 ? o.horizon : 1000;
  } else {
    throw UsageError("no spec source: give --preset NAME, a --config file, or --coeff/--init flags");
  }
  if (s.horizon < 2) throw UsageError("horizon must be at least 2");
  return s;
}

// Generate the sample for one realization. extra widens the horizon (the
// decomposition reads one term past its range); seed_shift offsets the
// stream for Monte Carlo trials.
SequenceSample generate(const SpecSource& s, std::int64_t extra = 0,
                        std::uint64_t seed_shift = 0) {
  if (s.preset && (s.is_product() || extra == 0))
    return run_preset(*s.preset, s.horizon + extra, s.seed + seed_shift);
  RecurrenceSpec spec = make_spec(s.kind, s.coeff, s.init, s.horizon + extra,
                                  s.seed + seed_shift);
  SequenceSample sample = s.kind == RecKind::linear ? iterate_linear(spec)
                                                    : iterate_multiplicative(spec);
  if (s.preset) sample.meta.label = "preset:" + s.preset->name;
  return sample;
}

bool spec_has_random(const SpecSource& s) {
  if (s.is_product()) return has_random(parse_expr(s.preset->mu_text));
  for (const auto& t : s.coeff)
    if (has_random(parse_expr(t))) return true;
  return false;
}

json thresholds_json(const Thresholds& t) {
  return json{{"digit_dev", t.digit_dev},
              {"dstar", t.dstar},
              {"weyl", t.weyl},
              {"weyl_m", t.weyl_m},
              {"min_points", t.min_points}};
}

// The resolved configuration echoed into every report. The hash covers
// exactly this object, so identical effective configs collide by design.
json config_echo(const std::string& command, const Options& o, const SpecSource* s) {
  json cfg;
  cfg["command"] = command;
  if (s) {
    if (s->preset) {
      cfg["preset"] = s->preset->name;
    } else {
      cfg["kind"] = s->kind == RecKind::linear ? "linear" : "multiplicative";
      cfg["depth"] = static_cast<int>(s->coeff.size());
      cfg["coeff"] = s->coeff;
      cfg["init"] = s->init;
    }
    cfg["horizon"] = s->horizon;
    cfg["seed"] = s->seed;
  }
  if (!o.input.empty()) cfg["input"] = o.input;
  if (!o.format.empty()) cfg["format"] = o.format;
  if (!o.output.empty()) cfg["output"] = o.output;
  if (!o.plot_data.empty()) cfg["plot_data"] = o.plot_data;
  if (!o.expect.empty()) cfg["expect"] = o.expect;

  if (command == "analyze" || command == "decompose" || command == "montecarlo")
    cfg["thresholds"] = thresholds_json(o.thr);
  if (command == "decompose") {
    cfg["mode"] = o.mode;
    if (o.c_pin) cfg["c"] = *o.c_pin;
    if (o.d_pin) cfg["d"] = *o.d_pin;
    if (o.compare_c) cfg["compare_c"] = true;
    if (!o.diagnostics.empty()) cfg["diagnostics"] = o.diagnostics;
    if (!o.main_term_out.empty()) cfg["main_term"] = o.main_term_out;
  }
  if (command == "montecarlo") {
    cfg["trials"] = o.trials;
    cfg["mc_mode"] = o.mc_mode;
  }
  return cfg;
}

std::string config_hash_hex(const json& cfg) { return hash_hex(fnv1a64(cfg.dump())); }

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw UsageError("cannot open output file: " + path);
  out << text;
}

void emit_json(const json& payload, const std::string& path) {
  write_text(path, payload.dump(2) + "\n");
}

std::string format_for(const Options& o) {
  if (!o.format.empty()) {
    if (o.format != "json" && o.format != "csv")
      throw UsageError("unknown format '" + o.format + "' (json | csv)");
    return o.format;
  }
  if (o.output.size() >= 4 && o.output.rfind(".csv") == o.output.size() - 4) return "csv";
  return "json";
}

// Two-column text for external plotting: digit and observed frequency.
void write_plot_data(const BenfordReport& r, const std::string& path,
                     const std::string& hash) {
  std::ostringstream out;
  out << "# config_hash " << hash << "\n";
  char buf[64];
  for (int d = 1; d <= 9; ++d) {
    std::snprintf(buf, sizeof buf, "%d %.17g\n", d, r.freq[static_cast<std::size_t>(d - 1)]);
    out << buf;
  }
  write_text(path, out.str());
}

void write_digit_csv(const BenfordReport& r, const std::string& path,
                     const std::string& hash) {
  std::ostringstream out;
  out << "# config_hash " << hash << "\n";
  out << "digit,observed,expected\n";
  char buf[96];
  for (int d = 1; d <= 9; ++d) {
    auto i = static_cast<std::size_t>(d - 1);
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", d, r.freq[i], r.expected[i]);
    out << buf;
  }
  write_text(path, out.str());
}

// --expect vocabulary: analysis verdicts plus the benford/not_benford aliases
// shared with the predictor.
std::string normalize_expect(std::string e) {
  if (e == "benford") return "consistent";
  if (e == "not_benford") return "inconsistent";
  return e;
}

int expect_result(const std::string& expect, const std::string& got) {
  if (expect.empty()) return 0;
  if (normalize_expect(expect) == normalize_expect(got)) return 0;
  std::cerr << "expect mismatch: wanted " << expect << ", got " << got << "\n";
  return 1;
}

int cmd_gen(const Options& o) {
  SpecSource s = resolve_spec(o);
  SequenceSample sample = generate(s);
  json cfg = config_echo("gen", o, &s);
  std::string hash = config_hash_hex(cfg);

  if (format_for(o) == "csv") {
    std::ostringstream out;
    out << "# config_hash " << hash << "\n";
    write_csv(sample, out);
    write_text(o.output, out.str());
  } else {
    json payload;
    payload["command"] = "gen";
    payload["config"] = cfg;
    payload["config_hash"] = hash;
    payload["sample"] = sample_to_json(sample);
    emit_json(payload, o.output);
  }
  return 0;
}

std::vector<double> load_input_points(const std::string& path, std::int64_t* zero_terms) {
  LoadedSequence loaded;
  if (path.size() >= 4 && path.rfind(".csv") == path.size() - 4) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open input file: " + path);
    loaded = load_sequence_csv(in);
  } else {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open input file: " + path);
    json j;
    try {
      j = json::parse(in);
    } catch (const json::exception& e) {
      throw ParseError(std::string("input file: ") + e.what(), 0);
    }
    loaded = load_sequence_json(j.contains("sample") ? j.at("sample") : j);
  }
  if (zero_terms) *zero_terms = loaded.zero_terms;
  return std::move(loaded.log10_frac);
}

int cmd_analyze(const Options& o) {
  json source_info;
  std::vector<double> points;
  SpecSource s;
  bool have_spec = false;

  if (!o.input.empty()) {
    if (!o.preset.empty() || inline_spec_given(o))
      throw UsageError("--input and a spec source are mutually exclusive");
    std::int64_t zeros = 0;
    points = load_input_points(o.input, &zeros);
    source_info["n_points"] = static_cast<std::int64_t>(points.size());
    source_info["zero_terms"] = zeros;
  } else {
    s = resolve_spec(o);
    have_spec = true;
    SequenceSample sample = generate(s);
    points = sample.log10_frac;
    source_info["n_points"] = static_cast<std::int64_t>(points.size());
    source_info["zero_terms"] = sample.meta.zero_terms;
    if (!sample.meta.label.empty()) source_info["label"] = sample.meta.label;
  }

  BenfordReport report = analyze_points(points, o.thr);
  json cfg = config_echo("analyze", o, have_spec ? &s : nullptr);
  std::string hash = config_hash_hex(cfg);

  if (!o.plot_data.empty()) write_plot_data(report, o.plot_data, hash);

  if (format_for(o) == "csv") {
    write_digit_csv(report, o.output, hash);
  } else {
    json payload;
    payload["command"] = "analyze";
    payload["config"] = cfg;
    payload["config_hash"] = hash;
    payload["source"] = source_info;
    payload["report"] = report_to_json(report);
    emit_json(payload, o.output);
  }
  return expect_result(o.expect, verdict_name(report.verdict));
}

LambdaMode parse_mode(const std::string& m) {
  if (m == "scan") return LambdaMode::scan;
  if (m == "minimal") return LambdaMode::minimal;
  throw UsageError("unknown decomposition mode '" + m + "' (scan | minimal)");
}

// Two-constant cross-check: decompose under the first two admissible scan
// constants and compare the main-term verdicts.
json compare_two_c(const CoeffFn& f, const CoeffFn& g, double a1, double a2,
                   std::int64_t n_terms, const Thresholds& thr) {
  json out;
  std::vector<AuxiliaryDecomposition> decs;
  std::string rejected;
  for (double cand : scan_candidates(a1, a2)) {
    if (!decs.empty() && std::fabs(cand - decs[0].c) < 1e-9) continue;
    try {
      decs.push_back(build_lambda_mu(f, g, a1, a2, n_terms, LambdaMode::scan, cand));
    } catch (const ConstructionError&) {
      continue;
    }
    if (decs.size() == 2) break;
  }
  if (decs.size() < 2) {
    out["error"] = "fewer than two admissible constants in the scan list";
    return out;
  }
  json verdicts = json::array();
  json cs = json::array(), fres = json::array(), gres = json::array();
  bool identities_ok = true;
  std::vector<std::string> names;
  for (const auto& d : decs) {
    cs.push_back(d.c);
    fres.push_back(d.max_f_residual);
    gres.push_back(d.max_g_residual);
    identities_ok = identities_ok && d.max_f_residual < 1e-10 && d.max_g_residual < 1e-10;
    SequenceSample r = main_term_sequence(d, n_terms);
    BenfordReport rep = analyze_points(r.log10_frac, thr);
    names.emplace_back(verdict_name(rep.verdict));
    verdicts.push_back(names.back());
  }
  out["c"] = cs;
  out["max_f_residual"] = fres;
  out["max_g_residual"] = gres;
  out["identities_ok"] = identities_ok;
  out["verdict"] = verdicts;
  out["disagreement"] = names[0] != names[1];
  return out;
}

int cmd_decompose(Options o) {
  if (o.mode.empty()) o.mode = (o.c_pin || o.d_pin) ? "scan" : "minimal";
  LambdaMode mode = parse_mode(o.mode);

  SpecSource s = resolve_spec(o);
  if (s.is_product())
    throw UsageError("preset '" + s.preset->name + "' is already a main-term product");
  if (s.kind != RecKind::linear)
    throw UsageError("decompose needs a linear recurrence");
  int depth = static_cast<int>(s.coeff.size());
  if (depth != 2 && depth != 3)
    throw UsageError("decompose handles depth 2 or 3, got depth " + std::to_string(depth));

  // One extra term so diagnostics reach a_{N+1} at n = N.
  SequenceSample sample = generate(s, 1);
  RecurrenceSpec spec = make_spec(s.kind, s.coeff, s.init, s.horizon + 1, s.seed);
  std::vector<CoeffFn> fns = coeff_fns(spec);
  std::int64_t n_terms = s.horizon;

  json cfg = config_echo("decompose", o, &s);
  std::string hash = config_hash_hex(cfg);
  json payload;
  payload["command"] = "decompose";
  payload["config"] = cfg;
  payload["config_hash"] = hash;
  payload["depth"] = depth;

  BenfordReport mt_report;
  if (depth == 2) {
    if (o.d_pin) throw UsageError("--d applies only to depth-3 specs");
    double a1 = to_double(sample.values[0]);
    double a2 = to_double(sample.values[1]);
    AuxiliaryDecomposition dec =
        build_lambda_mu(fns[0], fns[1], a1, a2, n_terms, mode, o.c_pin);
    DominanceReport dom = dominance_check(dec, fns[0], fns[1], sample);
    SequenceSample r = main_term_sequence(dec, n_terms);
    mt_report = analyze_points(r.log10_frac, o.thr);

    payload["decomposition"] = decomposition_to_json(dec);
    payload["dominance"] = dominance_to_json(dom);
    payload["main_term_report"] = report_to_json(mt_report);
    if (o.compare_c)
      payload["comparison"] =
          compare_two_c(fns[0], fns[1], a1, a2, n_terms, o.thr);

    if (!o.diagnostics.empty()) {
      std::ostringstream csv;
      csv << "# config_hash " << hash << "\n";
      write_dominance_csv(dom, csv);
      write_text(o.diagnostics, csv.str());
    }
    if (!o.main_term_out.empty()) {
      std::ostringstream csv;
      csv << "# config_hash " << hash << "\n";
      write_csv(r, csv);
      write_text(o.main_term_out, csv.str());
    }
  } else {
    if (o.compare_c) throw UsageError("--compare-c applies only to depth-2 specs");
    std::optional<std::pair<double, double>> cd;
    if (o.c_pin && o.d_pin) cd = std::make_pair(*o.c_pin, *o.d_pin);
    else if (o.c_pin || o.d_pin)
      throw UsageError("depth-3 pins need both --c and --d");

    Depth3Reduction red = reduce_depth3(fns, sample, n_terms, mode, cd);

    // Dominance of the reduced b-sequence under its own decomposition.
    SequenceSample bsample;
    bsample.spec = spec;
    bsample.meta.label = "depth3-b";
    for (std::int64_t n = 1; n <= n_terms; ++n)
      bsample.values.push_back(red.b[static_cast<std::size_t>(n)]);
    for (const SciNum& v : bsample.values)
      bsample.log10_frac.push_back(
          v.is_zero() ? std::numeric_limits<double>::quiet_NaN() : log10_frac(v));
    auto g1 = red.g1, g2 = red.g2;
    CoeffFn g1fn(std::function<double(std::int64_t)>([g1](std::int64_t n) {
      return n >= 0 && n < static_cast<std::int64_t>(g1.size())
                 ? g1[static_cast<std::size_t>(n)]
                 : std::numeric_limits<double>::quiet_NaN();
    }));
    CoeffFn g2fn(std::function<double(std::int64_t)>([g2](std::int64_t n) {
      return n >= 0 && n < static_cast<std::int64_t>(g2.size())
                 ? g2[static_cast<std::size_t>(n)]
                 : std::numeric_limits<double>::quiet_NaN();
    }));
    DominanceReport dom = dominance_check(red.inner, g1fn, g2fn, bsample);
    SequenceSample r = main_term_sequence(red.inner, red.inner.n_terms);
    mt_report = analyze_points(r.log10_frac, o.thr);

    payload["reduction"] = depth3_to_json(red);
    payload["inner_dominance"] = dominance_to_json(dom);
    payload["main_term_report"] = report_to_json(mt_report);

    if (!o.diagnostics.empty()) {
      std::ostringstream csv;
      csv << "# config_hash " << hash << "\n";
      write_dominance_csv(dom, csv);
      write_text(o.diagnostics, csv.str());
    }
    if (!o.main_term_out.empty()) {
      std::ostringstream csv;
      csv << "# config_hash " << hash << "\n";
      write_csv(r, csv);
      write_text(o.main_term_out, csv.str());
    }
  }

  emit_json(payload, o.output);
  return expect_result(o.expect, verdict_name(mt_report.verdict));
}

int cmd_predict(const Options& o) {
  SpecSource s = resolve_spec(o);
  if (s.is_product())
    throw UsageError("preset '" + s.preset->name +
                     "' is a main-term product, not a recurrence; use `analyze`");
  if (s.kind != RecKind::linear)
    throw UsageError("predict needs a linear recurrence");

  std::vector<double> c;
  for (const auto& text : s.coeff) {
    Expr e = parse_expr(text);
    if (!is_constant(e))
      throw UsageError("coefficient '" + text +
                       "' depends on n or randomness; use `decompose`");
    EvalContext ctx;
    c.push_back(eval(e, ctx));
  }

  BinetSolution sol = binet_coeffs(CharPoly{c}, s.init);
  BenfordPrediction pred = predict_benford(sol);

  json cfg = config_echo("predict", o, &s);
  json payload;
  payload["command"] = "predict";
  payload["config"] = cfg;
  payload["config_hash"] = config_hash_hex(cfg);
  payload["prediction"] = prediction_to_json(sol, pred);
  emit_json(payload, o.output);
  return expect_result(o.expect, predict_status_name(pred.status));
}

// Per-trial work product for the aggregation pass.
struct TrialOutcome {
  double final_point = 0.0;  // chain mode
  BenfordReport report;      // sequence mode
};

// Trials run on a small worker pool; results land in trial-index slots and
// every aggregate walks them in index order, so worker count never shows.
void run_trials(std::int64_t trials, const std::function<TrialOutcome(std::int64_t)>& one,
                std::vector<TrialOutcome>& out) {
  out.resize(static_cast<std::size_t>(trials));
  unsigned hw = std::thread::hardware_concurrency();
  unsigned workers = std::min<unsigned>({hw == 0 ? 1u : hw, 16u,
                                         static_cast<unsigned>(std::min<std::int64_t>(trials, 16))});
  if (workers <= 1) {
    for (std::int64_t t = 0; t < trials; ++t) out[static_cast<std::size_t>(t)] = one(t);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto work = [&] {
    for (;;) {
      std::int64_t t = next.fetch_add(1);
      if (t >= trials) return;
      try {
        out[static_cast<std::size_t>(t)] = one(t);
      } catch (...) {
        std::lock_guard<std::mutex> lk(failure_mu);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

int cmd_montecarlo(const Options& o) {
  if (o.trials < 1) throw UsageError("--trials must be at least 1");
  SpecSource s = resolve_spec(o);
  if (!spec_has_random(s))
    throw UsageError("montecarlo needs a random coefficient; nothing varies across trials");

  std::string mc_mode = o.mc_mode;
  if (mc_mode.empty()) mc_mode = s.is_product() ? "chain" : "sequence";
  if (mc_mode != "chain" && mc_mode != "sequence")
    throw UsageError("unknown mc mode '" + mc_mode + "' (chain | sequence)");

  Options echo_opts = o;
  echo_opts.mc_mode = mc_mode;
  json cfg = config_echo("montecarlo", echo_opts, &s);
  std::string hash = config_hash_hex(cfg);

  bool chain = mc_mode == "chain";
  std::vector<TrialOutcome> outcomes;
  run_trials(o.trials, [&](std::int64_t t) {
    SequenceSample sample = generate(s, 0, static_cast<std::uint64_t>(t));
    TrialOutcome r;
    if (chain)
      r.final_point = sample.log10_frac.back();
    else
      r.report = analyze_points(sample.log10_frac, o.thr);
    return r;
  }, outcomes);

  json mc;
  mc["mode"] = mc_mode;
  mc["trials"] = o.trials;
  std::string verdict;

  if (chain) {
    std::vector<double> points;
    points.reserve(outcomes.size());
    for (const auto& r : outcomes) points.push_back(r.final_point);
    BenfordReport report = analyze_points(points, o.thr);
    mc["report"] = report_to_json(report);
    mc["chi2_pvalue"] = chi2_pvalue_df8(report.chi2);
    verdict = verdict_name(report.verdict);
    if (!o.plot_data.empty()) write_plot_data(report, o.plot_data, hash);
  } else {
    std::array<std::int64_t, 3> verdict_counts{};
    std::array<std::int64_t, 9> pooled{};
    std::int64_t pooled_total = 0;
    double sum_dev = 0.0, sum_dstar = 0.0;
    for (const auto& r : outcomes) {
      verdict_counts[static_cast<std::size_t>(r.report.verdict)] += 1;
      for (int d = 0; d < 9; ++d) pooled[static_cast<std::size_t>(d)] += r.report.hist.counts[static_cast<std::size_t>(d)];
      pooled_total += r.report.hist.total;
      sum_dev += r.report.max_digit_dev;
      sum_dstar += r.report.star_discrepancy;
    }
    double chi2 = 0.0;
    json freq = json::array(), counts = json::array();
    for (int d = 1; d <= 9; ++d) {
      auto i = static_cast<std::size_t>(d - 1);
      double expected = static_cast<double>(pooled_total) * std::log10(1.0 + 1.0 / d);
      double diff = static_cast<double>(pooled[i]) - expected;
      if (pooled_total > 0) chi2 += diff * diff / expected;
      counts.push_back(pooled[i]);
      freq.push_back(pooled_total > 0 ? static_cast<double>(pooled[i]) / static_cast<double>(pooled_total) : 0.0);
    }
    mc["verdicts"] = json{{"consistent", verdict_counts[0]},
                          {"inconsistent", verdict_counts[1]},
                          {"insufficient_sample", verdict_counts[2]}};
    std::size_t best = 0;
    for (std::size_t v = 1; v < 3; ++v)
      if (verdict_counts[v] > verdict_counts[best]) best = v;
    verdict = verdict_name(static_cast<Verdict>(best));
    mc["aggregate_verdict"] = verdict;
    mc["pooled"] = json{{"counts", counts}, {"freq", freq}, {"chi2", chi2},
                        {"chi2_pvalue", chi2_pvalue_df8(chi2)}};
    mc["mean_max_digit_dev"] = sum_dev / static_cast<double>(o.trials);
    mc["mean_star_discrepancy"] = sum_dstar / static_cast<double>(o.trials);
    if (o.trials == 1) mc["report"] = report_to_json(outcomes[0].report);
  }

  json payload;
  payload["command"] = "montecarlo";
  payload["config"] = cfg;
  payload["config_hash"] = hash;
  payload["montecarlo"] = mc;
  emit_json(payload, o.output);
  return expect_result(o.expect, verdict);
}

void add_spec_flags(CLI::App* cmd, Options& o, std::vector<std::string>& coeff,
                    std::vector<double>& init, bool with_inline = true) {
  cmd->add_option("--preset", o.preset, "named example configuration");
  cmd->add_option("--config", o.config_path, "JSON config file (flags override)");
  if (with_inline) {
    cmd->add_option("--kind", o.kind, "linear | multiplicative")
        ->check(CLI::IsMember({"linear", "multiplicative"}));
    cmd->add_option("--depth", o.depth, "recurrence depth (default: #coeff)");
    cmd->add_option("--coeff", coeff, "coefficient expression, repeat per slot");
    cmd->add_option("--init", init, "initial term, repeat per slot");
  }
  cmd->add_option("-N,--horizon", o.horizon, "total terms including initial ones");
  cmd->add_option("--seed", o.seed, "top-level random seed");
}

void add_output_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("-o,--output", o.output, "output path (default: stdout)");
  cmd->add_option("--format", o.format, "json | csv (default: by extension)")
      ->check(CLI::IsMember({"json", "csv"}));
  cmd->add_option("--expect", o.expect,
                  "CI gate: exit 1 unless the verdict matches");
}

void add_threshold_flags(CLI::App* cmd, Options& o) {
  cmd->add_option("--digit-dev", o.thr.digit_dev, "max per-digit deviation");
  cmd->add_option("--dstar", o.thr.dstar, "star discrepancy bound");
  cmd->add_option("--weyl", o.thr.weyl, "max |S_m| bound");
  cmd->add_option("--weyl-m", o.thr.weyl_m, "number of Weyl sums");
  cmd->add_option("--min-points", o.thr.min_points, "insufficient-sample cutoff");
}

}  // namespace

int cli_main(int argc, const char* const* argv) {
  Options o;
  // The config file provides defaults, so it loads before flag parsing; a
  // cheap pre-scan finds it without committing to the full grammar.
  try {
    for (int i = 1; i < argc; ++i) {
      std::string_view a = argv[i];
      if (a == "--config" && i + 1 < argc) {
        o.config_path = argv[i + 1];
        break;
      }
      if (a.rfind("--config=", 0) == 0) {
        o.config_path = std::string(a.substr(9));
        break;
      }
    }
    if (!o.config_path.empty()) load_config_file(o.config_path, o);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  CLI::App app{"first-digit analysis of recurrence sequences"};
  app.require_subcommand(1);

  std::vector<std::string> cli_coeff;
  std::vector<double> cli_init;

  CLI::App* gen = app.add_subcommand("gen", "generate a sequence sample");
  add_spec_flags(gen, o, cli_coeff, cli_init);
  add_output_flags(gen, o);

  CLI::App* analyze = app.add_subcommand("analyze", "first-digit diagnostics");
  add_spec_flags(analyze, o, cli_coeff, cli_init);
  add_output_flags(analyze, o);
  add_threshold_flags(analyze, o);
  analyze->add_option("--input", o.input, "analyze an existing sample file");
  analyze->add_option("--plot-data", o.plot_data, "two-column digit/frequency file");

  CLI::App* decompose = app.add_subcommand("decompose", "auxiliary sequence decomposition");
  add_spec_flags(decompose, o, cli_coeff, cli_init);
  add_output_flags(decompose, o);
  add_threshold_flags(decompose, o);
  decompose->add_option("--mode", o.mode, "scan | minimal (default minimal)")
      ->check(CLI::IsMember({"scan", "minimal"}));
  double c_val = 0.0, d_val = 0.0;
  auto* c_opt = decompose->add_option("--c", c_val, "pin lambda(1)");
  auto* d_opt = decompose->add_option("--d", d_val, "pin lambda(2) (depth 3)");
  decompose->add_flag("--compare-c", o.compare_c, "cross-check two scan constants");
  decompose->add_option("--diagnostics", o.diagnostics, "dominance CSV path");
  decompose->add_option("--main-term", o.main_term_out, "main-term sample CSV path");

  CLI::App* predict = app.add_subcommand("predict", "closed-form first-digit verdict");
  add_spec_flags(predict, o, cli_coeff, cli_init);
  add_output_flags(predict, o);

  CLI::App* mc = app.add_subcommand("montecarlo", "repeated random trials");
  add_spec_flags(mc, o, cli_coeff, cli_init);
  add_output_flags(mc, o);
  add_threshold_flags(mc, o);
  mc->add_option("--trials", o.trials, "number of trials");
  mc->add_option("--mc-mode", o.mc_mode, "chain | sequence")
      ->check(CLI::IsMember({"chain", "sequence"}));
  mc->add_option("--plot-data", o.plot_data, "two-column digit/frequency file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  // CLI11 assigns bound scalars only when the flag appears, which is exactly
  // the file-then-flag precedence; vectors need the explicit merge.
  if (!cli_coeff.empty()) o.coeff = cli_coeff;
  if (!cli_init.empty()) o.init = cli_init;
  for (CLI::App* sub : {gen, analyze, decompose, predict, mc}) {
    if (!sub->parsed()) continue;
    if (sub == decompose) {
      if (c_opt->count() > 0) o.c_pin = c_val;
      if (d_opt->count() > 0) o.d_pin = d_val;
    }
    if (sub->count("--kind") > 0) o.kind_set = true;
  }

  try {
    if (gen->parsed()) return cmd_gen(o);
    if (analyze->parsed()) return cmd_analyze(o);
    if (decompose->parsed()) return cmd_decompose(o);
    if (predict->parsed()) return cmd_predict(o);
    if (mc->parsed()) return cmd_montecarlo(o);
    throw UsageError("no subcommand given");
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
}

}  // namespace benfordseq
