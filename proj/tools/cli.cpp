#include "cfdim/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cfdim/cantor.hpp"
#include "cfdim/cf_core.hpp"
#include "cfdim/error.hpp"
#include "cfdim/exact.hpp"
#include "cfdim/exponents.hpp"
#include "cfdim/parallel.hpp"
#include "cfdim/runlength.hpp"
#include "cfdim/theorems.hpp"

namespace cfdim::cli {

int exit_code_for(ErrorKind k) {
  switch (k) {
    case ErrorKind::Parse: return kParseError;
    case ErrorKind::BudgetExceeded:
    case ErrorKind::NoConvergence: return kBudgetError;
    default: return kRangeError;
  }
}

namespace {

// ---------------------------------------------------------------- helpers

std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

Json num_or_null(double x) { return std::isfinite(x) ? Json(x) : Json(nullptr); }

const Json& field(const Json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) fail(ErrorKind::Parse, std::string("config is missing '") + key + "'");
  return *it;
}

std::string get_str(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_string()) fail(ErrorKind::Parse, std::string("config field '") + key + "' must be a string");
  return v.get<std::string>();
}

std::uint64_t get_u64(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number_unsigned()) fail(ErrorKind::Parse, std::string("config field '") + key + "' must be a non-negative integer");
  return v.get<std::uint64_t>();
}

double get_f64(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_number()) fail(ErrorKind::Parse, std::string("config field '") + key + "' must be a number");
  return v.get<double>();
}

bool get_bool(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_boolean()) fail(ErrorKind::Parse, std::string("config field '") + key + "' must be a boolean");
  return v.get<bool>();
}

std::vector<std::uint64_t> get_u64_list(const Json& j, const char* key) {
  const Json& v = field(j, key);
  if (!v.is_array()) fail(ErrorKind::Parse, std::string("config field '") + key + "' must be an array");
  std::vector<std::uint64_t> out;
  for (const auto& e : v) {
    if (!e.is_number_unsigned()) fail(ErrorKind::Parse, std::string("config field '") + key + "' must hold integers");
    out.push_back(e.get<std::uint64_t>());
  }
  return out;
}

Json digits_json(std::span<const Digit> d) {
  Json a = Json::array();
  for (Digit x : d) a.push_back(x);
  return a;
}

Json estimate_json(const DimEstimate& e) {
  Json j;
  j["value"] = e.value;
  j["lo"] = e.lo;
  j["hi"] = e.hi;
  j["method"] = e.method;
  j["degenerate"] = e.degenerate;
  j["n_used"] = e.n_used;
  j["B_used"] = e.B_used;
  j["residual"] = num_or_null(e.residual);
  j["aitken"] = num_or_null(e.aitken);
  Json t = Json::array();
  for (const auto& p : e.trace) t.push_back(Json::array({p.param, p.value}));
  j["trace"] = std::move(t);
  return j;
}

// ---------------------------------------------------------------- inputs

// Real-number or digit-list input shared by expand, exponents and runlength.
struct LoadedInput {
  DigitSeq seq;
  std::string source;
};

RealInput real_input(const Json& in) {
  const std::string kind = get_str(in, "kind");
  const std::string value = get_str(in, "value");
  if (kind == "rational") return parse_rational_input(value);
  if (kind == "surd") {
    const mpq_class d = parse_exact(value);
    if (d.get_den() != 1) fail(ErrorKind::Parse, "--surd expects an integer, got '" + value + "'");
    return surd_fractional_sqrt(d.get_num());
  }
  if (kind == "sqrt") return parse_surd_input(value);
  if (kind == "decimal") return DecimalInput{value, static_cast<unsigned long>(get_u64(in, "bits"))};
  fail(ErrorKind::Parse, "input kind '" + kind + "' is not a real-number input");
}

Digits parse_digit_text(std::istream& is, const std::string& what) {
  Digits d;
  std::string tok;
  while (is >> tok) {
    for (char& c : tok)
      if (c == ',') c = ' ';
    std::istringstream parts(tok);
    std::string t;
    while (parts >> t) {
      Digit v = 0;
      auto r = std::from_chars(t.data(), t.data() + t.size(), v);
      if (r.ec != std::errc() || r.ptr != t.data() + t.size() || v == 0)
        fail(ErrorKind::Parse, what + ": bad digit '" + t + "'");
      d.push_back(v);
    }
  }
  return d;
}

LoadedInput load_input(const Json& in, std::uint64_t n) {
  const std::string kind = get_str(in, "kind");
  LoadedInput out;
  out.source = kind;
  if (kind == "file") {
    const std::string path = get_str(in, "value");
    const std::uint64_t line_no = get_u64(in, "line");
    std::ifstream f(path);
    if (!f) fail(ErrorKind::Parse, "cannot open digits file '" + path + "'");
    std::string line;
    std::uint64_t seen = 0;
    bool found = false;
    while (std::getline(f, line)) {
      if (line.empty() || line[0] == '#') continue;
      if (++seen == line_no) { found = true; break; }
    }
    if (!found) fail(ErrorKind::InputOutOfRange, "digits file has no line " + std::to_string(line_no));
    std::istringstream is(line);
    out.seq = make_digits(parse_digit_text(is, path));
  } else if (kind == "digits") {
    std::istringstream is(get_str(in, "value"));
    out.seq = make_digits(parse_digit_text(is, "--digits"));
  } else {
    out.seq = expand(real_input(in), n);
    return out;
  }
  if (out.seq.digits.empty()) fail(ErrorKind::InputOutOfRange, "empty digit sequence");
  return out;
}

// ---------------------------------------------------------------- commands

Outcome make_outcome(const Json& config, Json result) {
  Outcome o;
  o.document["schema"] = kSchema;
  o.document["command"] = config.at("command");
  o.document["config"] = config;
  o.document["result"] = std::move(result);
  return o;
}

Outcome cmd_expand(const Json& cfg) {
  const Json& p = field(cfg, "params");
  const std::uint64_t n = get_u64(p, "n");
  DigitSeq d = expand(real_input(field(p, "input")), n);
  ContinuantTable ct = continuants(d);
  Json conv = Json::array(), ints = Json::array();
  std::ostringstream csv;
  csv << "n,digit,p,q,length,log_length\n";
  for (std::size_t k = 1; k <= d.size(); ++k) {
    const long kl = static_cast<long>(k);
    conv.push_back({{"k", k}, {"p", to_string(ct.p(kl))}, {"q", to_string(ct.q(kl))}});
    mpz_class qq = ct.q(kl) * (ct.q(kl) + ct.q(kl - 1));
    mpq_class len(mpz_class(1), qq);
    mpq_class a(ct.p(kl), ct.q(kl));
    mpq_class b(ct.p(kl) + ct.p(kl - 1), ct.q(kl) + ct.q(kl - 1));
    a.canonicalize();
    b.canonicalize();
    const double log_len = -log_of(qq, MPFR_RNDN, 64).to_double();
    Json iv;
    iv["n"] = k;
    iv["left"] = to_string(a < b ? a : b);
    iv["right"] = to_string(a < b ? b : a);
    iv["length"] = to_string(len);
    iv["length_float"] = nearest_double(len);
    iv["log_length"] = log_len;
    ints.push_back(std::move(iv));
    csv << k << ',' << d[k - 1] << ',' << to_string(ct.p(kl)) << ',' << to_string(ct.q(kl)) << ','
        << to_string(len) << ',' << num(log_len) << '\n';
  }
  Json r;
  r["source"] = to_string(d.source);
  r["exhausted"] = d.exhausted;
  r["digits"] = digits_json(d.span());
  r["convergents"] = std::move(conv);
  r["intervals"] = std::move(ints);
  Outcome o = make_outcome(cfg, std::move(r));
  o.csv = csv.str();
  return o;
}

// --- dim

const std::vector<std::string>& dim_kinds() {
  static const std::vector<std::string> k = {"U_set", "E_hat",      "E_joint", "nu_level", "FG", "F",
                                             "s",     "predim_hat", "predim_s", "limit"};
  return k;
}

bool is_theorem_kind(const std::string& k) {
  return k == "U_set" || k == "E_hat" || k == "E_joint" || k == "nu_level" || k == "FG" || k == "F";
}

// Parameters each kind reads, beyond "kind".
std::vector<std::string> dim_param_names(const std::string& kind) {
  if (kind == "U_set" || kind == "E_hat") return {"nu_hat", "i", "B"};
  if (kind == "E_joint") return {"nu_hat", "nu", "i", "B"};
  if (kind == "nu_level") return {"nu", "i", "B"};
  if (kind == "FG") return {"alpha", "beta", "B"};
  if (kind == "F") return {"alpha", "B"};
  if (kind == "s") return {"alpha", "i", "B"};
  if (kind == "predim_hat" || kind == "predim_s") return {"alpha", "i", "B", "n", "method"};
  if (kind == "limit") return {"alpha", "i", "B", "n_schedule", "predim", "extrapolation"};
  fail(ErrorKind::Parse, "unknown dim kind '" + kind + "'");
}

Method parse_method(const std::string& s) {
  if (s == "enumerate") return Method::Enumerate;
  if (s == "spectral") return Method::Spectral;
  if (s == "auto") return Method::Auto;
  fail(ErrorKind::Parse, "unknown method '" + s + "'");
}

Json dim_point(const Json& p, const SolverOptions& opts) {
  const std::string kind = get_str(p, "kind");
  if (is_theorem_kind(kind)) {
    TheoremParams tp;
    if (p.contains("nu_hat")) tp.nu_hat = parse_ext_param(get_str(p, "nu_hat"));
    if (p.contains("nu")) tp.nu = parse_ext_param(get_str(p, "nu"));
    if (p.contains("alpha")) tp.alpha = parse_param(get_str(p, "alpha"));
    if (p.contains("beta")) tp.beta = parse_param(get_str(p, "beta"));
    if (p.contains("i")) tp.i = get_u64(p, "i");
    TheoremResult r = theorem_dims(parse_theorem_kind(kind), tp, get_u64(p, "B"), opts);
    Json j = estimate_json(r.estimate);
    j["branch"] = r.branch;
    j["argument"] = r.argument ? Json(to_string(*r.argument)) : Json(nullptr);
    return j;
  }
  const mpq_class alpha = parse_param(get_str(p, "alpha"));
  const Digit i = get_u64(p, "i");
  const std::uint64_t B = get_u64(p, "B");
  if (kind == "s") {
    if (B == 0) return estimate_json(dim_full(alpha, i, default_B_schedule(), opts));
    return estimate_json(spectral_dim(B, alpha, i, opts));
  }
  if (kind == "limit") {
    const std::string pk = get_str(p, "predim");
    const std::string ex = get_str(p, "extrapolation");
    if (pk != "hat" && pk != "s") fail(ErrorKind::Parse, "predim must be 'hat' or 's'");
    if (ex != "richardson" && ex != "aitken") fail(ErrorKind::Parse, "extrapolation must be 'richardson' or 'aitken'");
    return estimate_json(dim_limit(B, alpha, i, get_u64_list(p, "n_schedule"), opts,
                                   pk == "hat" ? PredimKind::Hat : PredimKind::S,
                                   ex == "richardson" ? Extrapolation::Richardson : Extrapolation::Aitken));
  }
  DimQuery q{B, alpha, i, get_u64(p, "n"), parse_method(get_str(p, "method"))};
  return estimate_json(kind == "predim_hat" ? predim_hat(q, opts) : predim_s(q, opts));
}

struct CurveSpec {
  std::string param;
  std::vector<mpq_class> xs;
};

bool integer_param(const std::string& name) { return name == "B" || name == "i" || name == "n"; }

CurveSpec parse_curve(const std::string& text) {
  const auto eq = text.find('=');
  const auto dots = text.find("..");
  if (eq == std::string::npos || dots == std::string::npos || dots < eq)
    fail(ErrorKind::Parse, "curve must look like 'param=lo..hi[:step]'");
  CurveSpec c;
  c.param = text.substr(0, eq);
  static const std::vector<std::string> ok = {"B", "i", "n", "alpha", "beta", "nu", "nu_hat"};
  if (std::find(ok.begin(), ok.end(), c.param) == ok.end())
    fail(ErrorKind::Parse, "cannot sweep '" + c.param + "'");
  const auto colon = text.find(':', dots);
  const mpq_class lo = parse_exact(text.substr(eq + 1, dots - eq - 1));
  const mpq_class hi = parse_exact(text.substr(dots + 2, colon == std::string::npos ? std::string::npos : colon - dots - 2));
  mpq_class step = integer_param(c.param) ? mpq_class(1) : mpq_class((hi - lo) / 10);
  if (colon != std::string::npos) step = parse_exact(text.substr(colon + 1));
  if (hi < lo) fail(ErrorKind::OutOfRange, "curve needs lo <= hi");
  if (step <= 0) {
    if (hi != lo) fail(ErrorKind::OutOfRange, "curve step must be positive");
    step = 1;
  }
  for (mpq_class x = lo; x <= hi; x += step) {
    if (integer_param(c.param) && x.get_den() != 1) fail(ErrorKind::OutOfRange, c.param + " must be an integer");
    if (x < 0) fail(ErrorKind::OutOfRange, "curve values must be >= 0");
    c.xs.push_back(x);
    if (c.xs.size() > 1000) fail(ErrorKind::OutOfRange, "curve has more than 1000 points");
  }
  return c;
}

Outcome cmd_dim(const Json& cfg, const SolverOptions& opts) {
  const Json& p = field(cfg, "params");
  const std::string curve = p.contains("curve") ? get_str(p, "curve") : std::string();
  if (curve.empty()) {
    Json r = dim_point(p, opts);
    Outcome o = make_outcome(cfg, r);
    o.csv = "param,value,lo,hi\n," + num(r["value"].get<double>()) + ',' + num(r["lo"].get<double>()) +
            ',' + num(r["hi"].get<double>()) + '\n';
    return o;
  }
  CurveSpec c = parse_curve(curve);
  const auto names = dim_param_names(get_str(p, "kind"));
  if (std::find(names.begin(), names.end(), c.param) == names.end())
    fail(ErrorKind::Parse, "kind " + get_str(p, "kind") + " has no parameter '" + c.param + "'");
  Json rows = Json::array();
  std::ostringstream csv;
  csv << "param,value,lo,hi\n";
  for (const auto& x : c.xs) {
    Json q = p;
    if (integer_param(c.param)) q[c.param] = x.get_num().get_ui();
    else q[c.param] = to_string(x);
    Json r = dim_point(q, opts);
    Json row;
    row["x"] = nearest_double(x);
    row["x_exact"] = to_string(x);
    row["value"] = r["value"];
    row["lo"] = r["lo"];
    row["hi"] = r["hi"];
    row["method"] = r["method"];
    csv << num(nearest_double(x)) << ',' << num(r["value"].get<double>()) << ',' << num(r["lo"].get<double>())
        << ',' << num(r["hi"].get<double>()) << '\n';
    rows.push_back(std::move(row));
  }
  Json res;
  res["curve"] = {{"param", c.param}, {"columns", {"param", "value", "lo", "hi"}}, {"rows", std::move(rows)}};
  Outcome o = make_outcome(cfg, std::move(res));
  o.csv = csv.str();
  return o;
}

// --- cantor

Outcome cmd_cantor(const Json& cfg, const SolverOptions& opts) {
  const Json& p = field(cfg, "params");
  const std::string recipe = get_str(p, "recipe");
  const std::uint64_t B = get_u64(p, "B");
  const Digit i = get_u64(p, "i");
  const std::size_t depth_k = get_u64(p, "depth_k");
  const std::uint64_t n_samples = get_u64(p, "sample");
  const std::uint64_t emit = get_u64(p, "emit_digits");
  const bool do_insert = get_bool(p, "insert");
  const std::string digits_file = get_str(p, "digits_file");
  const std::uint64_t seed = get_u64(cfg, "seed");

  CantorSpec spec;
  std::optional<mpq_class> xi;
  if (recipe == "finite") {
    const mpq_class w = parse_param(get_str(p, "nu_hat"));
    const mpq_class v = parse_param(get_str(p, "nu"));
    spec = make_cantor_spec(B, i, construct_sequences(w, v), get_u64(p, "d"));
    if (v > w) xi = joint_argument(w, v);
  } else if (recipe == "infinite") {
    spec = make_cantor_spec_infinite(i, construct_sequences_infinite(parse_param(get_str(p, "nu_hat"))));
  } else if (recipe == "runlength") {
    const mpq_class a = parse_param(get_str(p, "alpha"));
    const mpq_class b = parse_param(get_str(p, "beta"));
    spec = make_cantor_spec(B, i, construct_sequences_runlength(a, b), get_u64(p, "d"));
    if (b > a) xi = fg_argument(a, b);
  } else {
    fail(ErrorKind::Parse, "unknown recipe '" + recipe + "'");
  }
  if (depth_k < 1 || depth_k > segment_count(spec))
    fail(ErrorKind::OutOfRange, "depth_k must lie in [1, " + std::to_string(segment_count(spec)) + "]");

  const SeqPair& sq = spec.seq;
  Json seq;
  seq["recipe"] = sq.recipe;
  Json params = Json::object();
  for (const auto& [k, v] : sq.params) params[k] = v;
  seq["params"] = std::move(params);
  seq["n"] = sq.n;
  seq["m"] = sq.m;
  if (spec.per_block_bounds) {
    Json b = Json::array();
    for (std::size_t k = 0; k < std::min<std::size_t>(sq.bounds.size(), depth_k + 1); ++k)
      b.push_back(to_string(sq.bounds[k]));
    seq["bounds"] = std::move(b);
  }

  CantorMeasure mu(spec, opts);
  Json segs = Json::array();
  std::ostringstream csv;
  csv << "k,start,free_end,end,s_tilde\n";
  for (std::size_t k = 1; k <= depth_k; ++k) {
    const SegmentModel& sm = mu.segment(k);
    const SegmentBounds& sb = sm.bounds();
    segs.push_back({{"k", k}, {"start", sb.start}, {"free_end", sb.free_end}, {"end", sb.end},
                    {"alphabet", sm.alphabet()}, {"s_tilde", sm.s()}, {"method", sm.s_method()}});
    csv << k << ',' << sb.start << ',' << sb.free_end << ',' << sb.end << ',' << num(sm.s()) << '\n';
  }

  Json res;
  res["sequences"] = std::move(seq);
  res["segments"] = std::move(segs);
  if (xi && *xi < 1 && !spec.per_block_bounds) {
    DimEstimate e = spectral_dim(B, *xi, i, opts);
    res["reference"] = {{"xi", to_string(*xi)}, {"s", e.value}, {"lo", e.lo}, {"hi", e.hi}};
  }

  const std::uint64_t depth = sq.m[depth_k - 1];
  std::ofstream df;
  if (!digits_file.empty()) {
    df.open(digits_file);
    if (!df) fail(ErrorKind::InputOutOfRange, "cannot write digits file '" + digits_file + "'");
  }
  Json samples = Json::array();
  for (std::uint64_t s = 0; s < n_samples; ++s) {
    SampleResult sr = sample_measure(mu, depth, seed, s);
    check_admissible(spec, sr.digits);
    Json j;
    j["index"] = s;
    j["restarts"] = sr.restarts;
    j["length"] = sr.digits.size();
    j["admissible"] = true;
    j["head"] = digits_json(std::span<const Digit>(sr.digits).first(std::min<std::size_t>(emit, sr.digits.size())));
    Json ld = Json::array();
    for (std::size_t k = 1; k <= depth_k; ++k) {
      const std::uint64_t mk = sq.m[k - 1];
      ld.push_back(Json::array({k, mk, mu.local_dimension(std::span<const Digit>(sr.digits).first(mk))}));
    }
    j["local_dimension_columns"] = {"k", "depth", "value"};
    j["local_dimension"] = std::move(ld);
    const Digits* out_digits = &sr.digits;
    InsertResult ir;
    if (do_insert) {
      ir = insert_map(spec, sr.digits);
      j["insert"] = {{"length", ir.digits.size()}, {"markers", ir.marked.size()}, {"density", ir.density}};
      out_digits = &ir.digits;
    }
    if (df.is_open()) {
      for (std::size_t k = 0; k < out_digits->size(); ++k) df << (k ? " " : "") << (*out_digits)[k];
      df << '\n';
    }
    samples.push_back(std::move(j));
  }
  res["depth"] = depth;
  res["samples"] = std::move(samples);
  Outcome o = make_outcome(cfg, std::move(res));
  o.csv = csv.str();
  return o;
}

// --- exponents / runlength

Outcome cmd_exponents(const Json& cfg) {
  const Json& p = field(cfg, "params");
  LoadedInput in = load_input(field(p, "input"), get_u64(p, "n"));
  const Digit i = get_u64(p, "target_i");
  if (i < 1) fail(ErrorKind::InputOutOfRange, "target digit must be >= 1");
  std::uint64_t N = get_u64(p, "N");
  if (N == 0 || N > in.seq.size()) N = in.seq.size();
  BlockDecomposition bd = decompose(std::span<const Digit>(in.seq.digits).first(N), i);
  Json recs = Json::array();
  std::ostringstream csv;
  csv << "k,n,m,length\n";
  for (std::size_t k = 0; k < bd.record_blocks.size(); ++k) {
    const auto& b = bd.record_blocks[k];
    recs.push_back(Json::array({b.n, b.m}));
    csv << k + 1 << ',' << b.n << ',' << b.m << ',' << b.length() << '\n';
  }
  ExponentEstimate ee = exponent_estimates(bd, N);
  Json res;
  res["source"] = in.source;
  res["scanned"] = bd.scanned;
  res["raw_blocks"] = bd.raw_blocks.size();
  res["records"] = std::move(recs);
  res["estimates"] = {{"nu_hat", ee.nu_hat_est}, {"nu", ee.nu_est}, {"k_used", ee.k_used},
                      {"k_total", ee.k_total}, {"N", N}};
  const std::string hit = get_str(p, "hit_nu_hat");
  if (!hit.empty()) {
    HitCheck hc = uniform_hit_check(in.seq, target(i), N, parse_param(hit));
    res["hit_check"] = {{"nu_hat", to_string(parse_param(hit))},
                        {"result", to_string(hc.result)},
                        {"best_m", hc.best_m},
                        {"log_threshold", hc.log_threshold},
                        {"log_upper", hc.log_upper},
                        {"log_lower", hc.log_lower}};
  }
  Outcome o = make_outcome(cfg, std::move(res));
  o.csv = csv.str();
  return o;
}

std::vector<std::uint64_t> checkpoints(std::uint64_t n_max) {
  std::vector<std::uint64_t> out;
  for (std::uint64_t dec = 1; dec <= n_max; dec *= 10) {
    for (std::uint64_t f : {1, 2, 5})
      if (dec * f <= n_max) out.push_back(dec * f);
    if (dec > n_max / 10) break;
  }
  if (out.empty() || out.back() != n_max) out.push_back(n_max);
  return out;
}

Outcome cmd_runlength(const Json& cfg) {
  const Json& p = field(cfg, "params");
  LoadedInput in = load_input(field(p, "input"), get_u64(p, "n"));
  RunProfile rp = run_profile(in.seq);
  RatioEstimate re = ratio_estimates(rp, get_f64(p, "tail_fraction"));
  std::uint64_t longest = 0;
  for (const auto& b : rp.blocks) longest = std::max(longest, b.length);
  Json series = Json::array();
  std::ostringstream csv;
  csv << "n,R_n,ratio\n";
  for (std::uint64_t n : checkpoints(rp.n_max)) {
    const double ratio = static_cast<double>(rp.at(n)) / static_cast<double>(n);
    series.push_back(Json::array({n, rp.at(n), ratio}));
    csv << n << ',' << rp.at(n) << ',' << num(ratio) << '\n';
  }
  Json res;
  res["source"] = in.source;
  res["n_max"] = rp.n_max;
  res["runs"] = rp.blocks.size();
  res["longest"] = longest;
  res["estimates"] = {{"liminf", re.liminf_est}, {"limsup", re.limsup_est}, {"k_min", re.k_min}};
  res["series_columns"] = {"n", "R_n", "R_n/n"};
  res["series"] = std::move(series);
  Outcome o = make_outcome(cfg, std::move(res));
  o.csv = csv.str();
  return o;
}

// --- verify

McBounds load_bounds(const std::string& path) {
  McBounds b;
  if (path.empty()) return b;
  std::ifstream f(path);
  if (!f) fail(ErrorKind::Parse, "cannot open bounds file '" + path + "'");
  Json j;
  try {
    j = Json::parse(f);
  } catch (const Json::exception& e) {
    fail(ErrorKind::Parse, path + ": " + e.what());
  }
  const Json& bj = j.contains("bounds") ? j["bounds"] : j;
  auto set = [&](const char* key, double& dst) {
    if (bj.contains(key)) dst = bj[key].get<double>();
  };
  set("runlength_mean_lo", b.runlength_mean_lo);
  set("runlength_mean_hi", b.runlength_mean_hi);
  set("trend_slack", b.trend_slack);
  set("nu_threshold", b.nu_threshold);
  set("nu_fraction_max", b.nu_fraction_max);
  set("fraction_slack", b.fraction_slack);
  return b;
}

Outcome cmd_verify(const Json& cfg, const SolverOptions& opts) {
  const Json& p = field(cfg, "params");
  const std::string suite = get_str(p, "suite");
  McConfig mc;
  mc.seed = get_u64(cfg, "seed");
  mc.samples = get_u64(p, "samples");
  mc.n_digits = get_u64(p, "n_digits");
  const std::string mode = get_str(p, "mode");
  if (mode != "chain" && mode != "decimal") fail(ErrorKind::Parse, "mode must be 'chain' or 'decimal'");
  mc.mode = mode == "chain" ? McMode::Chain : McMode::Decimal;
  const McBounds bounds = load_bounds(get_str(p, "bounds"));

  std::vector<Report> reports;
  const bool all = suite == "all";
  bool known = all;
  if (all || suite == "lemmas" || suite == "exact") {
    reports.push_back(lemma_suite(mc.seed, get_u64(p, "instances")));
    known = true;
  }
  if (all || suite == "closed_form" || suite == "exact") {
    reports.push_back(closed_form_suite());
    known = true;
  }
  if (all || suite == "solver") {
    reports.push_back(solver_crosscheck(opts));
    known = true;
  }
  if (all || suite == "mc_runlength") {
    reports.push_back(mc_runlength(mc, bounds));
    known = true;
  }
  if (all || suite == "mc_nu_zero") {
    reports.push_back(mc_nu_zero(mc, get_u64(p, "i"), bounds));
    known = true;
  }
  if (!known) fail(ErrorKind::Parse, "unknown suite '" + suite + "'");

  Json arr = Json::array();
  std::string csv;
  bool ok = true;
  for (const auto& r : reports) {
    arr.push_back(r.to_json());
    csv += r.to_csv();
    ok = ok && r.ok();
  }
  Json res;
  res["ok"] = ok;
  res["reports"] = std::move(arr);
  Outcome o = make_outcome(cfg, std::move(res));
  o.csv = std::move(csv);
  o.status = ok ? kOk : kCheckFailed;
  return o;
}

// ---------------------------------------------------------------- argv front end

struct Globals {
  unsigned long precision = 256;
  std::uint64_t node_budget = kDefaultNodeBudget;
  int threads = 0;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string output;
};

struct InputFlags {
  std::string rational, surd, sqrt, decimal, file, digits;
  std::uint64_t bits = 256;
  std::uint64_t line = 1;
};

void add_input_flags(CLI::App* sub, InputFlags& f, bool allow_digit_lists) {
  auto* g = sub->add_option_group("input", "exactly one input");
  g->add_option("--rational", f.rational, "rational p/q");
  g->add_option("--surd", f.surd, "integer d, expands sqrt(d) - floor(sqrt(d))");
  g->add_option("--sqrt", f.sqrt, "quadratic surd sqrt:d,u,v,w = (u + v sqrt d)/w");
  g->add_option("--decimal", f.decimal, "decimal string, certified to --bits");
  if (allow_digit_lists) {
    g->add_option("--input", f.file, "digits file (whitespace separated, one sequence per line)");
    g->add_option("--digits", f.digits, "comma separated digits");
  }
  g->require_option(1);
  sub->add_option("--bits", f.bits, "precision budget for --decimal")->capture_default_str();
  if (allow_digit_lists) sub->add_option("--line", f.line, "line of the digits file")->capture_default_str();
}

Json input_config(const InputFlags& f) {
  Json j;
  if (!f.rational.empty()) j = {{"kind", "rational"}, {"value", f.rational}};
  else if (!f.surd.empty()) j = {{"kind", "surd"}, {"value", f.surd}};
  else if (!f.sqrt.empty()) j = {{"kind", "sqrt"}, {"value", f.sqrt}};
  else if (!f.decimal.empty()) j = {{"kind", "decimal"}, {"value", f.decimal}, {"bits", f.bits}};
  else if (!f.file.empty()) j = {{"kind", "file"}, {"value", f.file}, {"line", f.line}};
  else j = {{"kind", "digits"}, {"value", f.digits}};
  return j;
}

// Normalised parameter strings keep the echo canonical.
std::string norm_param(const std::string& s) { return to_string(parse_param(s)); }
std::string norm_ext(const std::string& s) { return to_string(parse_ext_param(s)); }

int emit(const Outcome& o, const std::string& output, std::ostream& out, std::ostream& err) {
  const std::string text = render(o);
  if (output.empty()) {
    out << text;
  } else {
    std::ofstream f(output);
    if (!f) {
      err << "error: cannot write '" << output << "'\n";
      return kRangeError;
    }
    f << text;
  }
  return o.status;
}

}  // namespace

std::string render(const Outcome& o) {
  const Json& cfg = o.document.at("config");
  const std::string fmt = cfg.contains("format") ? cfg["format"].get<std::string>() : "json";
  if (fmt == "csv" && !o.csv.empty()) return o.csv;
  return o.document.dump(2) + "\n";
}

Outcome execute(const Json& config) {
  const std::string cmd = get_str(config, "command");
  const std::string fmt = get_str(config, "format");
  if (fmt != "json" && fmt != "csv") fail(ErrorKind::Parse, "format must be 'json' or 'csv'");
  const std::uint64_t prec = get_u64(config, "precision");
  if (prec < 64 || prec > (1u << 20)) fail(ErrorKind::OutOfRange, "precision must lie in [64, 2^20] bits");
  get_u64(config, "seed");
  set_default_precision(static_cast<mpfr_prec_t>(prec));
  SolverOptions opts;
  opts.node_budget = get_u64(config, "node_budget");
  if (cmd == "expand") return cmd_expand(config);
  if (cmd == "dim") return cmd_dim(config, opts);
  if (cmd == "cantor") return cmd_cantor(config, opts);
  if (cmd == "exponents") return cmd_exponents(config);
  if (cmd == "runlength") return cmd_runlength(config);
  if (cmd == "verify") return cmd_verify(config, opts);
  fail(ErrorKind::Parse, "unknown command '" + cmd + "'");
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Continued-fraction exponent sets: expansions, dimensions, Cantor samples, checks"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--precision", g.precision, "MPFR precision in bits")->capture_default_str();
  app.add_option("--node-budget", g.node_budget, "DFS node budget per partition sum")->capture_default_str();
  app.add_option("--threads", g.threads, "OpenMP threads (0: runtime default; CFDIM_THREADS overrides)")
      ->capture_default_str();
  app.add_option("--seed", g.seed, "random seed")->capture_default_str();
  app.add_option("--format", g.format, "output format")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
  app.add_option("--output,-o", g.output, "write output to this file instead of stdout");

  Json params;

  // expand
  InputFlags ex_in;
  std::uint64_t ex_n = 20;
  auto* ex = app.add_subcommand("expand", "continued-fraction digits, convergents and cylinders");
  add_input_flags(ex, ex_in, false);
  ex->add_option("--n", ex_n, "number of digits")->capture_default_str();

  // dim
  std::string d_kind, d_nu_hat, d_nu, d_alpha, d_beta, d_curve, d_method = "enumerate", d_predim = "hat",
                      d_extra = "richardson";
  std::uint64_t d_i = 1, d_B = 0, d_n = 12;
  std::vector<std::uint64_t> d_sched = default_n_schedule();
  auto* dm = app.add_subcommand("dim", "dimension values and curves");
  dm->add_option("--kind", d_kind, "set or solver quantity")->required()->check(CLI::IsMember(dim_kinds()));
  auto* o_nu_hat = dm->add_option("--nu-hat", d_nu_hat, "uniform exponent (rational or inf)");
  auto* o_nu = dm->add_option("--nu", d_nu, "asymptotic exponent (rational or inf)");
  auto* o_alpha = dm->add_option("--alpha", d_alpha, "alpha (rational or decimal)");
  auto* o_beta = dm->add_option("--beta", d_beta, "beta (rational or decimal)");
  dm->add_option("--i", d_i, "target digit")->capture_default_str();
  dm->add_option("--B", d_B, "alphabet bound; 0 extrapolates B to infinity")->capture_default_str();
  dm->add_option("--n", d_n, "prefix length for predim_hat / predim_s")->capture_default_str();
  dm->add_option("--method", d_method, "predim method")->check(CLI::IsMember({"enumerate", "spectral", "auto"}))
      ->capture_default_str();
  dm->add_option("--n-schedule", d_sched, "n values for kind=limit")->delimiter(',')->capture_default_str();
  dm->add_option("--predim", d_predim, "pre-dimension used by kind=limit")->check(CLI::IsMember({"hat", "s"}))
      ->capture_default_str();
  dm->add_option("--extrapolation", d_extra, "kind=limit extrapolation")
      ->check(CLI::IsMember({"richardson", "aitken"}))->capture_default_str();
  dm->add_option("--curve", d_curve, "sweep: param=lo..hi[:step]");

  // cantor
  std::string c_nu_hat, c_nu, c_alpha, c_beta, c_digits_file;
  std::uint64_t c_B = 3, c_i = 1, c_d = 0, c_depth = 8, c_samples = 1, c_emit = 64;
  bool c_insert = false;
  auto* ca = app.add_subcommand("cantor", "Cantor-type subsets, their measure and samples");
  auto* oc_nu_hat = ca->add_option("--nu-hat", c_nu_hat, "uniform exponent");
  auto* oc_nu = ca->add_option("--nu", c_nu, "asymptotic exponent (rational or inf)");
  auto* oc_alpha = ca->add_option("--alpha", c_alpha, "run-length recipe alpha");
  auto* oc_beta = ca->add_option("--beta", c_beta, "run-length recipe beta");
  ca->add_option("--B", c_B, "free-digit bound")->capture_default_str();
  ca->add_option("--i", c_i, "target digit")->capture_default_str();
  ca->add_option("--d", c_d, "marker digit for --insert; 0 picks max(B, i) + 1")->capture_default_str();
  ca->add_option("--depth-k", c_depth, "sample to depth m_k")->capture_default_str();
  ca->add_option("--sample", c_samples, "number of samples")->capture_default_str();
  ca->add_option("--emit-digits", c_emit, "leading digits printed per sample")->capture_default_str();
  ca->add_flag("--insert", c_insert, "apply the marker insertion map to samples");
  ca->add_option("--digits-file", c_digits_file, "write every sample's digits, one line each");

  // exponents
  InputFlags e_in;
  std::uint64_t e_i = 1, e_N = 0, e_n = 10000;
  std::string e_hit;
  auto* ep = app.add_subcommand("exponents", "block decomposition and exponent estimates");
  add_input_flags(ep, e_in, true);
  ep->add_option("--target-i", e_i, "target digit")->capture_default_str();
  ep->add_option("--N", e_N, "horizon (0: whole sequence)")->capture_default_str();
  ep->add_option("--n", e_n, "digits to expand for real inputs")->capture_default_str();
  ep->add_option("--hit-nu-hat", e_hit, "also run the certified hit check at this exponent");

  // runlength
  InputFlags r_in;
  std::uint64_t r_n = 10000;
  double r_tail = 0.5;
  auto* rl = app.add_subcommand("runlength", "longest-run profile R_n");
  add_input_flags(rl, r_in, true);
  rl->add_option("--n", r_n, "digits to expand for real inputs")->capture_default_str();
  rl->add_option("--tail-fraction", r_tail, "window for the ratio estimates")->capture_default_str();

  // verify
  std::string v_suite = "exact", v_mode = "chain", v_bounds;
  std::uint64_t v_samples = 200, v_n_digits = 1000000, v_instances = 10000, v_i = 1;
  auto* vf = app.add_subcommand("verify", "property suites and Monte Carlo checks");
  vf->add_option("--suite", v_suite, "suite")
      ->check(CLI::IsMember({"lemmas", "closed_form", "exact", "solver", "mc_runlength", "mc_nu_zero", "all"}))
      ->capture_default_str();
  vf->add_option("--instances", v_instances, "random instances for the lemma suite")->capture_default_str();
  vf->add_option("--samples", v_samples, "Monte Carlo samples")->capture_default_str();
  vf->add_option("--n-digits", v_n_digits, "Monte Carlo horizon")->capture_default_str();
  vf->add_option("--mode", v_mode, "Monte Carlo digit source")->check(CLI::IsMember({"chain", "decimal"}))
      ->capture_default_str();
  vf->add_option("--i", v_i, "target digit for mc_nu_zero")->capture_default_str();
  vf->add_option("--bounds", v_bounds, "JSON file with Monte Carlo bounds (pilot fixture)");

  // replay
  std::string replay_file;
  auto* rp = app.add_subcommand("replay", "re-run a command from a previous JSON output or config");
  rp->add_option("file", replay_file, "JSON output or config file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (g.threads > 0) set_threads(g.threads);
    Json cfg;
    if (rp->parsed()) {
      std::ifstream f(replay_file);
      if (!f) fail(ErrorKind::Parse, "cannot open '" + replay_file + "'");
      Json j;
      try {
        j = Json::parse(f);
      } catch (const Json::exception& e) {
        fail(ErrorKind::Parse, replay_file + ": " + e.what());
      }
      if (j.contains("config")) {
        if (!j.contains("schema") || j["schema"] != kSchema) fail(ErrorKind::Parse, "unsupported schema");
        j = j["config"];
      }
      return emit(execute(j), g.output, out, err);
    }
    cfg["command"] = app.get_subcommands().front()->get_name();
    cfg["precision"] = g.precision;
    cfg["node_budget"] = g.node_budget;
    cfg["seed"] = g.seed;
    cfg["format"] = g.format;
    Json p;
    if (ex->parsed()) {
      p["input"] = input_config(ex_in);
      p["n"] = ex_n;
    } else if (dm->parsed()) {
      p["kind"] = d_kind;
      const auto need = dim_param_names(d_kind);
      auto wants = [&](const char* name) { return std::find(need.begin(), need.end(), name) != need.end(); };
      auto take = [&](const char* name, CLI::Option* opt, const std::string& v, bool ext) {
        if (!wants(name)) {
          if (opt->count()) fail(ErrorKind::Parse, std::string("--") + opt->get_name().substr(2) + " does not apply to kind " + d_kind);
          return;
        }
        const bool swept = !d_curve.empty() && d_curve.rfind(std::string(name) + "=", 0) == 0;
        if (!opt->count()) {
          if (swept) return;
          fail(ErrorKind::Parse, "kind " + d_kind + " needs " + opt->get_name());
        }
        p[name] = ext ? norm_ext(v) : norm_param(v);
      };
      take("nu_hat", o_nu_hat, d_nu_hat, true);
      take("nu", o_nu, d_nu, true);
      take("alpha", o_alpha, d_alpha, false);
      take("beta", o_beta, d_beta, false);
      if (wants("i")) p["i"] = d_i;
      if (wants("B")) p["B"] = d_B;
      if (wants("n")) p["n"] = d_n;
      if (wants("method")) p["method"] = d_method;
      if (wants("n_schedule")) p["n_schedule"] = d_sched;
      if (wants("predim")) p["predim"] = d_predim;
      if (wants("extrapolation")) p["extrapolation"] = d_extra;
      if (!d_curve.empty()) p["curve"] = d_curve;
      if ((d_kind == "limit" || d_kind == "predim_hat" || d_kind == "predim_s") && d_B == 0 &&
          d_curve.rfind("B=", 0) != 0)
        fail(ErrorKind::OutOfRange, "kind " + d_kind + " needs a finite --B");
    } else if (ca->parsed()) {
      const bool rl_recipe = oc_alpha->count() || oc_beta->count();
      if (rl_recipe) {
        if (!oc_alpha->count() || !oc_beta->count() || oc_nu->count() || oc_nu_hat->count())
          fail(ErrorKind::Parse, "give either --nu-hat/--nu or --alpha/--beta");
        p["recipe"] = "runlength";
        p["alpha"] = norm_param(c_alpha);
        p["beta"] = norm_param(c_beta);
      } else {
        if (!oc_nu_hat->count() || !oc_nu->count()) fail(ErrorKind::Parse, "cantor needs --nu-hat and --nu");
        const ExtRational v = parse_ext_param(c_nu);
        p["recipe"] = v.infinite ? "infinite" : "finite";
        p["nu_hat"] = norm_param(c_nu_hat);
        if (!v.infinite) p["nu"] = to_string(v.value);
      }
      p["B"] = c_B;
      p["i"] = c_i;
      p["d"] = c_d;
      p["depth_k"] = c_depth;
      p["sample"] = c_samples;
      p["emit_digits"] = c_emit;
      p["insert"] = c_insert;
      p["digits_file"] = c_digits_file;
    } else if (ep->parsed()) {
      p["input"] = input_config(e_in);
      p["n"] = e_n;
      p["target_i"] = e_i;
      p["N"] = e_N;
      p["hit_nu_hat"] = e_hit.empty() ? e_hit : norm_param(e_hit);
    } else if (rl->parsed()) {
      p["input"] = input_config(r_in);
      p["n"] = r_n;
      p["tail_fraction"] = r_tail;
    } else if (vf->parsed()) {
      p["suite"] = v_suite;
      p["instances"] = v_instances;
      p["samples"] = v_samples;
      p["n_digits"] = v_n_digits;
      p["mode"] = v_mode;
      p["i"] = v_i;
      p["bounds"] = v_bounds;
    }
    cfg["params"] = std::move(p);
    return emit(execute(cfg), g.output, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const Json::exception& e) {
    err << "error: Parse: " << e.what() << '\n';
    return kParseError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRangeError;
  }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("cfdim");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace cfdim::cli
