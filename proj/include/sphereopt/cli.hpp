#pragma once

// Command-line front end: polynomial parsing, run configuration, JSON reports.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "definetti.hpp"
#include "reduction.hpp"

namespace sphereopt {

using Json = nlohmann::json;

class ParseError : public std::runtime_error {
public:
  ParseError(std::size_t offset, const std::string& what)
      : std::runtime_error("parse error at offset " + std::to_string(offset) + ": " + what), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

struct ParsedPoly {
  Polynomial poly;
  int n = 0;
};

namespace detail {

class TextParser {
public:
  explicit TextParser(const std::string& s) : s_(s) {}

  /// Terms as (coefficient, variable index -> exponent); indices are 1-based.
  std::vector<std::pair<double, std::map<int, int>>> parse() {
    std::vector<std::pair<double, std::map<int, int>>> out;
    skip();
    if (pos_ == s_.size()) throw ParseError(pos_, "empty polynomial");
    bool first = true;
    while (pos_ < s_.size()) {
      double sign = 1.0;
      if (s_[pos_] == '+' || s_[pos_] == '-') {
        sign = s_[pos_] == '-' ? -1.0 : 1.0;
        ++pos_;
        skip();
      } else if (!first) {
        throw ParseError(pos_, "expected '+' or '-'");
      }
      first = false;
      double coeff = sign;
      std::map<int, int> vars;
      factor(coeff, vars);
      skip();
      while (pos_ < s_.size() && s_[pos_] == '*') {
        ++pos_;
        skip();
        factor(coeff, vars);
        skip();
      }
      out.emplace_back(coeff, std::move(vars));
    }
    return out;
  }

private:
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  int integer(const char* what) {
    std::size_t start = pos_;
    while (pos_ < s_.size() && std::isdigit(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    if (start == pos_) throw ParseError(pos_, std::string("expected ") + what);
    int v = 0;
    auto res = std::from_chars(s_.data() + start, s_.data() + pos_, v);
    if (res.ec != std::errc()) throw ParseError(start, std::string(what) + " out of range");
    return v;
  }

  void factor(double& coeff, std::map<int, int>& vars) {
    if (pos_ == s_.size()) throw ParseError(pos_, "unexpected end of input");
    char c = s_[pos_];
    if (c == 'x' || c == 'X') {
      ++pos_;
      std::size_t at = pos_;
      int idx = integer("variable index");
      if (idx < 1) throw ParseError(at, "variable indices start at 1");
      int e = 1;
      skip();
      if (pos_ < s_.size() && s_[pos_] == '^') {
        ++pos_;
        skip();
        e = integer("exponent");
      }
      vars[idx] += e;
      return;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      std::size_t start = pos_;
      double v = 0;
      auto res = std::from_chars(s_.data() + start, s_.data() + s_.size(), v);
      if (res.ec != std::errc() || !std::isfinite(v)) throw ParseError(start, "malformed number");
      pos_ = static_cast<std::size_t>(res.ptr - s_.data());
      coeff *= v;
      return;
    }
    throw ParseError(pos_, std::string("unexpected character '") + c + "'");
  }

  const std::string& s_;
  std::size_t pos_ = 0;
};

inline void check_explicit_n(std::optional<int> n, int highest) {
  if (n && *n < 1) throw ParseError(0, "n must be >= 1");
  if (n && *n < highest)
    throw ParseError(0, "explicit n = " + std::to_string(*n) + " but variable x" + std::to_string(highest) + " appears");
}

}  // namespace detail

/// Text grammar: `3.5*x1^2*x2 - x3^4`. n is the largest variable index unless given.
inline ParsedPoly parse_poly_text(const std::string& text, std::optional<int> n = std::nullopt) {
  auto terms = detail::TextParser(text).parse();
  int highest = 0;
  for (const auto& [c, vars] : terms)
    if (!vars.empty()) highest = std::max(highest, vars.rbegin()->first);
  detail::check_explicit_n(n, highest);
  const int nv = n ? *n : std::max(highest, 1);
  Polynomial p(nv);
  for (const auto& [c, vars] : terms) {
    std::vector<int> e(static_cast<std::size_t>(nv), 0);
    for (const auto& [idx, pw] : vars) e[static_cast<std::size_t>(idx - 1)] = pw;
    p.add(MultiIndex(std::move(e)), c);
  }
  return {p, nv};
}

/// `{"n":3,"terms":[{"coeff":3.5,"exps":[2,1,0]}]}`; "n" may be omitted.
inline ParsedPoly parse_poly_json(const Json& j, std::optional<int> n = std::nullopt) {
  try {
    if (!j.is_object() || !j.contains("terms") || !j["terms"].is_array())
      throw ParseError(0, "expected an object with a \"terms\" array");
    int width = -1;
    for (const auto& t : j["terms"]) {
      int w = static_cast<int>(t.at("exps").size());
      if (width >= 0 && w != width) throw ParseError(0, "terms have different exponent lengths");
      width = w;
    }
    std::optional<int> given = n;
    if (j.contains("n")) {
      int jn = j["n"].get<int>();
      if (n && *n != jn) throw ParseError(0, "explicit n disagrees with the JSON \"n\"");
      given = jn;
    }
    const int nv = given ? *given : std::max(width, 1);
    if (nv < 1) throw ParseError(0, "n must be >= 1");
    if (width >= 0 && width != nv) throw ParseError(0, "exponent vectors must have length n");
    Polynomial p(nv);
    for (const auto& t : j["terms"]) {
      std::vector<int> e = t.at("exps").get<std::vector<int>>();
      for (int v : e)
        if (v < 0) throw ParseError(0, "negative exponent");
      p.add(MultiIndex(std::move(e)), t.at("coeff").get<double>());
    }
    return {p, nv};
  } catch (const Json::exception& ex) {
    throw ParseError(0, ex.what());
  }
}

/// Dispatches on the first non-blank character: '{' means JSON.
inline ParsedPoly parse_poly(const std::string& text, std::optional<int> n = std::nullopt) {
  std::size_t first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    Json j;
    try {
      j = Json::parse(text);
    } catch (const Json::parse_error& ex) {
      throw ParseError(ex.byte > 0 ? ex.byte - 1 : 0, ex.what());
    }
    return parse_poly_json(j, n);
  }
  return parse_poly_text(text, n);
}

// ---------------------------------------------------------------------------
// Reports

struct LevelReport {
  int n = 0;
  int d = 0;
  int level = 0;
  double nu_ell = 0.0;
  double t_star = 0.0;
  double nu_tilde = 0.0;
  double eps = 0.0;
  bool eps_valid = false;
  double duality_gap = 0.0;
  int iterations = 0;
  std::optional<double> oracle_value;
  std::string reduction = "even-homogenize";
  double gamma = 1.0;
  int lifted_n = 0;
  int lifted_d = 0;
  HomoPoly density;  ///< on the lifted sphere
  double normalization_residual = 0.0;
  std::optional<std::vector<SosTerm>> certificate;
};

namespace detail {

inline Json poly_terms_json(const HomoPoly& p) {
  Json arr = Json::array();
  for (const auto& [e, c] : p.terms()) arr.push_back({{"coeff", c}, {"exps", e.exponents()}});
  return arr;
}

inline HomoPoly poly_from_json(const Json& j) {
  HomoPoly p(j.at("n").get<int>(), j.at("degree").get<int>());
  for (const auto& t : j.at("terms")) p.add(MultiIndex(t.at("exps").get<std::vector<int>>()), t.at("coeff").get<double>());
  return p;
}

inline Json poly_json(const HomoPoly& p) {
  return {{"n", p.n()}, {"degree", p.degree()}, {"terms", poly_terms_json(p)}};
}

inline void write_number(std::string& out, double v) {
  if (!std::isfinite(v)) {
    out += "null";
    return;
  }
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  out += buf;
}

/// Compact JSON with every float at 17 significant digits.
inline void write_json(std::string& out, const Json& j) {
  switch (j.type()) {
    case Json::value_t::object: {
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        out += Json(it.key()).dump();
        out += ':';
        write_json(out, it.value());
      }
      out += '}';
      break;
    }
    case Json::value_t::array: {
      out += '[';
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ',';
        write_json(out, j[i]);
      }
      out += ']';
      break;
    }
    case Json::value_t::number_float:
      write_number(out, j.get<double>());
      break;
    default:
      out += j.dump();
  }
}

}  // namespace detail

inline bool operator==(const HomoPoly& a, const HomoPoly& b) {
  return a.n() == b.n() && a.degree() == b.degree() && a.terms() == b.terms();
}

inline bool operator==(const SosTerm& a, const SosTerm& b) { return a.weight == b.weight && a.poly == b.poly; }

inline bool operator==(const LevelReport& a, const LevelReport& b) {
  return a.n == b.n && a.d == b.d && a.level == b.level && a.nu_ell == b.nu_ell && a.t_star == b.t_star &&
         a.nu_tilde == b.nu_tilde && a.eps == b.eps && a.eps_valid == b.eps_valid && a.duality_gap == b.duality_gap &&
         a.iterations == b.iterations && a.oracle_value == b.oracle_value && a.reduction == b.reduction &&
         a.gamma == b.gamma && a.lifted_n == b.lifted_n && a.lifted_d == b.lifted_d && a.density == b.density &&
         a.normalization_residual == b.normalization_residual && a.certificate == b.certificate;
}

inline Json to_json(const LevelReport& r) {
  Json j = {{"n", r.n},
            {"d", r.d},
            {"level", r.level},
            {"nu_ell", r.nu_ell},
            {"nu_tilde", r.nu_tilde},
            {"t_star", r.t_star},
            {"eps", r.eps},
            {"eps_valid", r.eps_valid},
            {"duality_gap", r.duality_gap},
            {"iterations", r.iterations},
            {"reduction", r.reduction},
            {"gamma", r.gamma},
            {"lifted_n", r.lifted_n},
            {"lifted_d", r.lifted_d},
            {"measure", {{"density", detail::poly_json(r.density)}, {"normalization_residual", r.normalization_residual}}}};
  if (r.oracle_value) j["oracle_value"] = *r.oracle_value;
  if (r.certificate) {
    Json c = Json::array();
    for (const auto& t : *r.certificate) c.push_back({{"weight", t.weight}, {"poly", detail::poly_json(t.poly)}});
    j["certificate"] = c;
  }
  return j;
}

inline LevelReport level_report_from_json(const Json& j) {
  LevelReport r;
  r.n = j.at("n").get<int>();
  r.d = j.at("d").get<int>();
  r.level = j.at("level").get<int>();
  r.nu_ell = j.at("nu_ell").get<double>();
  r.nu_tilde = j.at("nu_tilde").get<double>();
  r.t_star = j.at("t_star").get<double>();
  r.eps = j.at("eps").get<double>();
  r.eps_valid = j.at("eps_valid").get<bool>();
  r.duality_gap = j.at("duality_gap").get<double>();
  r.iterations = j.at("iterations").get<int>();
  r.reduction = j.at("reduction").get<std::string>();
  r.gamma = j.at("gamma").get<double>();
  r.lifted_n = j.at("lifted_n").get<int>();
  r.lifted_d = j.at("lifted_d").get<int>();
  r.density = detail::poly_from_json(j.at("measure").at("density"));
  r.normalization_residual = j.at("measure").at("normalization_residual").get<double>();
  if (j.contains("oracle_value")) r.oracle_value = j["oracle_value"].get<double>();
  if (j.contains("certificate")) {
    std::vector<SosTerm> c;
    for (const auto& t : j["certificate"]) c.push_back({t.at("weight").get<double>(), detail::poly_from_json(t.at("poly"))});
    r.certificate = std::move(c);
  }
  return r;
}

/// One line, no trailing newline.
inline std::string serialize_report(const LevelReport& r) {
  std::string out;
  detail::write_json(out, to_json(r));
  return out;
}

inline LevelReport parse_report(const std::string& line) { return level_report_from_json(Json::parse(line)); }

inline std::string format_text(const LevelReport& r) {
  std::ostringstream os;
  os.precision(12);
  os << "level " << r.level << " (n=" << r.n << ", d=" << r.d << ", " << r.reduction;
  if (r.reduction == "odd-lift") os << ", gamma=" << r.gamma;
  os << ")\n";
  os << "  upper bound nu_ell   = " << r.nu_ell << "\n";
  os << "  lower bound nu_tilde = " << r.nu_tilde << "\n";
  if (r.oracle_value) os << "  oracle value         = " << *r.oracle_value << "\n";
  os << "  eps = " << r.eps << (r.eps_valid ? "" : " (level below the theorem's hypothesis)") << "\n";
  os << "  duality gap = " << r.duality_gap << " after " << r.iterations << " iterations\n";
  if (r.certificate) {
    os << "  SOS certificate (" << r.certificate->size() << " squares):\n";
    for (const auto& t : *r.certificate) os << "    " << t.weight << " * (" << t.poly.to_string() << ")^2\n";
  }
  return os.str();
}

// ---------------------------------------------------------------------------
// Running

enum class OutputFormat { json, text };

struct RunConfig {
  std::optional<std::string> poly;
  std::optional<std::string> input_path;
  std::optional<int> n;
  std::optional<std::pair<int, int>> levels;  ///< inclusive range
  double tol = 1e-8;
  bool oracle = false;
  int restarts = 50;
  std::uint64_t seed = 0;
  OutputFormat format = OutputFormat::json;
  bool certificate = false;
};

enum ExitCode : int { kExitOk = 0, kExitParse = 2, kExitSolver = 3, kExitResource = 4 };

/// "7" or "2..5".
inline std::pair<int, int> parse_level_range(const std::string& s) {
  auto to_int = [&](std::string_view v) {
    int x = 0;
    auto res = std::from_chars(v.data(), v.data() + v.size(), x);
    if (res.ec != std::errc() || res.ptr != v.data() + v.size() || v.empty())
      throw std::invalid_argument("bad level '" + s + "'");
    return x;
  };
  std::string_view sv(s);
  auto dots = sv.find("..");
  std::pair<int, int> r = dots == std::string_view::npos ? std::pair{to_int(sv), to_int(sv)}
                                                        : std::pair{to_int(sv.substr(0, dots)), to_int(sv.substr(dots + 2))};
  if (r.first > r.second) throw std::invalid_argument("empty level range '" + s + "'");
  return r;
}

/// Smallest l >= a with eps(a,l,n) <= 1/2, lowered to the largest l whose p fits the resource cap.
inline int default_level(int a, int n, std::size_t max_p = configured_max_p()) {
  int l = a;
  while (definetti_eps(a, l, n).value > 0.5) ++l;
  while (l > a && sym_dimension(n, l) > max_p) --l;
  return l;
}

struct CanonicalProblem {
  HomoPoly T;
  ReductionRecord record;
};

/// Homogenizes (padding with powers of r^2) and lifts odd degrees.
inline CanonicalProblem canonicalize(const Polynomial& P) {
  if (P.is_zero()) throw std::invalid_argument("the polynomial is zero");
  bool any_odd = false, any_even = false;
  for (const auto& [e, c] : P.terms()) (e.degree() % 2 ? any_odd : any_even) = true;
  if (any_odd && any_even) throw std::invalid_argument("monomials of both odd and even degree are not supported");
  const int top = P.max_degree();
  if (top == 0) throw std::invalid_argument("the polynomial is constant");
  if (any_even) {
    if (P.n() < 2) throw std::invalid_argument("n must be >= 2 for even-degree input");
    auto [T, rec] = homogenize_even(P);
    return {T, rec};
  }
  HomoPoly H(P.n(), top);
  for (const auto& [e, c] : P.terms()) {
    HomoPoly mono(P.n(), e.degree());
    mono.add(e, c);
    H = H + multiply_r2(mono, (top - e.degree()) / 2);
  }
  auto [T, rec] = lift_odd(H);
  return {T, rec};
}

inline LevelReport make_level_report(const BoundsReport& lifted, const ReductionRecord& rec, bool certificate, double tol) {
  BoundsReport b = pullback_bounds(lifted, rec);
  LevelReport r;
  r.n = b.n;
  r.d = b.d;
  r.level = b.level;
  r.nu_ell = b.nu_ell;
  r.t_star = b.t_star;
  r.nu_tilde = b.nu_tilde;
  r.eps = b.eps;
  r.eps_valid = b.eps_valid;
  r.duality_gap = b.duality_gap;
  r.iterations = b.iterations;
  r.oracle_value = b.oracle_value;
  r.reduction = to_string(rec.kind);
  r.gamma = rec.gamma;
  r.lifted_n = rec.lifted_n;
  r.lifted_d = rec.lifted_d;
  r.density = b.measure.density;
  r.normalization_residual = b.measure.normalization_residual;
  if (certificate) r.certificate = extract_sos_certificate(lifted.solution, tol);
  return r;
}

/// Runs every requested level; reports go to `out` in ascending level order, diagnostics to `err`.
inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err,
               const SdpSolver& solver = InteriorPointSolver()) {
  std::string text;
  if (cfg.poly && cfg.input_path) {
    err << "error: give either --poly or --input, not both\n";
    return kExitParse;
  }
  if (cfg.poly) {
    text = *cfg.poly;
  } else if (cfg.input_path) {
    std::ifstream in(*cfg.input_path);
    if (!in) {
      err << "error: cannot read " << *cfg.input_path << "\n";
      return kExitParse;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    text = ss.str();
  } else {
    err << "error: no polynomial given (use --poly or --input)\n";
    return kExitParse;
  }

  CanonicalProblem prob;
  std::pair<int, int> levels;
  try {
    ParsedPoly parsed = parse_poly(text, cfg.n);
    prob = canonicalize(parsed.poly);
    const int a = prob.T.degree() / 2;
    levels = cfg.levels ? *cfg.levels : std::pair{0, 0};
    if (!cfg.levels) levels.first = levels.second = default_level(a, prob.T.n());
    if (levels.first < a)
      throw std::invalid_argument("level " + std::to_string(levels.first) + " is below the minimum " + std::to_string(a));
    if (!(cfg.tol >= 1e-10 && cfg.tol <= 1e-2)) throw std::invalid_argument("--tol must lie in [1e-10, 1e-2]");
    if (cfg.restarts < 1) throw std::invalid_argument("--restarts must be >= 1");
  } catch (const ParseError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitParse;
  } catch (const std::invalid_argument& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitParse;
  }

  std::optional<OracleOptions> oracle;
  if (cfg.oracle) {
    OracleOptions o;
    o.restarts = cfg.restarts;
    o.seed = cfg.seed;
    oracle = o;
  }

  std::vector<std::future<LevelReport>> jobs;
  for (int l = levels.first; l <= levels.second; ++l)
    jobs.push_back(std::async(std::launch::async, [&, l] {
      return make_level_report(sandwich_report(prob.T, l, cfg.tol, oracle, solver), prob.record, cfg.certificate, cfg.tol);
    }));

  for (auto& job : jobs) {
    try {
      LevelReport r = job.get();
      out << (cfg.format == OutputFormat::json ? serialize_report(r) + "\n" : format_text(r));
      out.flush();
    } catch (const ResourceLimitError& ex) {
      err << "error: " << ex.what() << "\n";
      return kExitResource;
    } catch (const SolverError& ex) {
      err << "error: " << ex.what() << "\n";
      return kExitSolver;
    } catch (const std::exception& ex) {
      err << "error: " << ex.what() << "\n";
      return kExitSolver;
    }
  }
  return kExitOk;
}

}  // namespace sphereopt
