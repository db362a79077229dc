#include "greedylab/io.hpp"

#include "greedylab/errors.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

namespace greedylab::io {

namespace {

const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) {
    throw FormatError(std::string("missing field '") + key + "'");
  }
  return j.at(key);
}

double number(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number()) throw FormatError(std::string("field '") + key + "' must be a number");
  return v.get<double>();
}

long long integer(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_number_integer()) {
    throw FormatError(std::string("field '") + key + "' must be an integer");
  }
  return v.get<long long>();
}

std::string text(const json& j, const char* key) {
  const json& v = require(j, key);
  if (!v.is_string()) throw FormatError(std::string("field '") + key + "' must be a string");
  return v.get<std::string>();
}

Vector vector_from_json(const json& j, const char* what) {
  if (!j.is_array()) throw FormatError(std::string(what) + " must be an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " must be an array of numbers");
    v[static_cast<Index>(i)] = j[i].get<double>();
  }
  return v;
}

json vector_to_json(const Eigen::Ref<const Vector>& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

// Rebuilds domain objects, turning constructor validation failures into
// format errors.
template <typename F>
auto guarded(const char* what, F&& build) {
  try {
    return build();
  } catch (const std::invalid_argument& e) {
    throw FormatError(std::string(what) + ": " + e.what());
  }
}

}  // namespace

std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string geometry_tag(const Geometry& geometry) {
  if (geometry.is_hilbert()) return "hilbert";
  std::ostringstream os;
  os << "lp:" << geometry.p();
  return os.str();
}

json to_json(const Geometry& geometry) {
  return {{"kind", geometry.is_hilbert() ? "hilbert" : "lp"},
          {"p", geometry.is_hilbert() ? json(nullptr) : json(geometry.p())}};
}

Geometry geometry_from_json(const json& j, Index n) {
  const std::string kind = text(j, "kind");
  return guarded("geometry", [&] {
    if (kind == "hilbert") return Geometry::hilbert(n);
    if (kind == "lp") return Geometry::lp(number(j, "p"), n);
    throw FormatError("unknown geometry kind '" + kind + "'");
  });
}

json to_json(const Dictionary& dict) {
  json atoms = json::array();
  for (Index k = 0; k < dict.size(); ++k) atoms.push_back(vector_to_json(dict.atom(k)));
  json geo = to_json(dict.geometry());
  return {{"label", dict.label()},
          {"kind", geo["kind"]},
          {"p", geo["p"]},
          {"n", dict.dim()},
          {"atoms", std::move(atoms)}};
}

Dictionary dictionary_from_json(const json& j) {
  const Index n = integer(j, "n");
  const Geometry geometry = geometry_from_json(j, n);
  const json& rows = require(j, "atoms");
  if (!rows.is_array() || rows.empty()) throw FormatError("atoms must be a non-empty array");
  Matrix atoms(n, static_cast<Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const Vector atom = vector_from_json(rows[k], "atom");
    if (atom.size() != n) {
      throw FormatError("atom " + std::to_string(k) + " has length " + std::to_string(atom.size()) +
                        ", expected " + std::to_string(n));
    }
    atoms.col(static_cast<Index>(k)) = atom;
  }
  const std::string label = j.contains("label") ? text(j, "label") : std::string("dictionary");
  return guarded("dictionary", [&] { return Dictionary(geometry, std::move(atoms), label); });
}

json to_json(const A1Target& target) {
  json coeffs = json::array();
  for (const auto& [k, c] : target.coeffs) coeffs.push_back({{"index", k}, {"value", c}});
  json geo = to_json(target.f.geometry());
  return {{"kind", geo["kind"]},
          {"p", geo["p"]},
          {"n", target.f.dim()},
          {"M", target.M},
          {"f", vector_to_json(target.f.coords())},
          {"coeffs", std::move(coeffs)}};
}

A1Target target_from_json(const json& j) {
  const Index n = integer(j, "n");
  const Geometry geometry = geometry_from_json(j, n);
  const double M = number(j, "M");
  if (!(M > 0.0) || !std::isfinite(M)) throw FormatError("target: M must be positive");
  Vector f = vector_from_json(require(j, "f"), "f");
  std::map<Index, double> coeffs;
  if (j.contains("coeffs")) {
    for (const json& c : require(j, "coeffs")) {
      coeffs[static_cast<Index>(integer(c, "index"))] = number(c, "value");
    }
  }
  return guarded("target", [&] {
    return A1Target{Element(geometry, std::move(f)), std::move(coeffs), M};
  });
}

json to_json(const WeaknessSequence& ts) {
  switch (ts.kind()) {
    case WeaknessSequence::Kind::Constant:
      return {{"kind", "constant"}, {"t", ts.c()}};
    case WeaknessSequence::Kind::PowerLaw:
      return {{"kind", "power_law"}, {"c", ts.c()}, {"alpha", ts.alpha()}};
    case WeaknessSequence::Kind::Explicit:
      return {{"kind", "explicit"}, {"values", ts.values()}};
  }
  return nullptr;
}

WeaknessSequence weakness_from_json(const json& j) {
  const std::string kind = text(j, "kind");
  return guarded("weakness", [&] {
    if (kind == "constant") return WeaknessSequence::constant(number(j, "t"));
    if (kind == "power_law") {
      return WeaknessSequence::power_law(number(j, "c"), number(j, "alpha"));
    }
    if (kind == "explicit") {
      const Vector v = vector_from_json(require(j, "values"), "values");
      return WeaknessSequence::explicit_values(std::vector<double>(v.begin(), v.end()));
    }
    throw FormatError("unknown weakness kind '" + kind + "'");
  });
}

std::string describe(const WeaknessSequence& ts) {
  std::ostringstream os;
  switch (ts.kind()) {
    case WeaknessSequence::Kind::Constant:
      os << "constant(" << ts.c() << ")";
      break;
    case WeaknessSequence::Kind::PowerLaw:
      os << "power_law(" << ts.c() << ";" << ts.alpha() << ")";
      break;
    case WeaknessSequence::Kind::Explicit: {
      os << "explicit(";
      for (std::size_t i = 0; i < ts.values().size(); ++i) os << (i ? ";" : "") << ts.values()[i];
      os << ")";
      break;
    }
  }
  return os.str();
}

json to_json(const RunTrace& trace, std::optional<double> certified_M) {
  json records = json::array();
  for (const IterationRecord& r : trace.records) {
    records.push_back({{"m", r.m},
                       {"atom_index", r.atom_index},
                       {"dual_value", r.dual_value},
                       {"lambda", r.lambda},
                       {"s", r.s},
                       {"error", r.error},
                       {"sup_dual", r.sup_dual}});
  }
  json out = {{"algorithm", std::string(to_string(trace.algorithm))},
              {"geometry", to_json(trace.geometry)},
              {"n", trace.geometry.dim()},
              {"stop_reason", std::string(to_string(trace.stop_reason))},
              {"target_norm", trace.target_norm},
              {"final_approx", vector_to_json(trace.final_approx.coords())},
              {"records", std::move(records)}};
  if (trace.weakness) out["weakness"] = to_json(*trace.weakness);
  if (certified_M) out["certified_M"] = *certified_M;
  return out;
}

RunTrace trace_from_json(const json& j) {
  const std::string name = text(j, "algorithm");
  const auto algorithm = parse_algorithm(name);
  if (!algorithm) throw FormatError("unknown algorithm '" + name + "'");
  const std::string stop = text(j, "stop_reason");
  const auto reason = parse_stop_reason(stop);
  if (!reason) throw FormatError("unknown stop_reason '" + stop + "'");

  std::optional<Vector> final_approx;
  if (j.contains("final_approx")) final_approx = vector_from_json(j.at("final_approx"), "final_approx");
  Index n = 0;
  if (j.contains("n")) {
    n = integer(j, "n");
  } else if (final_approx) {
    n = final_approx->size();
  } else {
    throw FormatError("trace needs 'n' or 'final_approx'");
  }
  const Geometry geometry = geometry_from_json(require(j, "geometry"), n);
  if (final_approx && final_approx->size() != n) throw FormatError("final_approx length != n");

  std::vector<IterationRecord> records;
  int previous = 0;
  for (const json& r : require(j, "records")) {
    IterationRecord rec{static_cast<int>(integer(r, "m")),
                        static_cast<Index>(integer(r, "atom_index")),
                        number(r, "dual_value"),
                        number(r, "lambda"),
                        number(r, "s"),
                        number(r, "error"),
                        number(r, "sup_dual")};
    if (rec.m <= previous) throw FormatError("records must have increasing m");
    if (!(rec.error >= 0.0)) throw FormatError("record error must be >= 0");
    previous = rec.m;
    records.push_back(rec);
  }
  const double target_norm = j.contains("target_norm") ? number(j, "target_norm")
                                                       : std::numeric_limits<double>::quiet_NaN();
  std::optional<WeaknessSequence> weakness;
  if (j.contains("weakness")) weakness = weakness_from_json(j.at("weakness"));

  return guarded("trace", [&] {
    return RunTrace{*algorithm,
                    geometry,
                    std::move(records),
                    Element(geometry, final_approx ? *final_approx : Vector::Zero(n)),
                    *reason,
                    target_norm,
                    weakness};
  });
}

std::optional<double> trace_certified_M(const json& j) {
  if (!j.contains("certified_M")) return std::nullopt;
  return number(j, "certified_M");
}

std::string trace_to_csv(const RunTrace& trace) {
  std::string out = "m,atom_index,dual_value,lambda,s,error,sup_dual\n";
  for (const IterationRecord& r : trace.records) {
    out += std::to_string(r.m) + ',' + std::to_string(r.atom_index) + ',' +
           format_double(r.dual_value) + ',' + format_double(r.lambda) + ',' +
           format_double(r.s) + ',' + format_double(r.error) + ',' + format_double(r.sup_dual) +
           '\n';
  }
  return out;
}

json to_json(const BoundReport& report) {
  return {{"theorem", std::string(to_string(report.theorem))},
          {"satisfied", report.satisfied},
          {"margin", std::isfinite(report.margin) ? json(report.margin) : json(nullptr)},
          {"worst_m", report.worst_m}};
}

json to_json(const RateFit& fit) {
  return {{"slope", fit.slope},
          {"intercept", fit.intercept},
          {"r2", fit.r2},
          {"m_range", {fit.m_range.first, fit.m_range.second}}};
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json_file(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  try {
    return json::parse(content);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    if (!out.flush()) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace greedylab::io
