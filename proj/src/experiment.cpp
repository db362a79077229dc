#include "greedylab/experiment.hpp"

#include "greedylab/analysis.hpp"
#include "greedylab/errors.hpp"
#include "greedylab/io.hpp"
#include "greedylab/random.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>
#include <tuple>

namespace greedylab {

namespace {

using io::json;

// Maps every key path ("dictionary.n", "algorithms[1].name") to the line on
// which it appears, so schema errors can point into the file.
class LineIndex {
 public:
  explicit LineIndex(const std::string& text) { scan(text); }

  int line_of(std::string path) const {
    while (true) {
      if (auto it = lines_.find(path); it != lines_.end()) return it->second;
      const auto cut = path.find_last_of(".[");
      if (cut == std::string::npos || cut == 0) return path.empty() ? 0 : lookup_root(path);
      path.resize(cut);
    }
  }

 private:
  int lookup_root(const std::string& path) const {
    const auto it = lines_.find(path);
    return it == lines_.end() ? 0 : it->second;
  }

  struct Frame {
    bool object = false;
    std::string path;
    int index = 0;
    std::string key;
    bool expect_key = true;
    bool pending_element = true;
  };

  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  std::string child_path(const Frame& top) const {
    return top.object ? join(top.path, top.key) : top.path + "[" + std::to_string(top.index) + "]";
  }

  void mark_value(std::vector<Frame>& stack, int line) {
    if (stack.empty()) return;
    Frame& top = stack.back();
    if (!top.object && top.pending_element) {
      lines_.emplace(child_path(top), line);
      top.pending_element = false;
    }
  }

  void scan(const std::string& text) {
    std::vector<Frame> stack;
    int line = 1;
    for (std::size_t i = 0; i < text.size(); ++i) {
      const char c = text[i];
      if (c == '\n') {
        ++line;
      } else if (c == '"') {
        std::string s;
        for (++i; i < text.size() && text[i] != '"'; ++i) {
          if (text[i] == '\\' && i + 1 < text.size()) ++i;
          s += text[i];
        }
        if (!stack.empty() && stack.back().object && stack.back().expect_key) {
          Frame& top = stack.back();
          top.key = s;
          top.expect_key = false;
          lines_.emplace(join(top.path, s), line);
        } else {
          mark_value(stack, line);
        }
      } else if (c == '{' || c == '[') {
        mark_value(stack, line);
        std::string path = stack.empty() ? std::string() : child_path(stack.back());
        Frame frame;
        frame.object = c == '{';
        frame.path = std::move(path);
        stack.push_back(std::move(frame));
      } else if (c == '}' || c == ']') {
        if (!stack.empty()) stack.pop_back();
      } else if (c == ',') {
        if (!stack.empty()) {
          Frame& top = stack.back();
          if (top.object) {
            top.expect_key = true;
          } else {
            ++top.index;
            top.pending_element = true;
          }
        }
      } else if (c != ':' && c != ' ' && c != '\t' && c != '\r') {
        mark_value(stack, line);
      }
    }
  }

  std::map<std::string, int> lines_;
};

int line_of_offset(const std::string& text, std::size_t offset) {
  offset = std::min(offset, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<long>(offset), '\n'));
}

class ConfigReader {
 public:
  explicit ConfigReader(const std::string& text) : lines_(text) {}

  [[noreturn]] void fail(const std::string& path, const std::string& message) const {
    throw ConfigError(path.empty() ? message : path + ": " + message, lines_.line_of(path));
  }

  const json& object(const json& parent, const std::string& path, const char* key,
                     bool required = true) const {
    static const json kNull;
    if (!parent.contains(key)) {
      if (required) fail(path, std::string("missing required key '") + key + "'");
      return kNull;
    }
    const json& v = parent.at(key);
    if (!v.is_object()) fail(sub(path, key), "must be an object");
    return v;
  }

  void allow(const json& obj, const std::string& path, std::initializer_list<const char*> keys) const {
    for (const auto& item : obj.items()) {
      const bool known =
          std::any_of(keys.begin(), keys.end(), [&](const char* k) { return item.key() == k; });
      if (!known) fail(sub(path, item.key()), "unknown key '" + item.key() + "'");
    }
  }

  void forbid(const json& obj, const std::string& path, std::initializer_list<const char*> keys,
              const std::string& why) const {
    for (const char* k : keys) {
      if (obj.contains(k)) fail(sub(path, k), "key '" + std::string(k) + "' " + why);
    }
  }

  double number(const json& obj, const std::string& path, const char* key) const {
    require(obj, path, key);
    const json& v = obj.at(key);
    if (!v.is_number()) fail(sub(path, key), "must be a number");
    return v.get<double>();
  }

  long long integer(const json& obj, const std::string& path, const char* key) const {
    require(obj, path, key);
    const json& v = obj.at(key);
    if (!v.is_number_integer()) fail(sub(path, key), "must be an integer");
    return v.get<long long>();
  }

  std::uint64_t seed(const json& obj, const std::string& path, const char* key) const {
    require(obj, path, key);
    const json& v = obj.at(key);
    if (!v.is_number_unsigned()) fail(sub(path, key), "must be a non-negative integer");
    return v.get<std::uint64_t>();
  }

  std::string text(const json& obj, const std::string& path, const char* key) const {
    require(obj, path, key);
    const json& v = obj.at(key);
    if (!v.is_string()) fail(sub(path, key), "must be a string");
    return v.get<std::string>();
  }

  void require(const json& obj, const std::string& path, const char* key) const {
    if (!obj.contains(key)) fail(path, std::string("missing required key '") + key + "'");
  }

  static std::string sub(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }

 private:
  LineIndex lines_;
};

std::optional<std::uint64_t> derive_if(std::optional<std::uint64_t> top, std::uint64_t stream) {
  if (!top) return std::nullopt;
  return derive_seed(*top, stream);
}

AlgorithmSpec parse_algorithm_spec(const ConfigReader& rd, const json& j, const std::string& path,
                                   bool hilbert) {
  if (!j.is_object()) rd.fail(path, "must be an object");
  rd.allow(j, path, {"name", "params", "ts"});
  const std::string name = rd.text(j, path, "name");
  const json& params = rd.object(j, path, "params", false);
  const std::string ppath = ConfigReader::sub(path, "params");

  AlgorithmSpec spec{Algorithm::RpgaHilbert, std::nullopt, 1e-12, {}};
  if (name == "rpga") {
    spec.algorithm = hilbert ? Algorithm::RpgaHilbert : Algorithm::RpgaBanach;
  } else if (name == "wrpga") {
    spec.algorithm = hilbert ? Algorithm::WrpgaHilbert : Algorithm::WrpgaBanach;
  } else if (name == "pga") {
    spec.algorithm = Algorithm::PgaHilbert;
  } else if (name == "oga") {
    spec.algorithm = Algorithm::OgaHilbert;
  } else if (name == "rga") {
    spec.algorithm = Algorithm::RgaClassic;
  } else if (auto parsed = parse_algorithm(name)) {
    spec.algorithm = *parsed;
  } else {
    rd.fail(ConfigReader::sub(path, "name"), "unknown algorithm '" + name + "'");
  }

  const bool banach =
      spec.algorithm == Algorithm::RpgaBanach || spec.algorithm == Algorithm::WrpgaBanach;
  if (banach == hilbert) {
    rd.fail(ConfigReader::sub(path, "name"),
            "algorithm '" + name + "' does not run in " + (hilbert ? "Hilbert" : "l_p") +
                " geometry");
  }

  const bool rga = spec.algorithm == Algorithm::RgaClassic || spec.algorithm == Algorithm::RgaOptimized;
  if (!params.is_null()) {
    if (rga) {
      rd.allow(params, ppath, {"variant"});
    } else if (banach) {
      rd.allow(params, ppath, {"ls_tol"});
    } else {
      rd.allow(params, ppath, {});
    }
    if (params.contains("variant")) {
      const std::string variant = rd.text(params, ppath, "variant");
      if (variant == "classic") {
        spec.algorithm = Algorithm::RgaClassic;
      } else if (variant == "optimized") {
        spec.algorithm = Algorithm::RgaOptimized;
      } else {
        rd.fail(ConfigReader::sub(ppath, "variant"), "must be 'classic' or 'optimized'");
      }
    }
    if (params.contains("ls_tol")) {
      spec.ls_tol = rd.number(params, ppath, "ls_tol");
      if (!(spec.ls_tol > 0.0)) rd.fail(ConfigReader::sub(ppath, "ls_tol"), "must be positive");
    }
  }

  const bool weak =
      spec.algorithm == Algorithm::WrpgaHilbert || spec.algorithm == Algorithm::WrpgaBanach;
  const std::string tpath = ConfigReader::sub(path, "ts");
  if (weak) {
    const json& ts = rd.object(j, path, "ts");
    rd.allow(ts, tpath, {"kind", "t", "c", "alpha", "values"});
    try {
      spec.ts = io::weakness_from_json(ts);
    } catch (const FormatError& e) {
      rd.fail(tpath, e.what());
    }
  } else if (j.contains("ts")) {
    rd.fail(tpath, "only weak algorithms take a weakness sequence");
  }

  spec.display_name = std::string(to_string(spec.algorithm));
  if (spec.ts) spec.display_name += "[" + io::describe(*spec.ts) + "]";
  return spec;
}

}  // namespace

std::optional<std::uint64_t> seed_from_environment() {
  const char* raw = std::getenv("GREEDYLAB_SEED");
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  errno = 0;
  char* end = nullptr;
  const unsigned long long v = std::strtoull(raw, &end, 10);
  if (errno != 0 || *end != '\0' || raw[0] == '-') {
    throw ConfigError(std::string("GREEDYLAB_SEED is not a non-negative integer: ") + raw, 0);
  }
  return static_cast<std::uint64_t>(v);
}

ExperimentConfig parse_config(const std::string& text,
                              std::optional<std::uint64_t> seed_override) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("parse error: ") + e.what(), line_of_offset(text, e.byte));
  }
  const ConfigReader rd(text);
  if (!root.is_object()) rd.fail("", "config must be a JSON object");
  rd.allow(root, "", {"seed", "geometry", "dictionary", "targets", "algorithms", "m_max", "eps",
                      "output"});

  ExperimentConfig cfg;
  std::optional<std::uint64_t> top_seed;
  if (root.contains("seed")) top_seed = rd.seed(root, "", "seed");
  if (seed_override) top_seed = seed_override;

  // geometry
  const json& geo = rd.object(root, "", "geometry");
  rd.allow(geo, "geometry", {"kind", "p"});
  cfg.geometry.kind = rd.text(geo, "geometry", "kind");
  if (cfg.geometry.kind == "lp") {
    cfg.geometry.p = rd.number(geo, "geometry", "p");
    if (!(cfg.geometry.p > 1.0) || !std::isfinite(cfg.geometry.p)) {
      rd.fail("geometry.p", "must satisfy 1 < p < inf");
    }
  } else if (cfg.geometry.kind == "hilbert") {
    rd.forbid(geo, "geometry", {"p"}, "is only valid for kind 'lp'");
  } else {
    rd.fail("geometry.kind", "must be 'hilbert' or 'lp'");
  }
  const bool hilbert = cfg.geometry.kind == "hilbert";

  // dictionary
  const json& dict = rd.object(root, "", "dictionary");
  rd.allow(dict, "dictionary", {"generator", "n", "K", "count", "seed", "atoms", "path"});
  auto& ds = cfg.dictionary;
  ds.generator = rd.text(dict, "dictionary", "generator");
  const auto read_n = [&] {
    ds.n = rd.integer(dict, "dictionary", "n");
    if (ds.n < 1) rd.fail("dictionary.n", "must be >= 1");
  };
  const auto read_seed = [&] {
    if (dict.contains("seed")) {
      ds.seed = rd.seed(dict, "dictionary", "seed");
    } else if (auto s = derive_if(top_seed, 1)) {
      ds.seed = *s;
    } else {
      rd.fail("dictionary", "generator '" + ds.generator + "' needs a seed (dictionary.seed or top-level seed)");
    }
  };
  const std::string unused = "is not used by generator '" + ds.generator + "'";
  if (ds.generator == "orthonormal") {
    rd.forbid(dict, "dictionary", {"K", "count", "seed", "atoms", "path"}, unused);
    read_n();
  } else if (ds.generator == "random_unit") {
    rd.forbid(dict, "dictionary", {"count", "atoms", "path"}, unused);
    read_n();
    ds.K = rd.integer(dict, "dictionary", "K");
    if (ds.K < ds.n) rd.fail("dictionary.K", "must be >= n for a spanning dictionary");
    read_seed();
  } else if (ds.generator == "union_bases") {
    rd.forbid(dict, "dictionary", {"K", "atoms", "path"}, unused);
    read_n();
    ds.count = rd.integer(dict, "dictionary", "count");
    if (ds.count < 1) rd.fail("dictionary.count", "must be >= 1");
    read_seed();
  } else if (ds.generator == "explicit") {
    rd.forbid(dict, "dictionary", {"K", "count", "seed", "path"}, unused);
    rd.require(dict, "dictionary", "atoms");
    const json& atoms = dict.at("atoms");
    if (!atoms.is_array() || atoms.empty()) rd.fail("dictionary.atoms", "must be a non-empty array");
    for (std::size_t k = 0; k < atoms.size(); ++k) {
      const std::string apath = "dictionary.atoms[" + std::to_string(k) + "]";
      if (!atoms[k].is_array() || atoms[k].empty()) rd.fail(apath, "must be an array of numbers");
      std::vector<double> atom;
      for (const json& v : atoms[k]) {
        if (!v.is_number()) rd.fail(apath, "must be an array of numbers");
        atom.push_back(v.get<double>());
      }
      if (!ds.atoms.empty() && atom.size() != ds.atoms.front().size()) {
        rd.fail(apath, "atoms must all have the same length");
      }
      ds.atoms.push_back(std::move(atom));
    }
    ds.n = static_cast<Index>(ds.atoms.front().size());
    if (dict.contains("n") && rd.integer(dict, "dictionary", "n") != ds.n) {
      rd.fail("dictionary.n", "does not match the atom length");
    }
  } else if (ds.generator == "file") {
    rd.forbid(dict, "dictionary", {"n", "K", "count", "seed", "atoms"}, unused);
    ds.path = rd.text(dict, "dictionary", "path");
  } else {
    rd.fail("dictionary.generator", "unknown generator '" + ds.generator + "'");
  }

  // targets
  const json& tg = rd.object(root, "", "targets");
  rd.allow(tg, "targets", {"count", "sparsity", "M", "seed", "coefficients"});
  auto& ts = cfg.targets;
  if (tg.contains("coefficients")) {
    rd.forbid(tg, "targets", {"sparsity", "M", "seed"}, "is not used with explicit coefficients");
    const json& rows = tg.at("coefficients");
    if (!rows.is_array() || rows.empty()) rd.fail("targets.coefficients", "must be a non-empty array");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::string cpath = "targets.coefficients[" + std::to_string(i) + "]";
      if (!rows[i].is_array()) rd.fail(cpath, "must be an array of per-atom coefficients");
      std::map<Index, double> coeffs;
      for (std::size_t k = 0; k < rows[i].size(); ++k) {
        if (!rows[i][k].is_number()) rd.fail(cpath, "must be an array of numbers");
        const double c = rows[i][k].get<double>();
        if (c != 0.0) coeffs[static_cast<Index>(k)] = c;
      }
      if (coeffs.empty()) rd.fail(cpath, "needs at least one nonzero coefficient");
      ts.coefficients.push_back(std::move(coeffs));
    }
    ts.count = static_cast<Index>(ts.coefficients.size());
    if (tg.contains("count") && rd.integer(tg, "targets", "count") != ts.count) {
      rd.fail("targets.count", "does not match the number of coefficient rows");
    }
  } else {
    ts.count = rd.integer(tg, "targets", "count");
    if (ts.count < 1) rd.fail("targets.count", "must be >= 1");
    ts.sparsity = rd.integer(tg, "targets", "sparsity");
    if (ts.sparsity < 1) rd.fail("targets.sparsity", "must be >= 1");
    ts.M = rd.number(tg, "targets", "M");
    if (!(ts.M > 0.0) || !std::isfinite(ts.M)) rd.fail("targets.M", "must be positive");
    if (tg.contains("seed")) {
      ts.seed = rd.seed(tg, "targets", "seed");
    } else if (auto s = derive_if(top_seed, 2)) {
      ts.seed = *s;
    } else {
      rd.fail("targets", "random targets need a seed (targets.seed or top-level seed)");
    }
  }

  // algorithms
  rd.require(root, "", "algorithms");
  const json& algs = root.at("algorithms");
  if (!algs.is_array() || algs.empty()) rd.fail("algorithms", "must be a non-empty array");
  std::set<std::string> names;
  for (std::size_t i = 0; i < algs.size(); ++i) {
    const std::string apath = "algorithms[" + std::to_string(i) + "]";
    AlgorithmSpec spec = parse_algorithm_spec(rd, algs[i], apath, hilbert);
    if (!names.insert(spec.display_name).second) {
      rd.fail(apath, "duplicate algorithm entry '" + spec.display_name + "'");
    }
    cfg.algorithms.push_back(std::move(spec));
  }

  const long long m_max = rd.integer(root, "", "m_max");
  if (m_max < 1 || m_max > 1'000'000) rd.fail("m_max", "must lie in [1, 1000000]");
  cfg.m_max = static_cast<int>(m_max);
  if (root.contains("eps")) {
    cfg.eps = rd.number(root, "", "eps");
    if (!(cfg.eps >= 0.0)) rd.fail("eps", "must be >= 0");
  }

  if (root.contains("output")) {
    const json& out = rd.object(root, "", "output");
    rd.allow(out, "output", {"dir", "formats"});
    if (out.contains("dir")) cfg.output.dir = rd.text(out, "output", "dir");
    if (out.contains("formats")) {
      const json& formats = out.at("formats");
      if (!formats.is_array() || formats.empty()) rd.fail("output.formats", "must be a non-empty array");
      cfg.output.json = false;
      cfg.output.csv = false;
      for (const json& f : formats) {
        const std::string name = f.is_string() ? f.get<std::string>() : std::string();
        if (name == "json") {
          cfg.output.json = true;
        } else if (name == "csv") {
          cfg.output.csv = true;
        } else {
          rd.fail("output.formats", "formats must be 'json' or 'csv'");
        }
      }
    }
  }
  return cfg;
}

namespace {

struct RunResult {
  std::size_t target_id = 0;
  std::size_t algorithm_id = 0;
  std::string algorithm;
  int m_final = 0;
  double error_final = 0.0;
  std::optional<bool> bound_ok;
  std::optional<double> slope;
};

Dictionary build_dictionary(const ExperimentConfig& cfg, const std::filesystem::path& base_dir) {
  const auto& ds = cfg.dictionary;
  if (ds.generator == "file") {
    Dictionary dict = io::dictionary_from_json(io::read_json_file(base_dir / ds.path));
    const bool hilbert = cfg.geometry.kind == "hilbert";
    if (dict.geometry().is_hilbert() != hilbert || (!hilbert && dict.geometry().p() != cfg.geometry.p)) {
      throw FormatError("dictionary file geometry does not match config geometry");
    }
    return dict;
  }
  const Geometry geometry = cfg.geometry.kind == "hilbert" ? Geometry::hilbert(ds.n)
                                                           : Geometry::lp(cfg.geometry.p, ds.n);
  if (ds.generator == "orthonormal") return build_orthonormal(geometry);
  if (ds.generator == "random_unit") return build_random_unit(geometry, ds.K, ds.seed);
  if (ds.generator == "union_bases") return build_union_bases(geometry, ds.count, ds.seed);
  Matrix atoms(ds.n, static_cast<Index>(ds.atoms.size()));
  for (std::size_t k = 0; k < ds.atoms.size(); ++k) {
    for (Index i = 0; i < ds.n; ++i) atoms(i, static_cast<Index>(k)) = ds.atoms[k][static_cast<std::size_t>(i)];
  }
  return Dictionary(geometry, std::move(atoms), "explicit");
}

RunTrace execute(const AlgorithmSpec& spec, const A1Target& target, const Dictionary& dict,
                 const ExperimentConfig& cfg) {
  const Element& f = target.f;
  switch (spec.algorithm) {
    case Algorithm::RpgaHilbert:
      return rpga_hilbert(f, dict, cfg.m_max, cfg.eps);
    case Algorithm::WrpgaHilbert:
      return wrpga_hilbert(f, dict, *spec.ts, cfg.m_max, cfg.eps);
    case Algorithm::RpgaBanach:
      return rpga_banach(f, dict, cfg.m_max, cfg.eps, spec.ls_tol);
    case Algorithm::WrpgaBanach:
      return wrpga_banach(f, dict, *spec.ts, cfg.m_max, cfg.eps, spec.ls_tol);
    case Algorithm::PgaHilbert:
      return pga_hilbert(f, dict, cfg.m_max, cfg.eps);
    case Algorithm::OgaHilbert:
      return oga_hilbert(f, dict, cfg.m_max, cfg.eps);
    case Algorithm::RgaClassic:
      return rga_hilbert(f, dict, cfg.m_max, RgaVariant::Classic, cfg.eps);
    case Algorithm::RgaOptimized:
      return rga_hilbert(f, dict, cfg.m_max, RgaVariant::Optimized, cfg.eps);
  }
  throw std::logic_error("unhandled algorithm");
}

std::string padded(std::size_t value, int width) {
  std::ostringstream os;
  os << std::setw(width) << std::setfill('0') << value;
  return os.str();
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace

int cmd_run(const std::filesystem::path& config_path, const RunOptions& options,
            std::ostream& out, std::ostream& err) {
  ExperimentConfig cfg;
  std::string text;
  try {
    text = io::read_file(config_path);
    cfg = parse_config(text, seed_from_environment());
  } catch (const ConfigError& e) {
    err << config_path.string() << ":" << e.line << ": " << e.what() << "\n";
    return kExitUsage;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::optional<Dictionary> dict;
  std::vector<A1Target> targets;
  try {
    dict = build_dictionary(cfg, config_path.parent_path());
    const auto& ts = cfg.targets;
    if (ts.coefficients.empty()) {
      if (ts.sparsity > dict->size()) {
        throw std::invalid_argument("targets.sparsity exceeds the dictionary size");
      }
      for (Index i = 0; i < ts.count; ++i) {
        targets.push_back(make_a1_target(*dict, ts.sparsity, ts.M,
                                         derive_seed(ts.seed, static_cast<std::uint64_t>(i))));
      }
    } else {
      for (const auto& coeffs : ts.coefficients) {
        if (coeffs.rbegin()->first >= dict->size()) {
          throw std::invalid_argument("targets.coefficients longer than the dictionary");
        }
        targets.push_back(make_a1_target(*dict, coeffs));
      }
    }
  } catch (const std::exception& e) {
    const int line = LineIndex(text).line_of("dictionary");
    err << config_path.string() << ":" << line << ": " << e.what() << "\n";
    return kExitUsage;
  }

  const std::filesystem::path dir = options.out_dir ? *options.out_dir : cfg.output.dir;
  const std::size_t n_alg = cfg.algorithms.size();
  const std::size_t n_runs = targets.size() * n_alg;
  std::vector<RunResult> results(n_runs);
  std::vector<std::exception_ptr> failures(n_runs);

  try {
    io::write_file_atomic(dir / "dictionary.json", dump(io::to_json(*dict)));
    for (std::size_t t = 0; t < targets.size(); ++t) {
      io::write_file_atomic(dir / "targets" / ("target_" + padded(t, 3) + ".json"),
                            dump(io::to_json(targets[t])));
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < n_runs; i = next++) {
      try {
        const std::size_t t = i / n_alg;
        const std::size_t a = i % n_alg;
        const AlgorithmSpec& spec = cfg.algorithms[a];
        const RunTrace trace = execute(spec, targets[t], *dict, cfg);
        RunResult res;
        res.target_id = t;
        res.algorithm_id = a;
        res.algorithm = spec.display_name;
        res.m_final = trace.records.empty() ? 0 : trace.records.back().m;
        res.error_final = trace.records.empty() ? trace.target_norm : trace.records.back().error;
        if (applicable_theorem(trace.algorithm)) {
          res.bound_ok = check_bound(trace, targets[t]).satisfied;
        }
        try {
          res.slope = fit_rate(trace, 1).slope;
        } catch (const InsufficientData&) {
        }
        const std::string stem =
            "target_" + padded(t, 3) + "__" + padded(a, 2) + "_" + std::string(to_string(trace.algorithm));
        if (cfg.output.json) {
          io::write_file_atomic(dir / "traces" / (stem + ".json"),
                                dump(io::to_json(trace, targets[t].M)));
        }
        if (cfg.output.csv) {
          io::write_file_atomic(dir / "traces" / (stem + ".csv"), io::trace_to_csv(trace));
        }
        results[i] = std::move(res);
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const int jobs = std::max(1, options.jobs);
  std::vector<std::thread> pool;
  for (int j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& th : pool) th.join();

  for (const auto& failure : failures) {
    if (!failure) continue;
    try {
      std::rethrow_exception(failure);
    } catch (const std::exception& e) {
      err << "error: run failed: " << e.what() << "\n";
    }
    return kExitUsage;
  }

  std::sort(results.begin(), results.end(), [](const RunResult& a, const RunResult& b) {
    return std::tie(a.target_id, a.algorithm_id) < std::tie(b.target_id, b.algorithm_id);
  });
  const std::string geometry_tag = io::geometry_tag(dict->geometry());
  std::string summary = "target_id,algorithm,geometry,m_final,error_final,bound_ok,slope\n";
  bool violated = false;
  for (const RunResult& r : results) {
    if (r.bound_ok && !*r.bound_ok) violated = true;
    summary += std::to_string(r.target_id) + ',' + r.algorithm + ',' + geometry_tag + ',' +
               std::to_string(r.m_final) + ',' + io::format_double(r.error_final) + ',' +
               (r.bound_ok ? (*r.bound_ok ? "true" : "false") : "na") + ',' +
               (r.slope ? io::format_double(*r.slope) : "") + '\n';
  }
  try {
    io::write_file_atomic(dir / "summary.csv", summary);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  out << "wrote " << n_runs << " runs to " << dir.string() << "\n";
  if (violated) {
    err << "rate bound violated; see " << (dir / "summary.csv").string() << "\n";
    return kExitBoundViolation;
  }
  return kExitOk;
}

int cmd_validate(const std::filesystem::path& trace_path,
                 const std::filesystem::path& target_path, std::ostream& out, std::ostream& err) {
  std::optional<RunTrace> trace;
  try {
    trace = io::trace_from_json(io::read_json_file(trace_path));
  } catch (const std::exception& e) {
    err << trace_path.string() << ": " << e.what() << "\n";
    return kExitUsage;
  }

  std::optional<A1Target> target;
  try {
    target = io::target_from_json(io::read_json_file(target_path));
  } catch (const std::exception& e) {
    err << target_path.string() << ": " << e.what() << "\n";
    return kExitUsage;
  }

  BoundReport report{};
  try {
    report = check_bound(*trace, *target);
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << " (" << trace_path.string() << " vs " << target_path.string()
        << ")\n";
    return kExitUsage;
  }
  out << io::to_json(report).dump() << "\n";
  return report.satisfied ? kExitOk : kExitBoundViolation;
}

int cmd_rate(const std::vector<std::filesystem::path>& trace_paths, int m_min,
             const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  if (trace_paths.empty()) {
    err << "error: no trace files given\n";
    return kExitUsage;
  }
  std::string plot = "series,algorithm,m,error,bound\n";
  json fits = json::array();
  for (const auto& path : trace_paths) {
    std::optional<RunTrace> parsed;
    std::optional<double> M;
    try {
      const json j = io::read_json_file(path);
      parsed = io::trace_from_json(j);
      M = io::trace_certified_M(j);
    } catch (const std::exception& e) {
      err << path.string() << ": " << e.what() << "\n";
      return kExitUsage;
    }
    const RunTrace& trace = *parsed;
    const std::string series = path.stem().string();
    const std::string algorithm(to_string(trace.algorithm));
    const auto theorem = applicable_theorem(trace.algorithm);
    for (const IterationRecord& rec : trace.records) {
      std::string bound;
      if (M && theorem && rec.m >= first_bounded_step(*theorem) &&
          (trace.weakness || (*theorem != Theorem::T41 && *theorem != Theorem::T61))) {
        bound = io::format_double(theorem_bound(*theorem, trace.geometry, *M,
                                                trace.weakness ? &*trace.weakness : nullptr, rec.m));
      }
      plot += series + ',' + algorithm + ',' + std::to_string(rec.m) + ',' +
              io::format_double(rec.error) + ',' + bound + '\n';
    }
    try {
      const RateFit fit = fit_rate(trace, m_min);
      json entry = io::to_json(fit);
      entry["series"] = series;
      entry["algorithm"] = algorithm;
      fits.push_back(std::move(entry));
      out << series << " " << algorithm << " slope " << io::format_double(fit.slope) << " r2 "
          << io::format_double(fit.r2) << "\n";
    } catch (const InsufficientData& e) {
      err << path.string() << ": insufficient data: " << e.what() << "\n";
    }
  }
  if (fits.empty()) {
    err << "error: insufficient data: no trace had enough usable records\n";
    return kExitUsage;
  }
  io::write_file_atomic(out_dir / "rate_plot.csv", plot);
  io::write_file_atomic(out_dir / "rate_fits.json", dump(fits));
  return kExitOk;
}

}  // namespace greedylab
