#include <doctest.h>

#include "greedylab/errors.hpp"
#include "greedylab/io.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

using namespace greedylab;
namespace fs = std::filesystem;

TEST_CASE("doubles print with 17 significant digits and round trip") {
  for (double x : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0752576694706878}) {
    const std::string s = io::format_double(x);
    CHECK(s.find(',') == std::string::npos);
    CHECK(std::strtod(s.c_str(), nullptr) == x);
  }
  CHECK(io::format_double(0.1) == "0.10000000000000001");
}

TEST_CASE("geometry tags") {
  CHECK(io::geometry_tag(Geometry::hilbert(2)) == "hilbert");
  CHECK(io::geometry_tag(Geometry::lp(1.5, 2)) == "lp:1.5");
  CHECK(io::geometry_from_json(io::to_json(Geometry::lp(3, 4)), 4) == Geometry::lp(3, 4));
  CHECK(io::geometry_from_json(io::to_json(Geometry::hilbert(4)), 4) == Geometry::hilbert(4));
  CHECK_THROWS_AS(io::geometry_from_json(io::json{{"kind", "banach"}}, 2), FormatError);
}

TEST_CASE("dictionary round trip") {
  for (const auto& d : {build_random_unit(Geometry::hilbert(4), 9, 3),
                        build_union_bases(Geometry::lp(3, 3), 2, 5)}) {
    const auto back = io::dictionary_from_json(io::json::parse(io::to_json(d).dump()));
    CHECK(back.atoms() == d.atoms());
    CHECK(back.geometry() == d.geometry());
    CHECK(back.label() == d.label());
  }
  io::json j = io::to_json(build_orthonormal(Geometry::hilbert(2)));
  j["atoms"][1] = {0.0, 1.0, 0.0};
  CHECK_THROWS_AS(io::dictionary_from_json(j), FormatError);
}

TEST_CASE("target and weakness round trip") {
  const auto d = build_random_unit(Geometry::lp(1.5, 5), 10, 2);
  const auto t = make_a1_target(d, 4, 2.25, 6);
  const auto back = io::target_from_json(io::json::parse(io::to_json(t).dump()));
  CHECK(back.f.coords() == t.f.coords());
  CHECK(back.f.geometry() == t.f.geometry());
  CHECK(back.coeffs == t.coeffs);
  CHECK(back.M == t.M);

  for (const auto& w : {WeaknessSequence::constant(0.5), WeaknessSequence::power_law(0.9, 0.25),
                        WeaknessSequence::explicit_values({1.0, 0.3})}) {
    CHECK(io::weakness_from_json(io::json::parse(io::to_json(w).dump())) == w);
  }
  CHECK(io::describe(WeaknessSequence::constant(0.5)) == "constant(0.5)");
}

TEST_CASE("trace round trip is exact") {
  const auto dh = build_random_unit(Geometry::hilbert(6), 15, 4);
  const auto th = make_a1_target(dh, 3, 1.7, 1);
  const auto dl = build_random_unit(Geometry::lp(4, 6), 15, 4);
  const auto tl = make_a1_target(dl, 3, 1.7, 1);
  for (const auto& trace :
       {rpga_hilbert(th.f, dh, 25), wrpga_hilbert(th.f, dh, WeaknessSequence::constant(0.6), 25),
        rpga_banach(tl.f, dl, 15), oga_hilbert(th.f, dh, 4)}) {
    const std::string text = io::to_json(trace, 1.7).dump();
    const auto back = io::trace_from_json(io::json::parse(text));
    CHECK(back.records == trace.records);
    CHECK(back.algorithm == trace.algorithm);
    CHECK(back.geometry == trace.geometry);
    CHECK(back.stop_reason == trace.stop_reason);
    CHECK(back.target_norm == trace.target_norm);
    CHECK(back.final_approx.coords() == trace.final_approx.coords());
    CHECK(back.weakness == trace.weakness);
    CHECK(io::trace_certified_M(io::json::parse(text)) == 1.7);
    CHECK(io::to_json(back, 1.7).dump() == text);
  }
}

TEST_CASE("minimal trace schema parses") {
  const auto j = io::json::parse(R"({
    "algorithm": "rpga_hilbert", "geometry": {"kind": "hilbert", "p": null}, "n": 2,
    "stop_reason": "max_iter",
    "records": [{"m": 1, "atom_index": 0, "dual_value": 0.5, "lambda": 0.5, "s": 1,
                 "error": 0.3, "sup_dual": 0.5}]})");
  const auto t = io::trace_from_json(j);
  CHECK(t.records.size() == 1);
  CHECK(std::isnan(t.target_norm));
  auto bad = j;
  bad["records"].push_back(bad["records"][0]);
  CHECK_THROWS_AS(io::trace_from_json(bad), FormatError);
  bad = j;
  bad.erase("n");
  CHECK_THROWS_AS(io::trace_from_json(bad), FormatError);
  bad = j;
  bad["algorithm"] = "magic";
  CHECK_THROWS_AS(io::trace_from_json(bad), FormatError);
}

TEST_CASE("trace csv") {
  const auto d = build_orthonormal(Geometry::hilbert(2));
  Vector f(2);
  f << 0.6, 0.8;
  const auto csv = io::trace_to_csv(rpga_hilbert(Element(d.geometry(), f), d, 5));
  std::istringstream in(csv);
  std::string line;
  std::getline(in, line);
  CHECK(line == "m,atom_index,dual_value,lambda,s,error,sup_dual");
  std::getline(in, line);
  CHECK(line.rfind("1,1,0.80000000000000004,", 0) == 0);
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 1);
}

TEST_CASE("report json") {
  const BoundReport rep{Theorem::T53, true, std::numeric_limits<double>::infinity(), 0};
  const auto j = io::to_json(rep);
  CHECK(j["theorem"] == "T53");
  CHECK(j["margin"].is_null());
  CHECK(j["satisfied"] == true);
}

TEST_CASE("atomic writes create directories") {
  const fs::path dir = fs::path(GREEDYLAB_TEST_TMP) / "io_atomic";
  fs::remove_all(dir);
  const fs::path file = dir / "a" / "b.txt";
  io::write_file_atomic(file, "hello\n");
  CHECK(io::read_file(file) == "hello\n");
  io::write_file_atomic(file, "again\n");
  CHECK(io::read_file(file) == "again\n");
  CHECK_FALSE(fs::exists(file.string() + ".tmp"));
  CHECK_THROWS_AS(io::read_json_file(dir / "missing.json"), FormatError);
  io::write_file_atomic(dir / "broken.json", "{");
  CHECK_THROWS_AS(io::read_json_file(dir / "broken.json"), FormatError);
}
