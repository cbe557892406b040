#include <doctest.h>

#include <random>

#include "dfm/error.hpp"
#include "dfm/layout.hpp"
#include "fixtures.hpp"

using namespace dfm;
using fixtures::R;

namespace {

ErrorKind kind_of(const std::string& doc) {
  try {
    (void)parse_layout(doc);
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::Io;
}

const char* kHier = R"({
  "units": "um",
  "top": "TOP",
  "cells": [
    {"name": "TOP", "shapes": [], "instances": [
      {"cell": "B", "at": [0, 0]},
      {"cell": "B", "at": [0.1, 0]}
    ]},
    {"name": "B", "shapes": [{"layer": "M1", "rect": [0, 0, 0.01, 0.01], "net": "n"}], "instances": []}
  ]
})";

}  // namespace

TEST_CASE("parse a single cell") {
  Design d = parse_layout(R"({"units": "um", "top": "TOP", "cells": [
      {"name": "TOP", "shapes": [{"layer": "M1", "rect": [0, 0, 1.0, 1.0]}]}]})");
  CHECK(d.top == "TOP");
  REQUIRE(d.cells.size() == 1);
  REQUIRE(d.cell("TOP").shapes.size() == 1);
  CHECK(d.cell("TOP").shapes[0].rect == R(0, 0, 1000, 1000));
  CHECK_FALSE(d.cell("TOP").shapes[0].net.has_value());
}

TEST_CASE("layout errors") {
  CHECK(kind_of(R"({"units": "um", "top": "A", "cells": [
      {"name": "A", "instances": [{"cell": "A", "at": [0, 0]}]}]})") == ErrorKind::CyclicHierarchy);
  CHECK(kind_of(R"({"units": "um", "top": "A", "cells": [
      {"name": "A", "instances": [{"cell": "B", "at": [0, 0]}]},
      {"name": "B", "instances": [{"cell": "A", "at": [0, 0]}]}]})") == ErrorKind::CyclicHierarchy);
  CHECK(kind_of(R"({"units": "um", "top": "A", "cells": [
      {"name": "A", "shapes": [{"layer": "M1", "rect": [0, 0, 0.0005, 1]}]}]})") == ErrorKind::NonIntegralCoordinate);
  CHECK(kind_of(R"({"units": "um", "top": "A", "cells": [
      {"name": "A", "instances": [{"cell": "Z", "at": [0, 0]}]}]})") == ErrorKind::DanglingReference);
  CHECK(kind_of(R"({"units": "um", "top": "Q", "cells": [{"name": "A"}]})") == ErrorKind::UnknownCell);
  CHECK(kind_of(R"({"units": "um", "top": "A", "cells": [{"name": "A"}, {"name": "A"}]})") == ErrorKind::DuplicateName);
  CHECK(kind_of(R"({"units": "nm", "top": "A", "cells": [{"name": "A"}]})") == ErrorKind::InvalidValue);
  CHECK(kind_of(R"({"units": "um", "top": "A", "cells": [
      {"name": "A", "instances": [{"cell": "A", "at": [0, 0], "rot": 45}]}]})") == ErrorKind::InvalidValue);
  CHECK(kind_of(R"({"units": "um", "top": "A", "cells": [
      {"name": "A", "shapes": [{"layer": "M1", "rect": [0, 0, 0, 1]}]}]})") == ErrorKind::InvalidValue);
  CHECK(kind_of("{ not json") == ErrorKind::Syntax);
  CHECK(kind_of(R"([1, 2])") == ErrorKind::Syntax);
}

TEST_CASE("cycle errors name the chain") {
  try {
    (void)parse_layout(R"({"units": "um", "top": "A", "cells": [
        {"name": "A", "instances": [{"cell": "B", "at": [0, 0]}]},
        {"name": "B", "instances": [{"cell": "A", "at": [0, 0]}]}]})");
    FAIL("expected cycle");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("A -> B -> A") != std::string::npos);
  }
}

TEST_CASE("um to nm conversion") {
  CHECK(um_to_nm(0.001, "x") == 1);
  CHECK(um_to_nm(1.234, "x") == 1234);
  CHECK(um_to_nm(-0.035, "x") == -35);
  CHECK_THROWS_AS(um_to_nm(0.0005, "x"), Error);
}

TEST_CASE("flatten examples") {
  Design d = parse_layout(kHier);
  PlacedGeometry g = flatten(d, d.top);
  REQUIRE(g.layer("M1").size() == 2);
  CHECK(g.layer("M1")[0].rect == R(0, 0, 10, 10));
  CHECK(g.layer("M1")[1].rect == R(100, 0, 110, 10));
  CHECK(g.layer("M1")[1].net == "n");
  CHECK(g.layer("M1")[0].path == "TOP/B#0");
  CHECK(g.layer("M1")[1].path == "TOP/B#1");
  CHECK(g.bbox() == R(0, 0, 110, 10));
  CHECK(g.layer("V1").empty());
}

TEST_CASE("two quarter turns through the hierarchy equal one half turn") {
  Design d;
  d.top = "TOP";
  d.cells["C"] = {"C", {fixtures::shape("M1", R(10, 20, 40, 30))}, {}};
  d.cells["B"] = {"B", {}, {{"C", Transform{90, false, {}}}}};
  d.cells["TOP"] = {"TOP", {}, {{"B", Transform{90, false, {}}}}};
  PlacedGeometry g = flatten(d, "TOP");
  REQUIRE(g.size() == 1);
  CHECK(g.layer("M1")[0].rect == apply_transform(R(10, 20, 40, 30), Transform{180, false, {}}));
}

TEST_CASE("flatten matches composed transforms on random hierarchies") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<int> rot(0, 3);
  std::uniform_int_distribution<int> coin(0, 1);
  std::uniform_int_distribution<Coord> c(-500, 500);
  for (int trial = 0; trial < 100; ++trial) {
    Transform t1{rot(rng) * 90, coin(rng) == 1, {c(rng), c(rng)}};
    Transform t2{rot(rng) * 90, coin(rng) == 1, {c(rng), c(rng)}};
    Transform t3{rot(rng) * 90, coin(rng) == 1, {c(rng), c(rng)}};
    Rect src = make_rect(c(rng), c(rng), c(rng), c(rng));
    if (!src.has_area()) continue;
    Design d;
    d.top = "T";
    d.cells["L"] = {"L", {fixtures::shape("M1", src)}, {}};
    d.cells["M"] = {"M", {}, {{"L", t3}}};
    d.cells["N"] = {"N", {}, {{"M", t2}}};
    d.cells["T"] = {"T", {}, {{"N", t1}}};
    PlacedGeometry g = flatten(d, "T");
    CHECK(g.layer("M1")[0].rect == apply_transform(src, compose(t1, compose(t2, t3))));
    CHECK(g.layer("M1")[0].rect.area() == src.area());
  }
}

TEST_CASE("serialize then parse is the identity") {
  Design d = parse_layout(kHier);
  d.cells["B"].instances.push_back({"C", Transform{270, true, {-35, 1234}}});
  d.cells["C"] = {"C", {fixtures::shape("V1", R(-1, -2, 3, 4), "x")}, {}};
  std::string text = serialize_layout(d);
  Design back = parse_layout(text);
  CHECK(back == d);
  CHECK(serialize_layout(back) == text);
  CHECK(text.find("\"units\": \"um\"") < text.find("\"top\""));
  CHECK(text.find("-0.035") != std::string::npos);
}

TEST_CASE("local geometry ignores instances") {
  Design d = parse_layout(kHier);
  CHECK(local_geometry(d.cell("TOP")).size() == 0);
  CHECK(local_geometry(d.cell("B")).size() == 1);
}

TEST_CASE("digest") {
  CHECK(digest("") == "cbf29ce484222325");
  CHECK(digest("a") == "af63dc4c8601ec8c");
  CHECK(digest("ab") != digest("ba"));
}
