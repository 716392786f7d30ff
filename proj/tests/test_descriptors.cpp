#include <cmath>
#include <string>

#include "doctest.h"
#include "lesionkit/descriptors.hpp"
#include "lesionkit/synth.hpp"

using namespace lesion;
using namespace lesion::desc;

TEST_CASE("schema arithmetic") {
  CHECK(schema().size() == 24);
  int sum = 0;
  for (std::size_t t = 0; t < schema().size(); ++t) {
    CHECK(attribute_offset(t) == sum);
    sum += schema()[t].arity;
  }
  CHECK(sum == 280);
  CHECK(attribute_count() == 280);
  CHECK(max_arity() == 19);
  CHECK(schema()[type_index("ridge.s1")].arity == topo::kContourAttributes);
  CHECK(schema()[type_index("clot.s2")].arity == topo::kGroupAttributes);
  CHECK_THROWS_AS(type_index("nope"), SchemaError);
}

TEST_CASE("bundle rows are arity checked") {
  DescriptorBundle b;
  b.add("kmeans.axis_peak", Row{1, 2, 3});
  CHECK(b.row_count() == 1);
  CHECK_THROWS_AS(b.add("kmeans.axis_peak", Row{1, 2}), SchemaError);
  CHECK_THROWS_AS(b.add(99, Row{}), SchemaError);
}

TEST_CASE("CSV round trip") {
  DescriptorBundle b;
  b.add("kmeans.axis_peak", Row{0.1, 1.0 / 3.0, -2.5e-300});
  b.add("kmeans.axis_peak", Row{4, 5, 6});
  b.add("clot.s1", Row(19, 0.7));
  const std::string csv = to_csv(b);
  CHECK(csv.rfind("# lesionkit-descriptors/1 types=24 attributes=280\n", 0) == 0);
  CHECK(from_csv(csv) == b);
  CHECK(to_csv(from_csv(csv)) == csv);
  CHECK(from_csv(to_csv(DescriptorBundle{})) == DescriptorBundle{});
}

TEST_CASE("CSV errors") {
  const std::string good = to_csv(DescriptorBundle{});
  std::string wrong_version = good;
  wrong_version.replace(wrong_version.find("/1"), 2, "/9");
  CHECK_THROWS_AS(from_csv(wrong_version), SchemaError);
  CHECK_THROWS_AS(from_csv(""), SchemaError);
  CHECK_THROWS_AS(from_csv(good + "kmeans.axis_peak,0,1,2\n"), SchemaError);
  CHECK_THROWS_AS(from_csv(good + "bogus,0,1,2,3\n"), SchemaError);
  CHECK_THROWS_AS(from_csv(good + "kmeans.axis_peak,0,1,x,3\n"), SchemaError);
}

TEST_CASE("extract_descriptors on a synthetic image") {
  const auto s = synth::generate(5, 1);
  const DescriptorBundle a = extract_descriptors(s.image, 11);
  const DescriptorBundle b = extract_descriptors(s.image, 11);
  CHECK(a == b);
  CHECK(to_csv(a) == to_csv(b));
  CHECK(a.row_count() > 0);
  CHECK_FALSE(a.lists[type_index("kmeans.boundary")].empty());
  CHECK_FALSE(a.lists[type_index("edge.s1")].empty());
  for (std::size_t t = 0; t < a.lists.size(); ++t)
    for (const Row& r : a.lists[t]) {
      CHECK(static_cast<int>(r.size()) == schema()[t].arity);
      for (const double v : r) CHECK(std::isfinite(v));
    }
  CHECK(from_csv(to_csv(a)) == a);
}
