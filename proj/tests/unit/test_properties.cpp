#include "support/criteria.hpp"

#include <doctest.h>

using namespace lexcraft::criteria;

// Scaled-down runs of the acceptance properties with different seeds.

namespace {

void check(const Outcome& o)
{
    INFO(o.detail);
    CHECK(o.pass);
}

} // namespace

TEST_CASE("property: compiled stages follow the fixed order")
{
    check(stage_order_law(150, 30.0, 11));
}

TEST_CASE("property: local colour is confined to subject masks")
{
    check(mask_confinement(8, 12));
}

TEST_CASE("property: random command sequences keep lifecycle invariants")
{
    check(lifecycle(120, 13));
}

TEST_CASE("property: modifier moves, subject scaling and fork isolation")
{
    check(compiler_invariances(30, 80, 14));
}

TEST_CASE("property: k-means against brute force")
{
    check(kmeans_oracle(30, 60.0, 15));
}

TEST_CASE("ordering necessity fixture")
{
    check(ordering_necessity());
}

TEST_CASE("proportional quantization on small canvases")
{
    check(proportional_quantization(64));
}

TEST_CASE("service replay of concurrent posts")
{
    check(service_linearizability(30, 4));
}
