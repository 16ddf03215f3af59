#include <doctest.h>

#include "risim/geometry.hpp"
#include "test_util.hpp"

using namespace risim;

TEST_CASE("direction/unit vector round trip") {
    const Direction boresight{0.0, M_PI / 2};
    const Vec3 u = unit_from_direction(boresight);
    CHECK(u.x == doctest::Approx(1.0));
    CHECK(u.y == doctest::Approx(0.0));
    CHECK(u.z == doctest::Approx(0.0).epsilon(1e-12));

    Rng rng(7);
    for (int i = 0; i < 200; ++i) {
        const Direction d{(rng.next_unit() - 0.5) * 2 * M_PI, rng.next_unit() * M_PI};
        const Direction back = direction_from_unit(unit_from_direction(d));
        CHECK(testutil::wrapped_phase_distance(back.azimuth, d.azimuth) < 1e-9);
        CHECK(back.zenith == doctest::Approx(d.zenith).epsilon(1e-9));
    }
}

TEST_CASE("frame round trip and validation") {
    Frame f;
    f.boresight = Vec3{0, 1, 0};
    f.horizontal = Vec3{-1, 0, 0};
    f.vertical = Vec3{0, 0, 1};
    f.validate();
    const Vec3 w{1.0, 2.0, 3.0};
    const Vec3 back = f.to_world(f.to_local(w));
    CHECK(back.x == doctest::Approx(w.x));
    CHECK(back.y == doctest::Approx(w.y));
    CHECK(back.z == doctest::Approx(w.z));

    Frame bad;
    bad.horizontal = Vec3{0.5, 0.5, 0};
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("facet coplanarity is enforced") {
    Facet flat = testutil::axis_rect(0, 5.0, -1, 1, -1, 1, 0.5);
    CHECK_NOTHROW(flat.validate());

    Facet warped = flat;
    warped.vertices[3].x += 1e-6;
    CHECK_THROWS_AS(warped.validate(), std::invalid_argument);

    Facet bad_refl = flat;
    bad_refl.reflectivity = 1.5;
    CHECK_THROWS_AS(bad_refl.validate(), std::invalid_argument);
}

TEST_CASE("ray_quad agrees with the closed-form rectangle oracle") {
    Rng rng(11);
    for (int trial = 0; trial < 500; ++trial) {
        const int axis = static_cast<int>(rng.next_u64() % 3);
        const double c = (rng.next_unit() - 0.5) * 10;
        const double a0 = (rng.next_unit() - 0.5) * 8;
        const double a1 = a0 + rng.next_unit() * 5 + 0.1;
        const double b0 = (rng.next_unit() - 0.5) * 8;
        const double b1 = b0 + rng.next_unit() * 5 + 0.1;
        const Facet f = testutil::axis_rect(axis, c, a0, a1, b0, b1, 0.5);
        const Vec3 origin{(rng.next_unit() - 0.5) * 6, (rng.next_unit() - 0.5) * 6,
                          (rng.next_unit() - 0.5) * 6};
        const Direction d{(rng.next_unit() - 0.5) * 2 * M_PI, rng.next_unit() * M_PI};
        const Vec3 dir = unit_from_direction(d);

        const auto expect = testutil::oracle_rect_hit(origin, dir, axis, c, a0, a1, b0, b1);
        const auto got = ray_quad(origin, dir, f);
        REQUIRE(got.has_value() == expect.has_value());
        if (got) CHECK(*got == doctest::Approx(*expect).epsilon(1e-9));
    }
}

TEST_CASE("ray_aabb entry distance") {
    const Aabb box{{1, -1, -1}, {3, 1, 1}};
    const auto hit = ray_aabb({0, 0, 0}, {1, 0, 0}, box);
    REQUIRE(hit);
    CHECK(*hit == doctest::Approx(1.0));
    CHECK_FALSE(ray_aabb({0, 0, 0}, {-1, 0, 0}, box));
    CHECK_FALSE(ray_aabb({0, 5, 0}, {1, 0, 0}, box));
}

TEST_CASE("mirror_across_plane reflects a point") {
    const Facet wall = testutil::axis_rect(1, 2.0, -1, 1, -1, 1, 1.0);
    const Vec3 m = mirror_across_plane({0.5, 0.5, 0.25}, wall);
    CHECK(m.x == doctest::Approx(0.5));
    CHECK(m.y == doctest::Approx(3.5));
    CHECK(m.z == doctest::Approx(0.25));
}
