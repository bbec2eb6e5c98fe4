// test_model.cpp — Model validation, JSON mapping and overrides

#include "fluor/model.hpp"

#include <doctest.h>

#include <string>

using namespace fluor;

namespace {

ModelSpec mollow() {
    ModelSpec m;
    m.omega_a = 1.0;
    m.alpha = 5.0;
    m.g_a = 0.02;
    m.g_b = 0.01;
    m.gamma = 0.02;
    m.n_b_max = 1;
    return m;
}

std::string failure(const ModelSpec& m) {
    try {
        validate(m);
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    return "";
}

} // namespace

TEST_CASE("a valid model passes") { CHECK(failure(mollow()).empty()); }

TEST_CASE("validation names the key and the rule") {
    auto m = mollow();
    m.gamma = -0.1;
    const auto msg = failure(m);
    CHECK(msg.find("model.gamma") != std::string::npos);
    CHECK(msg.find("nonnegative") != std::string::npos);

    m = mollow();
    m.n_a_max = 10;
    CHECK(failure(m).find("model.n_a_max") != std::string::npos);
    m.allow_truncation_override = true;
    CHECK(failure(m).empty());

    m = mollow();
    m.g_a.reset();
    CHECK(failure(m).find("model.g_a") != std::string::npos);

    m = mollow();
    m.family = Family::ThreeLevelV1;
    CHECK(failure(m).find("model.levels") != std::string::npos);

    m = mollow();
    m.omega_b = 0.0;
    CHECK(failure(m).find("model.omega_b") != std::string::npos);
}

TEST_CASE("moving-atom geometry rules") {
    ModelSpec m;
    m.family = Family::MovingAtom;
    m.units = Units::Atomic;
    m.levels = {0.0, 0.043};
    m.omega_a = 0.043;
    m.g_a = 0.0043;
    m.alpha = 1.0;
    m.n_b_max = 0;
    m.length = 1000;
    m.x1 = 400;
    m.x2 = 500;
    m.grid_points = 400;
    m.x0 = 350;
    m.sigma = 300;
    m.p0 = 0.5;
    CHECK(failure(m).empty());
    auto bad = m;
    bad.x2 = 300;
    CHECK(failure(bad).find("model.x1") != std::string::npos);
    bad = m;
    bad.p0 = 2.0;
    bad.grid_points = 200;  // p0 dx = 9.95 > pi/2
    CHECK(failure(bad).find("model.grid_points") != std::string::npos);
    bad = m;
    bad.units = Units::Epsilon;
    CHECK(failure(bad).find("model.units") != std::string::npos);
}

TEST_CASE("JSON round trip preserves every field") {
    auto m = mollow();
    m.f = 0.3;
    const auto back = model_from_json(to_json(m));
    CHECK(back == m);
}

TEST_CASE("overrides are strict") {
    const auto m = mollow();
    CHECK(apply_overrides(m, {{"alpha", 1.0}}).alpha == 1.0);
    CHECK_THROWS_WITH(apply_overrides(m, {{"alhpa", 1.0}}), doctest::Contains("alhpa"));
}
