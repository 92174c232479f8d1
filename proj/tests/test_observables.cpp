#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "qcl/observables.hpp"
#include "qcl/spectrum.hpp"

using namespace qcl;

namespace {

LabelLadder linear_ladder(double a, double b, int n_max) {
    LabelLadder ladder;
    ladder.method = LabelMethod::Continuity;
    for (int n = 0; n <= n_max; ++n)
        ladder.entries.push_back({n, a + b * n, 0.1 * n, false});
    return ladder;
}

FrequencyCurve curve_of(std::vector<double> values) {
    FrequencyCurve c;
    for (std::size_t i = 0; i < values.size(); ++i)
        c.points.push_back({static_cast<int>(i), values[i]});
    return c;
}

} // namespace

TEST_CASE("frequency curve of a linear ladder is constant", "[observables]") {
    const LabelLadder ladder = linear_ladder(0.7, 0.93, 20);
    const FrequencyCurve c = cavity_frequency_curve(ladder);
    REQUIRE(c.points.size() == 20);
    for (const auto& p : c.points) CHECK(p.value == Catch::Approx(0.93).epsilon(1e-14));
}

TEST_CASE("frequency curve at g = 0 is exactly the bare cavity", "[observables]") {
    SystemSpec s{0.05, 1.6, 0.0, 0.0, 2, 8, CouplingForm::Full};
    const EigenSolution sol = diagonalize_spec(s);
    const LabelLadder ladder = label_overlap(sol, 0, 6, true);
    const FrequencyCurve c = cavity_frequency_curve(ladder);
    for (const auto& p : c.points) CHECK(std::abs(p.value - 1.0) < 1e-10);
    CHECK(detect_features(c).empty());
}

TEST_CASE("frequency curve rejects short ladders", "[observables]") {
    LabelLadder one;
    one.entries.push_back({0, 0.0, 0.0, false});
    CHECK_THROWS_AS(cavity_frequency_curve(one), std::invalid_argument);
}

TEST_CASE("frequency curve telescopes back to the energy span", "[observables]") {
    SystemSpec s{0.05, 1.6, 0.02, 0.1, 2, 10, CouplingForm::Full};
    const EigenSolution sol = diagonalize_spec(s);
    const LabelLadder ladder = label_continuity(sol, 0, {0.05, 8, FirstStep::Extrapolate, true});
    const FrequencyCurve c = cavity_frequency_curve(ladder);
    double sum = 0.0;
    for (const auto& p : c.points) sum += p.value;
    CHECK(std::abs(sum - (ladder.entries.back().energy - ladder.entries.front().energy)) < 1e-10);
}

TEST_CASE("occupancy curve is a passthrough of the cached values", "[observables]") {
    const LabelLadder ladder = linear_ladder(0.0, 1.0, 5);
    const OccupancyCurve oc = occupancy_curve(ladder);
    REQUIRE(oc.points.size() == 6);
    for (int n = 0; n <= 5; ++n) {
        CHECK(oc.points[n].n == n);
        CHECK(oc.points[n].value == ladder.entries[n].nq_expect);
    }
}

TEST_CASE("detector: constant curve yields nothing", "[observables]") {
    CHECK(detect_features(curve_of(std::vector<double>(60, 1.0))).empty());
    CHECK_THROWS_AS(detect_features(curve_of({1.0, 1.0}), {0.0, 15, 10}),
                    std::invalid_argument);
}

TEST_CASE("detector: isolated excursion is a peak at its extremal point", "[observables]") {
    std::vector<double> v(60, 1.0);
    v[30] = 1.0006;
    v[31] = 1.0009;
    v[32] = 1.0004;
    const auto features = detect_features(curve_of(v));
    REQUIRE(features.size() == 1);
    CHECK(features[0].kind == FeatureKind::Peak);
    CHECK(features[0].n == 31);
    CHECK(features[0].magnitude == Catch::Approx(0.0009));
}

TEST_CASE("detector: bipolar excursion with slow return is one peak", "[observables]") {
    std::vector<double> v(30, 1.0);
    for (int i = 0; i < 5; ++i) v.push_back(0.9997);
    for (int i = 0; i < 5; ++i) v.push_back(1.0003);
    for (int i = 0; i < 20; ++i) v.push_back(1.0);
    const auto features = detect_features(curve_of(v));
    REQUIRE(features.size() == 1);
    CHECK(features[0].kind == FeatureKind::Peak);
    CHECK(features[0].magnitude == Catch::Approx(0.0003));
}

TEST_CASE("detector: persistent shifts classify by direction", "[observables]") {
    SECTION("upward is a jump at the largest step") {
        std::vector<double> v(25, 1.0);
        for (int i = 0; i < 25; ++i) v.push_back(1.002);
        const auto features = detect_features(curve_of(v));
        REQUIRE(features.size() == 1);
        CHECK(features[0].kind == FeatureKind::Jump);
        CHECK(features[0].n == 25);
        CHECK(features[0].magnitude == Catch::Approx(0.002));
    }

    SECTION("downward with a transition spike is a drop at the spike") {
        std::vector<double> v(25, 1.0);
        v.push_back(0.6);  // single-point discontinuity
        for (int i = 0; i < 25; ++i) v.push_back(0.9993);
        const auto features = detect_features(curve_of(v));
        REQUIRE(features.size() == 1);
        CHECK(features[0].kind == FeatureKind::Drop);
        CHECK(features[0].n == 25);  // the 1.0 -> 0.6 step is the extremal one
        CHECK(features[0].magnitude == Catch::Approx(0.0007));
    }
}

TEST_CASE("detector: baseline drifts are tolerated", "[observables]") {
    std::vector<double> v;
    for (int i = 0; i < 200; ++i) v.push_back(1.0 - 3e-6 * i);  // smooth decay
    CHECK(detect_features(curve_of(v)).empty());
    v[100] = 1.0 - 3e-6 * 100 + 4.2e-4;  // plus one spike
    const auto features = detect_features(curve_of(v));
    REQUIRE(features.size() == 1);
    CHECK(features[0].kind == FeatureKind::Peak);
    CHECK(features[0].n == 100);
}

TEST_CASE("detector is translation invariant", "[observables]") {
    std::vector<double> v(40, 1.0);
    v[20] = 1.0008;
    for (int i = 0; i < 20; ++i) v.push_back(1.0004);
    const auto base = detect_features(curve_of(v));
    std::vector<double> shifted = v;
    for (auto& x : shifted) x += 0.37;
    const auto moved = detect_features(curve_of(shifted));
    REQUIRE(base.size() == moved.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
        CHECK(base[i].kind == moved[i].kind);
        CHECK(base[i].n == moved[i].n);
        CHECK(base[i].magnitude == Catch::Approx(moved[i].magnitude).margin(1e-12));
    }
}

TEST_CASE("detector: trailing blip with too little evidence is dropped", "[observables]") {
    std::vector<double> v(30, 1.0);
    v.push_back(1.01);
    v.push_back(1.02);
    CHECK(detect_features(curve_of(v)).empty());
}
