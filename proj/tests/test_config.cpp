#include <catch2/catch_amalgamated.hpp>

#include <string>

#include "qcl/config.hpp"

using namespace qcl;

namespace {

const char* fig1_text = R"(# canonical ground-ladder run
[system]
e_c = 0.05
e_j = 1.6
g = 0.025
n_g = 0.0

[labeling]
method = continuity
p = g
n_max = 260
delta = 0.01
)";

} // namespace

TEST_CASE("canonical config round-trips through parse and serialize", "[config]") {
    const RunConfig a = parse_config(fig1_text);
    CHECK(a.system.e_c == 0.05);
    CHECK(a.system.e_j == 1.6);
    CHECK(a.system.g == 0.025);
    CHECK(a.system.n_g == 0.0);
    CHECK(a.method == LabelMethod::Continuity);
    CHECK(a.p == 0);
    CHECK(a.n_max == 260);
    CHECK(a.delta == 0.01);

    const RunConfig b = parse_config(serialize_config(a));
    CHECK(a == b);
    CHECK(serialize_config(a) == serialize_config(b));
}

TEST_CASE("defaults fill the spec-level values", "[config]") {
    const RunConfig cfg = parse_config("[system]\ne_c=0.05\ne_j=1.6\ng=0.025\nn_g=0.1\n");
    CHECK(cfg.system.charge_cutoff == 10);
    CHECK(cfg.system.fock_cutoff == 350);
    CHECK(cfg.system.coupling == CouplingForm::Full);
    CHECK(cfg.delta == 0.01);
    CHECK(cfg.first_step == FirstStep::Extrapolate);
    CHECK(cfg.workers == 1);
    CHECK_FALSE(cfg.drive.has_value());
    CHECK_FALSE(cfg.sweep.has_value());
}

TEST_CASE("missing required keys are named", "[config]") {
    CHECK_THROWS_WITH(parse_config("[system]\ne_c=0.05\ng=0.025\nn_g=0.0\n"),
                      Catch::Matchers::ContainsSubstring("e_j"));
    CHECK_THROWS_WITH(parse_config("[labeling]\np = g\n"),
                      Catch::Matchers::ContainsSubstring("[system]"));
}

TEST_CASE("unknown keys carry line numbers", "[config]") {
    const char* text = "[system]\ne_c=0.05\ne_j=1.6\ng=0.025\nn_g=0.0\ne_cc=1\n";
    try {
        parse_config(text);
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(err.line == 6);
        CHECK(std::string(err.what()).find("e_cc") != std::string::npos);
    }
}

TEST_CASE("invariant violations carry line numbers", "[config]") {
    try {
        parse_config("[system]\ne_c=-0.05\ne_j=1.6\ng=0.025\nn_g=0.0\n");
        FAIL("expected ConfigError");
    } catch (const ConfigError& err) {
        CHECK(std::string(err.what()).find("e_c") != std::string::npos);
        CHECK(err.line >= 1);
    }
}

TEST_CASE("duplicate keys are rejected", "[config]") {
    CHECK_THROWS_WITH(parse_config("[system]\ne_c=0.05\ne_c=0.06\ne_j=1.6\ng=0.1\nn_g=0\n"),
                      Catch::Matchers::ContainsSubstring("duplicate"));
}

TEST_CASE("malformed lines and sections are rejected", "[config]") {
    CHECK_THROWS_AS(parse_config("[system\ne_c=0.05\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[mystery]\nx=1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("e_c = 0.05\n"), ConfigError);  // key outside section
    CHECK_THROWS_AS(parse_config("[system]\ne_c 0.05\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[system]\ne_c=abc\ne_j=1.6\ng=0.1\nn_g=0\n"), ConfigError);
}

TEST_CASE("offset-charge sweep with per-point window overrides", "[config]") {
    const char* text = R"(
[system]
e_c = 0.05
e_j = 1.6
g = 0.025
n_g = 0.0

[labeling]
delta = 0.01
n_max = 260

[sweep]
n_g_values = 0.0, 0.1, 0.2, 0.3, 0.4, 0.5
ladder_starts = g, e
delta_overrides = g:0.1:0.015, e:0.3:0.015
)";
    const RunConfig cfg = parse_config(text);
    REQUIRE(cfg.sweep.has_value());
    CHECK(*cfg.sweep->kind == SweepKind::OffsetCharge);
    CHECK(cfg.sweep->n_g_values == std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.4, 0.5});
    CHECK(cfg.sweep->ladder_starts == std::vector<int>{0, 1});
    REQUIRE(cfg.sweep->delta_overrides.size() == 2);
    CHECK(cfg.sweep->delta_overrides[0].p == 0);
    CHECK(cfg.sweep->delta_overrides[0].n_g == 0.1);
    CHECK(cfg.sweep->delta_overrides[0].delta == 0.015);
    CHECK(cfg.sweep->delta_overrides[1].p == 1);
    CHECK(cfg.sweep->delta_overrides[1].n_g == 0.3);

    const RunConfig again = parse_config(serialize_config(cfg));
    CHECK(cfg == again);
}

TEST_CASE("sweep kind inference and ambiguity", "[config]") {
    const std::string head = "[system]\ne_c=0.05\ne_j=1.6\ng=0.025\nn_g=0.0\n";
    const RunConfig window = parse_config(head + "[sweep]\ndelta_values = 0.01, 0.02\n");
    CHECK(*window.sweep->kind == SweepKind::Window);
    CHECK_THROWS_WITH(
        parse_config(head + "[sweep]\nn_g_values = 0.1\ndelta_values = 0.01\n"),
        Catch::Matchers::ContainsSubstring("ambiguous"));
    CHECK_THROWS_AS(parse_config(head + "[sweep]\n"), ConfigError);
}

TEST_CASE("drive section requires its core keys and validates", "[config]") {
    const std::string head = "[system]\ne_c=0.05\ne_j=1.6\ng=0.025\nn_g=0.0\n";
    CHECK_THROWS_WITH(parse_config(head + "[drive]\nomega_d=1.0015\nt_end=100\n"),
                      Catch::Matchers::ContainsSubstring("amplitude"));
    CHECK_THROWS_WITH(parse_config(head + "[drive]\namplitude=0.005\nomega_d=1.0015\nt_end=-1\n"),
                      Catch::Matchers::ContainsSubstring("t_end"));
    const RunConfig ok =
        parse_config(head + "[drive]\namplitude=0.005\nomega_d=1.0015\nt_end=100\nframe=lab\n");
    REQUIRE(ok.drive.has_value());
    CHECK(ok.drive->amplitude == 0.005);
    CHECK(ok.drive->dt == 1e-3);
    CHECK(ok.drive->fock_cutoff_dyn == 150);
    CHECK(ok.frame == Frame::Lab);
}

TEST_CASE("comments and blank lines are ignored", "[config]") {
    const char* text =
        "# leading comment\n\n[system]\ne_c = 0.05 # inline\ne_j = 1.6\ng = 0.025\nn_g = 0.0\n"
        "; other comment style\n";
    CHECK(parse_config(text).system.e_c == 0.05);
}
