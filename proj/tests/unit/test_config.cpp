#include "harvest/config.hpp"
#include "harvest/error.hpp"

#include <doctest.h>

#include <string>

using namespace harvest;

namespace {

const std::string kModel =
    R"({"family": "drifted_bm", "params": {"mu": 1.0, "sigma": 1.0}, "discount": 1.0,
        "yield": {"kind": "exponential", "params": {"p": 1.0, "alpha": 1.0}}})";

ErrorKind error_of(const std::string& doc) {
    try {
        parse_config(doc);
    } catch (const Error& e) {
        return e.kind();
    }
    return ErrorKind::Numeric;  // no error
}

}  // namespace

TEST_CASE("a full document parses") {
    const RunConfig cfg = parse_config(R"({"model": )" + kModel +
                                       R"(, "x0": [0.5, 2.0],
        "sim": {"dt": 0.001, "paths": 100, "seed": 9},
        "lp": {"states": 60, "basis": 12},
        "chatter": {"n": [1, 2, 4]}})");
    CHECK(cfg.x0 == std::vector<double>{0.5, 2.0});
    REQUIRE(cfg.sim.has_value());
    CHECK(cfg.sim->seed == 9);
    CHECK(cfg.sim->n_paths == 100);
    CHECK(cfg.lp.grid.n_states == 60);
    CHECK(cfg.lp.basis_size == 12);
    CHECK(cfg.chatter_n == std::vector<int>{1, 2, 4});
    CHECK(cfg.grid.x_hint == 2.0);
}

TEST_CASE("x0 must be positive") {
    CHECK(error_of(R"({"model": )" + kModel + R"(, "x0": [0.0]})") == ErrorKind::Config);
    CHECK(error_of(R"({"model": )" + kModel + R"(, "x0": [1.0, -2.0]})") == ErrorKind::Config);
}

TEST_CASE("increasing yields are rejected") {
    const std::string bad =
        R"({"model": {"family": "gbm", "params": {"mu": 0.05, "sigma": 0.3}, "discount": 0.1,
            "yield": {"kind": "rational", "params": {"p": 1.0, "alpha": -0.5}}}})";
    CHECK(error_of(bad) == ErrorKind::Config);
}

TEST_CASE("schema errors") {
    CHECK(error_of("not json") == ErrorKind::Config);
    CHECK(error_of(R"({"x0": [1.0]})") == ErrorKind::Config);
    CHECK(error_of(R"({"model": )" + kModel + R"(, "typo": 1})") == ErrorKind::Config);
    CHECK(error_of(R"({"model": )" + kModel + R"(, "sim": {"dt": 0.001}})") == ErrorKind::Config);
    CHECK(error_of(R"({"model": )" + kModel + R"(, "chatter": {"n": [2, 3]}})") == ErrorKind::Config);
    CHECK(error_of(R"({"model": )" + kModel + R"(, "lp": {"basis": 2}})") == ErrorKind::Config);
}

TEST_CASE("model-only parsing") {
    const ModelSpec m = parse_model(kModel);
    CHECK(m.family_name() == "drifted_bm");
    CHECK(m.discount() == 1.0);
}

TEST_CASE("empty x0 list is allowed") {
    const RunConfig cfg = parse_config(R"({"model": )" + kModel + R"(, "x0": []})");
    CHECK(cfg.x0.empty());
}
