#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "homlab/commands.hpp"
#include "homlab/config.hpp"
#include "homlab/error.hpp"

using namespace homlab;
namespace fs = std::filesystem;

namespace {

Config text(const std::string& s) {
    std::istringstream in(s);
    return Config::parse(in, "test.cfg");
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / "homlab_unit" / name;
    fs::remove_all(p);
    return p;
}

nlohmann::json read_json(const fs::path& p) {
    std::ifstream in(p);
    return nlohmann::json::parse(in);
}

}  // namespace

TEST_CASE("config sections, comments and typed getters") {
    const Config c = text("# top\n[system]\nkind = cubic ; trailing\ngamma=0.3\n\n[coeffs]\nomegas = 3, 4.5 ,6\nflag = true\n");
    CHECK(c.get_string("system.kind", "") == "cubic");
    CHECK(c.require_double("system.gamma") == 0.3);
    CHECK(c.get_doubles("coeffs.omegas", {}) == std::vector<double>{3.0, 4.5, 6.0});
    CHECK(c.get_bool("coeffs.flag", false));
    CHECK(c.get_int("coeffs.missing", 7) == 7);
    CHECK_NOTHROW(c.check_unused());
}

TEST_CASE("config rejects duplicates, junk numbers and unknown keys") {
    CHECK_THROWS_AS(text("[a]\nx = 1\nx = 2\n"), Error);
    CHECK_THROWS_AS(text("[a]\nno equals sign\n"), Error);
    const Config c = text("[a]\nx = 1.5abc\ny = 2\n");
    CHECK_THROWS_AS(c.get_double("a.x", 0.0), Error);
    CHECK_THROWS_AS(c.require_double("a.z"), Error);
    const Config u = text("[a]\nused = 1\ntypo = 2\n");
    u.get_double("a.used", 0.0);
    try {
        u.check_unused();
        FAIL("expected ConfigError");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ConfigError);
        CHECK(std::string(e.what()).find("a.typo") != std::string::npos);
    }
}

TEST_CASE("unknown command and unknown key exit with the config error code") {
    CHECK(run_command("nonsense", text(""), {scratch("nonsense")}) == ExitConfigError);
    const fs::path out = scratch("unknown_key");
    CHECK(run_command("coeffs", text("[global]\nkind = identity\nbogus = 1\n"), {out}) == ExitConfigError);
    CHECK(read_json(out / "report.json")["status"] == "config_error");
}

TEST_CASE("identity tube gives unit coefficients") {
    const fs::path out = scratch("identity");
    CHECK(run_command("coeffs", text("[global]\nkind = identity\n"), {out}) == ExitPass);
    const auto k = read_json(out / "coeffs.json");
    CHECK(k["a"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::fabs(k["b"].get<double>()) < 1e-12);
    CHECK(std::fabs(k["c"].get<double>()) < 1e-12);
    CHECK(k["d"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("classify with gamma above one half and a rotation-like block is trivial on both sides") {
    const fs::path out = scratch("classify");
    const Config c = text("[system]\nkind = linear\ngamma = 0.6\n[global]\na = 1\nb = 1\nc = -1\nd = 1\n");
    CHECK(run_command("classify", c, {out}) == ExitPass);
    const auto j = read_json(out / "classification.json");
    CHECK(j["gamma_case"] == "gamma_gt_half");
    CHECK(j["u_manifold"] == "Trivial");
    CHECK(j["s_manifold"] == "Trivial");
}

TEST_CASE("non-positive frequency is a config error") {
    const fs::path out = scratch("bad_omega");
    CHECK(run_command("integrate", text("[system]\nkind = cnlse\nomega = -1\n"), {out}) == ExitConfigError);
}
