// Runs the homlab CLI on the configs under configs/ and prints one PASS/FAIL
// line per acceptance criterion. Usage: homlab_acceptance <homlab> <configs> [work dir]

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <vector>

#include <json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string cli, config_dir;
fs::path work;

struct Run {
    std::string command, config;
    std::string tag;
    int exit_code = -1;
    double seconds = 0.0;
    json report;

    bool check(const std::string& name) const {
        for (const auto& c : report.value("checks", json::array()))
            if (c["name"] == name) return c["status"] == "pass";
        return false;
    }
    json metrics(const std::string& name) const {
        for (const auto& c : report.value("checks", json::array()))
            if (c["name"] == name) return c["metrics"];
        return json::object();
    }
};

std::vector<Run> all_runs;

Run run(const std::string& command, const std::string& config, const std::string& round = "a",
        const std::string& extra = "") {
    Run r{command, config, config + "." + round};
    const fs::path out = work / r.tag;
    fs::remove_all(out);
    const std::string cmd = "\"" + cli + "\" " + command + " --config \"" + config_dir + "/" + config + ".cfg\" --out \"" +
                            out.string() + "\" " + extra + " > \"" + (work / (r.tag + ".log")).string() + "\" 2>&1";
    const auto t0 = std::chrono::steady_clock::now();
    const int status = std::system(cmd.c_str());
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(out / "report.json");
    if (in) r.report = json::parse(in, nullptr, false);
    if (round == "a") all_runs.push_back(r);
    return r;
}

std::string fmt(double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x);
    return buf;
}

int failures = 0;

void verdict(int n, bool ok, const std::string& detail) {
    if (!ok) ++failures;
    std::cout << "criterion " << n << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Files of two output directories, compared byte by byte.
bool same_tree(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> fa, fb;
    for (const auto& e : fs::directory_iterator(a)) fa.push_back(e.path().filename());
    for (const auto& e : fs::directory_iterator(b)) fb.push_back(e.path().filename());
    std::sort(fa.begin(), fa.end());
    std::sort(fb.begin(), fb.end());
    if (fa != fb) {
        why = a.filename().string() + ": different file sets";
        return false;
    }
    for (const auto& f : fa)
        if (slurp(a / f) != slurp(b / f)) {
            why = a.filename().string() + "/" + f.string() + " differs";
            return false;
        }
    return !fa.empty() || (why = a.filename().string() + ": no output", false);
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 3) {
        std::cerr << "usage: homlab_acceptance <homlab> <configs> [work dir]\n";
        return 2;
    }
    cli = argv[1];
    config_dir = argv[2];
    work = argc > 3 ? fs::path(argv[3]) : fs::temp_directory_path() / "homlab_acceptance";
    fs::create_directories(work);

    {
        const Run r = run("integrate", "integrate_cnlse");
        const json e = r.metrics("explicit_solution_residual"), d = r.metrics("energy_drift");
        verdict(1, r.exit_code == 0 && r.check("explicit_solution_residual") && r.check("energy_drift") && r.seconds < 5,
                "field residual " + fmt(e.value("field_residual", -1.0)) + ", H drift " + fmt(d.value("h_drift", -1.0)) +
                    ", " + fmt(r.seconds) + " s");
    }
    {
        bool ok = true;
        double t = 0.0, diff = 0.0, ratio = 0.0;
        for (const char* g : {"03", "07", "10"}) {
            const Run r = run("bvp_verify", std::string("bvp_oracle_g") + g);
            ok = ok && r.exit_code == 0 && r.check("bvp_vs_shooting") && r.check("contraction_ratio");
            t += r.seconds;
            diff = std::max(diff, r.metrics("bvp_vs_shooting").value("max_difference", 1.0));
            ratio = std::max(ratio, r.metrics("contraction_ratio").value("max_ratio", 1.0));
        }
        verdict(2, ok && t < 30, "max |BVP - shooting| " + fmt(diff) + ", max ratio " + fmt(ratio) + ", " + fmt(t) + " s");
    }
    {
        bool ok = true;
        double t = 0.0;
        int bounds = 0;
        for (const char* g : {"03", "07", "10"}) {
            const Run r = run("bvp_verify", std::string("bvp_flow_g") + g);
            ok = ok && r.exit_code == 0;
            t += r.seconds;
            bounds += static_cast<int>(r.report.value("checks", json::array()).size());
        }
        verdict(3, ok && bounds > 0 && t < 60,
                std::to_string(bounds) + " bounds over three eigenvalue cases, " + fmt(t) + " s");
    }
    {
        const Run r = run("bvp_verify", "bvp_derivatives");
        std::string cs;
        for (const auto& c : r.report.value("checks", json::array()))
            if (c["name"].get<std::string>().rfind("ratio.", 0) == 0)
                cs += " " + c["name"].get<std::string>().substr(6) + " C=" + fmt(c["metrics"].value("C", -1.0));
        verdict(4, r.exit_code == 0 && r.seconds < 60,
                "fd error " + fmt(r.metrics("fd_agreement").value("max_relative_error", -1.0)) + ", allowed C=5:" + cs +
                    ", " + fmt(r.seconds) + " s");
    }
    {
        const Run r = run("classify", "classify_gamma07");
        verdict(5, r.exit_code == 0 && r.check("no_return") && r.check("accumulation_on_d_over_b") && r.seconds < 30,
                "no return and decreasing |w - d/b| on eps = 1e-2, 5e-3, 2.5e-3, " + fmt(r.seconds) + " s");
    }
    {
        const Run a = run("manifold", "manifold_unstable");
        const Run b = run("manifold", "manifold_unstable_bd_negative");
        const bool ok = a.exit_code == 0 && a.check("graph_transform_converges") && a.check("invariance_residual") &&
                        a.check("tangency") && b.exit_code == 0 && b.check("no_curve");
        verdict(6, ok && a.seconds + b.seconds < 120,
                "bd>0 invariance " + fmt(a.metrics("invariance_residual").value("residual", -1.0)) + ", tangency error " +
                    fmt(a.metrics("tangency").value("error", -1.0)) + "; bd<0 " +
                    b.metrics("no_curve").value("outcome", std::string("?")) + ", " + fmt(a.seconds + b.seconds) + " s");
    }
    {
        const Run a = run("manifold", "manifold_figure_eight");
        const Run b = run("manifold", "manifold_figure_eight_per_loop");
        const bool ok = a.exit_code == 0 && a.check("composed_contraction") && a.check("alternation") &&
                        b.exit_code == 0 && b.check("joint_route_fails") && b.check("per_loop_curves");
        verdict(7, ok && a.seconds + b.seconds < 120,
                "composed bound " + fmt(a.metrics("composed_contraction").value("bound", -1.0)) + ", per-loop fallback, " +
                    fmt(a.seconds + b.seconds) + " s");
    }
    {
        const Run r = run("coeffs", "coeffs_cnlse");
        std::ifstream in(work / r.tag / "coeffs.json");
        const json j = in ? json::parse(in, nullptr, false) : json();
        int n = 0;
        for (const auto& row : j.value("rows", json::array())) {
            const double w = row.value("omega", 0.0);
            if (w > 2.0 && w <= 10.0) ++n;
        }
        verdict(8, r.exit_code == 0 && n >= 10 && r.seconds < 120,
                std::to_string(n) + " frequencies, max |ad-bc-1| " +
                    fmt(r.metrics("ad_minus_bc").value("max_abs_ad_minus_bc_minus_1", -1.0)) + ", max |b+c| " +
                    fmt(r.metrics("b_plus_c").value("max_abs_b_plus_c", -1.0)) + ", symmetry " +
                    fmt(r.metrics("loop_symmetry").value("max_symmetry_defect", -1.0)) + ", " + fmt(r.seconds) + " s");
    }
    {
        const Run r = run("cnlse_scan", "cnlse_scan");
        std::ifstream in(work / r.tag / "zeros.json");
        const json z = in ? json::parse(in, nullptr, false) : json();
        const bool none = z.value("none_in_range", false);
        const std::string what = none ? "none in range on (2, 20], extended to " + fmt(z.value("range", json::array({0, 0}))[1].get<double>())
                                      : std::to_string(z.value("zeros", json::array()).size()) + " zeros with |b| = 1 and scenario flip";
        verdict(9, r.exit_code == 0 && (none ? z.value("extended", false) : true) && r.seconds < 600,
                what + ", " + fmt(r.seconds) + " s");
    }
    {
        const Run r = run("multipulse", "multipulse");
        verdict(10, r.exit_code == 0 && r.check("transversal_points") && r.check("pulse_counts") &&
                        r.check("distinct_points") && r.check("hausdorff_decreasing") && r.seconds < 60,
                std::to_string(r.metrics("transversal_points").value("points_with_i_j_at_least_1", 0)) +
                    " verified transversal points, min separation 1e" +
                    fmt(r.metrics("distinct_points").value("min_separation_log10", 0.0)) + ", " + fmt(r.seconds) + " s");
    }
    {
        bool ok = true;
        std::string why;
        const std::vector<Run> first = all_runs;
        for (const auto& a : first) {
            const Run b = run(a.command, a.config, "b");
            ok = ok && same_tree(work / a.tag, work / b.tag, why);
        }
        for (const char* cfg : {"coeffs_cnlse", "bvp_oracle_g03"}) {
            const std::string cmd = std::string(cfg) == "coeffs_cnlse" ? "coeffs" : "bvp_verify";
            const Run b = run(cmd, cfg, "w2", "--workers 2");
            ok = ok && same_tree(work / (std::string(cfg) + ".a"), work / b.tag, why);
        }
        verdict(11, ok, ok ? std::to_string(first.size()) + " runs repeated byte-identically, worker count 1 vs 2" : why);
    }
    std::cout << (failures == 0 ? "all criteria pass" : std::to_string(failures) + " criteria fail") << std::endl;
    return failures == 0 ? 0 : 1;
}
