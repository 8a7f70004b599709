// End-to-end acceptance suite: one PASS/FAIL line per criterion, exit 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "rotconv/experiments/run.hpp"

using namespace rotconv;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const fs::path kRoot = fs::temp_directory_path() / "rotconv_acceptance";

struct Timed {
    RunOutcome out;
    double seconds = 0.0;
};

// every trajectory run, for the criteria that apply across runs
std::vector<std::pair<std::string, RunOutcome>> g_runs;

Timed run_config(const std::string& name, const std::string& text, std::vector<std::string> sets = {}) {
    sets.push_back("output_dir=" + json((kRoot / name).string()).dump());
    const ConfigResult parsed = parse_config(text, sets);
    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << name << ": " << e << '\n';
        Timed t;
        t.out.exit_code = 2;
        t.out.status = "invalid-config";
        return t;
    }
    const auto start = std::chrono::steady_clock::now();
    Timed t{run(*parsed.config), 0.0};
    t.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (parsed.config->kind != ExperimentKind::IneqLab) g_runs.emplace_back(name, t.out);
    return t;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

const CheckResult* find_check(const RunOutcome& o, const std::string& name) {
    for (const auto& c : o.checks)
        if (c.name == name) return &c;
    return nullptr;
}

int g_failures = 0;

void verdict(int id, const std::string& title, bool pass, const std::string& detail) {
    if (!pass) ++g_failures;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << id << " (" << title << "): " << detail << std::endl;
}

const char* kSmooth = R"({"kind": "simulate", "seed": 1, "init": {"max_mode": 4, "slope": -3}})";

void energy_identity() {
    const Timed a = run_config("c1_dt1", kSmooth);
    const Timed b = run_config("c1_dt2", kSmooth, {"params.dt=5e-4"});
    if (a.out.exit_code == 2 || b.out.exit_code == 2) {
        verdict(1, "energy identity", false, "run failed: " + a.out.detail + b.out.detail);
        return;
    }
    const double ra = a.out.report["max_normalized_energy_residual"];
    const double rb = b.out.report["max_normalized_energy_residual"];
    const double shrink = ra / rb;
    const bool pass = ra <= 1e-5 && shrink >= 3.4 && shrink <= 4.6 && a.seconds <= 120.0;
    verdict(1, "energy identity", pass,
            "residual " + num(ra) + " at dt=1e-3, " + num(rb) + " at dt=5e-4, shrink " + num(shrink) + ", " +
                num(a.seconds) + " s");
}

void theta_decay() {
    const Timed t = run_config("c2_mode", R"({"kind": "decay-study", "params": {"Gamma": 0, "Pe": 1, "Re": 1},
        "init": {"generator": "modes", "modes": [{"field": "theta", "j": [1, 0, 0], "amplitude": 1}]}})");
    if (t.out.exit_code == 2) {
        verdict(2, "temperature decay", false, "run failed: " + t.out.detail);
        return;
    }
    const json& d = t.out.report["decay"];
    const double tight = d["bound_a"]["loosest_margin"];
    const double L = 2.0 * M_PI, Pe = 1.0;
    const double expected = 2.0 * (4.0 * M_PI * M_PI / (L * L)) / Pe;
    const double rate = d["theta_fit"]["rate"].is_number() ? d["theta_fit"]["rate"].get<double>() : NAN;
    const double rate_err = std::abs(rate - expected) / expected;
    verdict(2, "temperature decay, single mode", tight <= 1e-6 && rate_err <= 0.01,
            "bound gap " + num(tight) + ", fitted rate " + num(rate) + " vs " + num(expected));
}

void theta_bound_everywhere() {
    int checked = 0;
    std::string bad;
    for (const auto& [name, out] : g_runs) {
        const CheckResult* c = find_check(out, "theta_decay_bound");
        if (!c) continue;
        ++checked;
        if (!c->pass) bad += " " + name;
    }
    verdict(2, "temperature decay bound on every run", checked > 0 && bad.empty(),
            std::to_string(checked) + " runs checked" + (bad.empty() ? "" : ", violated by" + bad));
}

void velocity_decay() {
    const Timed t = run_config("c3", R"({"kind": "decay-study", "kappa": 1, "params": {"T": 5},
        "init": {"theta_rms": 0}})");
    const CheckResult* c = find_check(t.out, "velocity_decay_bound");
    verdict(3, "velocity decay with zero temperature", t.out.exit_code != 2 && c && c->pass,
            c ? c->detail : "no velocity bound check (" + t.out.detail + ")");
}

void dz_growth() {
    const Timed t = run_config("c4", R"({"kind": "decay-study",
        "params": {"T": 10, "nx": 16, "ny": 16, "nz": 8, "sample_every": 10}})");
    if (t.out.exit_code == 2) {
        verdict(4, "z-derivative growth", false, "run failed: " + t.out.detail);
        return;
    }
    const json& g = t.out.report["decay"]["dz_growth"];
    const bool finite = g["finite"].get<bool>() && g["flag"].get<std::string>().empty();
    verdict(4, "z-derivative growth (report only)", finite,
            "log envelope " + num(g["intercept"]) + " + " + num(g["slope"]) + " t over T=10");
}

void galerkin() {
    const Timed t = run_config("c5", R"({"kind": "galerkin-study", "m_schedule": [2, 4, 8, 16],
        "init": {"max_mode": 4, "slope": -3},
        "params": {"nx": 48, "ny": 48, "nz": 24, "T": 1, "dt": 0.002, "sample_every": 10}})");
    if (t.out.exit_code == 2) {
        verdict(5, "truncated-velocity convergence", false, "run failed: " + t.out.detail);
        return;
    }
    const json& r = t.out.report;
    std::string dists;
    for (const auto& l : r["levels"]) dists += (dists.empty() ? "" : ", ") + num(l["r_m"]);
    const double ratio = r["r_last_over_first"].is_number() ? r["r_last_over_first"].get<double>() : NAN;
    const bool pass = r["monotone"].get<bool>() && ratio <= 0.1 && t.seconds <= 600.0;
    verdict(5, "truncated-velocity convergence", pass,
            "r_m = [" + dists + "], r_16/r_2 " + num(ratio) + ", " + num(t.seconds) + " s");
}

void continuous_dependence() {
    const Timed t = run_config("c6", R"({"kind": "perturb", "deltas": [1e-2, 5e-3, 2.5e-3]})");
    if (t.out.exit_code == 2) {
        verdict(6, "continuous dependence", false, "run failed: " + t.out.detail);
        return;
    }
    const json& p = t.out.report["perturbation"];
    const double ratio = p["ratios"].back();
    const bool pass = ratio >= 0.4 && ratio <= 0.6 && p["bound_pass"].get<bool>();
    verdict(6, "continuous dependence", pass,
            "diff ratio " + num(ratio) + ", Gronwall bound " + (p["bound_pass"].get<bool>() ? "holds" : "violated") +
                " with K(T) " + num(p["K_T"]));
}

void inequality_lab() {
    const Timed t = run_config("c7", R"({"kind": "ineq-lab", "seed": 1})");
    std::string detail;
    for (const auto& c : t.out.checks) detail += c.name + (c.pass ? " ok" : " FAILED") + " (" + c.detail + "); ";
    verdict(7, "inequality lab", t.out.exit_code == 0 && t.seconds <= 180.0, detail + num(t.seconds) + " s");
}

void structural() {
    std::string bad;
    for (const auto& [name, out] : g_runs)
        for (const char* check : {"horizontal_means", "divergence", "omega_phi"}) {
            const CheckResult* c = find_check(out, check);
            if (!c || !c->pass) bad += " " + name + "/" + check;
        }
    const Timed a = run_config("c8_a", kSmooth, {"params.T=0.2", "snapshot_every=100"});
    const Timed b = run_config("c8_b", kSmooth, {"params.T=0.2", "snapshot_every=100"});
    const bool same = a.out.exit_code == 0 && b.out.exit_code == 0 &&
                      slurp(kRoot / "c8_a/diagnostics.csv") == slurp(kRoot / "c8_b/diagnostics.csv") &&
                      slurp(kRoot / "c8_a/snapshots/theta_0000200.field") ==
                          slurp(kRoot / "c8_b/snapshots/theta_0000200.field");
    verdict(8, "structural invariants and reproducibility", bad.empty() && same,
            std::to_string(g_runs.size()) + " runs checked" + (bad.empty() ? "" : ", failing:" + bad) +
                (same ? ", repeat run byte-identical" : ", repeat run differs"));
}

} // namespace

int main() {
    fs::remove_all(kRoot);
    const std::vector<std::function<void()>> steps = {energy_identity, theta_decay,  velocity_decay,
                                                      dz_growth,       galerkin,     continuous_dependence,
                                                      inequality_lab,  theta_bound_everywhere, structural};
    for (const auto& s : steps) s();
    std::cout << (g_failures == 0 ? "all criteria passed" : std::to_string(g_failures) + " criteria failed") << '\n';
    return g_failures == 0 ? 0 : 1;
}
