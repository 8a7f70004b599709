#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "rotconv/diagnostics/csv.hpp"
#include "rotconv/diagnostics/decay.hpp"
#include "rotconv/diagnostics/ledger.hpp"
#include "rotconv/diagnostics/perturbation.hpp"
#include "rotconv/experiments/config.hpp"
#include "rotconv/galerkin/scheme.hpp"
#include "rotconv/lab/study.hpp"
#include "rotconv/spectral/snapshot.hpp"
#include "rotconv/util/checksum.hpp"
#include "rotconv/version.hpp"

namespace rotconv {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct RunOutcome {
    int exit_code = 0;
    std::string status;  // "ok", "checks-failed", "blow-up", "io-error", "runtime-error"
    std::string detail;
    std::vector<CheckResult> checks;
    std::vector<std::string> warnings;
    std::vector<std::string> files;  // relative to the output directory
    nlohmann::json report;
};

/// Tolerances of the structural checks applied to every sampled row.
inline constexpr double kMeanDefectTol = 1e-12;
inline constexpr double kDivDefectTol = 1e-13;
inline constexpr double kOmegaPhiTol = 1e-11;

inline std::vector<CheckResult> structural_checks(const DiagnosticsSeries& rows) {
    double mean = 0.0, div = 0.0, op = 0.0;
    for (const auto& r : rows) {
        mean = std::max(mean, r.mean_defect);
        div = std::max(div, r.div_defect);
        op = std::max(op, r.omega_phi_defect);
    }
    auto fmt = [](double v, double tol) {
        char buf[16];
        std::snprintf(buf, sizeof buf, "%g", tol);
        return format_double(v) + " <= " + buf;
    };
    return {{"horizontal_means", mean <= kMeanDefectTol, fmt(mean, kMeanDefectTol)},
            {"divergence", div <= kDivDefectTol, fmt(div, kDivDefectTol)},
            {"omega_phi", op <= kOmegaPhiTol, fmt(op, kOmegaPhiTol)}};
}

/// ||theta(t)||^2 <= exp(-2t/(gamma Pe)) ||theta0||^2 at every row.
inline CheckResult theta_bound_check(const DiagnosticsSeries& rows, const Params& p) {
    std::vector<double> t, q;
    for (const auto& r : rows) {
        t.push_back(r.t);
        q.push_back(r.theta2);
    }
    const BoundCheck b = check_exponential_bound(t, q, 2.0 / (p.gamma() * p.Pe), kBoundSlack);
    return {"theta_decay_bound", b.pass, "worst margin " + format_double(b.worst_margin)};
}

namespace detail {

inline std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Writes through a temporary sibling and renames into place.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
    const auto tmp = std::filesystem::path(path.string() + ".tmp");
    {
        std::ofstream out(tmp, std::ios::binary);
        if (!out) throw std::ios_base::failure("cannot open " + tmp.string());
        out << content;
        out.flush();
        if (!out) throw std::ios_base::failure("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

inline void fail_run(RunOutcome& out, std::string status, std::string detail) {
    out.exit_code = 2;
    out.status = std::move(status);
    out.detail = std::move(detail);
}

inline nlohmann::json checks_json(const std::vector<CheckResult>& checks) {
    nlohmann::json a = nlohmann::json::array();
    for (const auto& c : checks) a.push_back({{"name", c.name}, {"pass", c.pass}, {"detail", c.detail}});
    return a;
}

/// Streams rows to diagnostics.csv.tmp; finish() moves it into place, also after a blow-up.
class CsvSink {
  public:
    CsvSink(const std::filesystem::path& dir, bool with_level)
        : path_(dir / "diagnostics.csv"), tmp_(path_.string() + ".tmp"), out_(tmp_, std::ios::binary) {
        if (!out_) throw std::ios_base::failure("cannot open " + tmp_.string());
        write_csv_header(out_, with_level);
    }
    void row(const DiagnosticsRow& r, std::optional<int> level = std::nullopt) { write_csv_row(out_, r, level); }
    void finish() {
        if (done_) return;
        done_ = true;
        out_.flush();
        if (!out_) throw std::ios_base::failure("write failed: " + tmp_.string());
        out_.close();
        std::filesystem::rename(tmp_, path_);
    }

  private:
    std::filesystem::path path_, tmp_;
    std::ofstream out_;
    bool done_ = false;
};

class SnapshotWriter {
  public:
    SnapshotWriter(const std::filesystem::path& dir, std::vector<std::string>& files) : dir_(dir / "snapshots"), files_(files) {}

    void operator()(const ModelState& s, std::size_t step) {
        std::filesystem::create_directories(dir_);
        char stem[32];
        std::snprintf(stem, sizeof stem, "%07zu", step);
        const std::pair<const char*, const SpectralField*> fields[] = {{"w", &s.w}, {"omega", &s.omega}, {"theta", &s.theta}};
        for (const auto& [name, f] : fields) {
            const std::string rel = std::string("snapshots/") + name + "_" + stem + ".field";
            std::ostringstream buf;
            write_snapshot(buf, Snapshot{name, s.t, *f});
            write_atomic(dir_.parent_path() / rel, buf.str());
            files_.push_back(rel);
        }
    }

  private:
    std::filesystem::path dir_;
    std::vector<std::string>& files_;
};

inline SimulationResult simulate_to_disk(const ModelState& init, const Params& p, const RunConfig& cfg,
                                         const std::filesystem::path& dir, RunOutcome& out) {
    CsvSink csv(dir, false);
    SnapshotWriter snaps(dir, out.files);
    SimulationSinks sinks;
    sinks.on_row = [&](const DiagnosticsRow& r) { csv.row(r); };
    if (cfg.snapshot_every > 0) {
        snaps(init, 0);
        sinks.snapshot_every = static_cast<std::size_t>(cfg.snapshot_every);
        sinks.on_snapshot = [&](const ModelState& s, std::size_t n) { snaps(s, n); };
    }
    out.files.insert(out.files.begin(), "diagnostics.csv");
    try {
        SimulationResult res = simulate(init, p, sinks);
        csv.finish();
        return res;
    } catch (...) {
        csv.finish();
        throw;
    }
}

inline nlohmann::json trajectory_summary(const DiagnosticsSeries& rows) {
    double mean = 0.0, div = 0.0, op = 0.0;
    for (const auto& r : rows) {
        mean = std::max(mean, r.mean_defect);
        div = std::max(div, r.div_defect);
        op = std::max(op, r.omega_phi_defect);
    }
    nlohmann::json j = {{"samples", rows.size()},
                        {"max_normalized_energy_residual", max_normalized_residual(rows)},
                        {"max_mean_defect", mean},
                        {"max_div_defect", div},
                        {"max_omega_phi_defect", op}};
    if (!rows.empty()) {
        const auto& r = rows.back();
        j["final"] = {{"t", r.t}, {"w2", r.w2}, {"u2", r.u2}, {"theta2", r.theta2}, {"energy", r.energy}};
    }
    return j;
}

inline void run_simulate(const RunConfig& cfg, const std::filesystem::path& dir, RunOutcome& out) {
    const SimulationResult res = simulate_to_disk(cfg.initial_state(), cfg.params, cfg, dir, out);
    out.checks = structural_checks(res.rows);
    out.checks.push_back(theta_bound_check(res.rows, cfg.params));
    out.report = trajectory_summary(res.rows);
}

inline void run_decay(const RunConfig& cfg, const std::filesystem::path& dir, RunOutcome& out) {
    validate_kappa(cfg.kappa, cfg.params);
    const SimulationResult res = simulate_to_disk(cfg.initial_state(), cfg.params, cfg, dir, out);
    const DecayReport rep = decay_rates(res.rows, cfg.params, cfg.kappa);
    out.checks = structural_checks(res.rows);
    out.checks.push_back({"theta_decay_bound", rep.bound_a.pass, "worst margin " + format_double(rep.bound_a.worst_margin)});
    if (rep.bound_b.checked)
        out.checks.push_back(
            {"velocity_decay_bound", rep.bound_b.pass, "worst margin " + format_double(rep.bound_b.worst_margin)});
    out.checks.push_back({"gradient_rate_sign", rep.gradient_pass, rep.gradient_fit.flag});
    out.report = {{"decay", to_json(rep)}, {"trajectory", trajectory_summary(res.rows)}};
}

inline void run_galerkin(const RunConfig& cfg, const std::filesystem::path& dir, RunOutcome& out) {
    CsvSink csv(dir, true);
    out.files.push_back("diagnostics.csv");
    IterationOptions opt;
    opt.on_level = [&](const LevelReport& l) {
        for (const auto& r : l.rows) csv.row(r, l.m);
    };
    const IterationReport rep = iterate_scheme(cfg.initial_state(), cfg.params, cfg.m_schedule, opt);
    csv.finish();
    out.report = to_json(rep);
    if (!rep.complete) {
        detail::fail_run(out, "blow-up", rep.error);
        return;
    }
    DiagnosticsSeries all;
    double support = 0.0;
    for (const auto& l : rep.levels) {
        all.insert(all.end(), l.rows.begin(), l.rows.end());
        support = std::max(support, l.max_support_defect);
    }
    out.checks = structural_checks(all);
    out.checks.push_back({"level_support", support <= 1e-12, format_double(support) + " <= 1e-12"});
    out.checks.push_back({"distance_decreasing", rep.monotone, rep.flags.empty() ? "" : rep.flags.front()});
}

inline void run_perturb(const RunConfig& cfg, const std::filesystem::path& dir, RunOutcome& out) {
    PerturbationOptions opt;
    opt.direction_seed = cfg.direction_seed();
    opt.direction.max_mode = cfg.init.max_mode;
    opt.direction.slope = cfg.init.slope;
    opt.threads = cfg.threads;
    const PerturbationReport rep = perturbation_study(cfg.initial_state(), cfg.deltas, cfg.params, opt);
    {
        CsvSink csv(dir, false);
        for (const auto& r : rep.reference_rows) csv.row(r);
        csv.finish();
        out.files.push_back("diagnostics.csv");
    }
    out.report = {{"perturbation", to_json(rep)}, {"trajectory", trajectory_summary(rep.reference_rows)}};
    if (!rep.complete) {
        std::string why = "perturbed trajectory blew up";
        for (const auto& s : rep.samples)
            if (!s.flag.empty()) why = s.flag;
        detail::fail_run(out, "blow-up", why);
        return;
    }
    out.checks = structural_checks(rep.reference_rows);
    out.checks.push_back(theta_bound_check(rep.reference_rows, cfg.params));
    std::string ratio = rep.ratios.empty() ? "single delta" : "last ratio " + format_double(rep.ratios.back());
    out.checks.push_back({"first_order_scaling", rep.scaling_pass || cfg.deltas.size() < 2, ratio});
    out.checks.push_back({"gronwall_bound", rep.bound_pass, "K(T) = " + format_double(rep.K_T)});
}

inline void run_ineq_lab(const RunConfig& cfg, RunOutcome& out) {
    const LabReport rep = run_lab(cfg.lab_options());
    out.report = to_json(rep);
    for (const auto& l : rep.lemmas) {
        const std::string d = l.constant_free ? std::to_string(l.violations) + " violations"
                                              : "max ratio " + format_double(l.max_ratio) + " -> " +
                                                    format_double(l.refined_max_ratio);
        out.checks.push_back({l.lemma, l.pass(), d});
    }
    out.checks.push_back({"identities", rep.identities.pass(),
                          "max residual " + format_double(std::max(rep.identities.max_base.max(),
                                                                   rep.identities.max_refined.max()))});
}

} // namespace detail

/// Runs one experiment, writing diagnostics.csv, report.json, snapshots and
/// manifest.json under cfg.output_dir. Exit code 0 when every check passes,
/// 1 when a check fails, 2 on blow-up or I/O failure; anything but 0 also
/// prints one `rotconv-status:` line to `err`.
inline RunOutcome run(const RunConfig& cfg, std::ostream& err = std::cerr) {
    namespace fs = std::filesystem;
    RunOutcome out;
    const std::string started = detail::utc_now();
    const fs::path dir = cfg.output_dir;

    if (cfg.params.coupling == Coupling::Explicit) {
        const double bound = coupling_stability_bound(cfg.params);
        if (cfg.params.dt > bound) {
            out.warnings.push_back("dt " + format_double(cfg.params.dt) + " exceeds the explicit coupling bound " +
                                   format_double(bound));
            err << "warning: " << out.warnings.back() << '\n';
        }
    }

    try {
        fs::create_directories(dir);
        switch (cfg.kind) {
        case ExperimentKind::Simulate: detail::run_simulate(cfg, dir, out); break;
        case ExperimentKind::DecayStudy: detail::run_decay(cfg, dir, out); break;
        case ExperimentKind::GalerkinStudy: detail::run_galerkin(cfg, dir, out); break;
        case ExperimentKind::Perturb: detail::run_perturb(cfg, dir, out); break;
        case ExperimentKind::IneqLab: detail::run_ineq_lab(cfg, out); break;
        }
        if (out.exit_code == 0) {
            out.status = "ok";
            std::vector<std::string> failed;
            for (const auto& c : out.checks)
                if (!c.pass) failed.push_back(c.name);
            if (!failed.empty()) {
                out.exit_code = 1;
                out.status = "checks-failed";
                for (std::size_t i = 0; i < failed.size(); ++i) out.detail += (i ? "," : "") + failed[i];
            }
        }
    } catch (const BlowUp& e) {
        out.exit_code = 2;
        out.status = "blow-up";
        out.detail = e.what();
    } catch (const fs::filesystem_error& e) {
        out.exit_code = 2;
        out.status = "io-error";
        out.detail = e.what();
    } catch (const std::ios_base::failure& e) {
        out.exit_code = 2;
        out.status = "io-error";
        out.detail = e.what();
    } catch (const std::exception& e) {
        out.exit_code = 2;
        out.status = "runtime-error";
        out.detail = e.what();
    }

    try {
        nlohmann::json report = {{"kind", kind_name(cfg.kind)},
                                 {"status", out.status},
                                 {"checks", detail::checks_json(out.checks)},
                                 {"result", out.report}};
        if (!out.detail.empty()) report["detail"] = out.detail;
        detail::write_atomic(dir / "report.json", report.dump(2) + "\n");
        out.files.push_back("report.json");

        nlohmann::json files = nlohmann::json::array();
        for (const auto& f : out.files) {
            const fs::path p = dir / f;
            files.push_back({{"path", f}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p.string())}});
        }
        const nlohmann::json manifest = {{"config", to_json(cfg)},
                                         {"version", kVersion},
                                         {"started", started},
                                         {"finished", detail::utc_now()},
                                         {"threads", cfg.threads},
                                         {"exit_code", out.exit_code},
                                         {"status", out.status},
                                         {"warnings", out.warnings},
                                         {"checks", detail::checks_json(out.checks)},
                                         {"files", files}};
        detail::write_atomic(dir / "manifest.json", manifest.dump(2) + "\n");
    } catch (const std::exception& e) {
        out.exit_code = 2;
        out.status = "io-error";
        out.detail = e.what();
    }

    if (out.exit_code != 0) {
        std::string d = out.detail;
        std::replace(d.begin(), d.end(), '\n', ' ');
        err << "rotconv-status: code=" << out.exit_code << " status=" << out.status << " kind=" << kind_name(cfg.kind)
            << " detail=" << std::quoted(d) << '\n';
    }
    return out;
}

} // namespace rotconv
