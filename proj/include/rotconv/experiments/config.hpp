#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "rotconv/lab/study.hpp"
#include "rotconv/model/initial.hpp"
#include "rotconv/model/params.hpp"
#include "rotconv/rng.hpp"

namespace rotconv {

enum class ExperimentKind { Simulate, DecayStudy, GalerkinStudy, Perturb, IneqLab };

inline const char* kind_name(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Simulate: return "simulate";
    case ExperimentKind::DecayStudy: return "decay-study";
    case ExperimentKind::GalerkinStudy: return "galerkin-study";
    case ExperimentKind::Perturb: return "perturb";
    case ExperimentKind::IneqLab: return "ineq-lab";
    }
    return "?";
}

inline std::optional<ExperimentKind> parse_kind(std::string_view s) {
    for (auto k : {ExperimentKind::Simulate, ExperimentKind::DecayStudy, ExperimentKind::GalerkinStudy,
                   ExperimentKind::Perturb, ExperimentKind::IneqLab})
        if (s == kind_name(k)) return k;
    return std::nullopt;
}

/// Named initial-condition generator. The random generator's seed is derived
/// from the run seed, never stored here.
struct InitSpec {
    std::string generator = "random";  // "random", "modes" or "zero"
    double max_mode = 4.0;
    double slope = -2.0;
    double w_rms = 1.0;
    double u_rms = 1.0;
    double theta_rms = 1.0;
    std::vector<ModeSpec> modes;
};

/// Sampler settings of the inequality lab (its seed comes from the run seed).
struct LabSpec {
    std::size_t samples = 1000;
    std::size_t identity_samples = 500;
    int n = 16;
    int nz = 16;
    double L = 2.0 * std::numbers::pi;
    double slope = -2.0;
    double max_mode = 0.0;
    double horizon = 4.0;
    double dt = 1.0 / 64.0;
    std::size_t windows = 8;
};

struct RunConfig {
    ExperimentKind kind = ExperimentKind::Simulate;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    std::string output_dir = "out";
    int snapshot_every = 0;
    Params params;
    InitSpec init;
    double kappa = 1.0;
    std::vector<int> m_schedule{2, 4, 8, 16};
    std::vector<double> deltas{1e-2, 5e-3, 2.5e-3};
    LabSpec lab;

    /// Independent streams split from the run seed.
    std::uint64_t init_seed() const { return CounterRng(seed).split(1)(); }
    std::uint64_t direction_seed() const { return CounterRng(seed).split(2)(); }
    std::uint64_t lab_seed() const { return CounterRng(seed).split(3)(); }

    LabOptions lab_options() const {
        LabOptions o;
        o.seed = lab_seed();
        o.samples = lab.samples;
        o.identity_samples = lab.identity_samples;
        o.n = lab.n;
        o.nz = lab.nz;
        o.L = lab.L;
        o.slope = lab.slope;
        o.max_mode = lab.max_mode;
        o.horizon = lab.horizon;
        o.dt = lab.dt;
        o.windows = lab.windows;
        o.threads = threads;
        return o;
    }

    ModelState initial_state() const {
        const GridPtr grid = params.make_grid();
        if (init.generator == "zero") return ModelState::zero(grid);
        if (init.generator == "modes") return mode_state(grid, init.modes);
        RandomStateSpec s;
        s.seed = init_seed();
        s.max_mode = init.max_mode;
        s.slope = init.slope;
        s.w_rms = init.w_rms;
        s.u_rms = init.u_rms;
        s.theta_rms = init.theta_rms;
        return random_state(grid, s);
    }
};

inline nlohmann::json to_json(const ModeSpec& m) {
    return {{"field", m.field}, {"j", {m.j[0], m.j[1], m.j[2]}}, {"amplitude", m.amplitude}, {"sine", m.sine}};
}

/// Canonical JSON form; every key the parser accepts appears here.
inline nlohmann::json to_json(const RunConfig& c) {
    const Params& p = c.params;
    nlohmann::json modes = nlohmann::json::array();
    for (const auto& m : c.init.modes) modes.push_back(to_json(m));
    return {{"kind", kind_name(c.kind)},
            {"seed", c.seed},
            {"threads", c.threads},
            {"output_dir", c.output_dir},
            {"snapshot_every", c.snapshot_every},
            {"params",
             {{"L", p.L},
              {"Re", p.Re},
              {"Pe", p.Pe},
              {"Gamma", p.Gamma},
              {"epsilon", p.epsilon},
              {"nx", p.nx},
              {"ny", p.ny},
              {"nz", p.nz},
              {"dt", p.dt},
              {"T", p.T},
              {"sample_every", p.sample_every},
              {"dealias", p.dealias == Dealias::TwoThirds ? "two-thirds" : "none"},
              {"coupling", p.coupling == Coupling::Implicit ? "implicit" : "explicit"}}},
            {"init",
             {{"generator", c.init.generator},
              {"max_mode", c.init.max_mode},
              {"slope", c.init.slope},
              {"w_rms", c.init.w_rms},
              {"u_rms", c.init.u_rms},
              {"theta_rms", c.init.theta_rms},
              {"modes", modes}}},
            {"kappa", c.kappa},
            {"m_schedule", c.m_schedule},
            {"deltas", c.deltas},
            {"lab",
             {{"samples", c.lab.samples},
              {"identity_samples", c.lab.identity_samples},
              {"n", c.lab.n},
              {"nz", c.lab.nz},
              {"L", c.lab.L},
              {"slope", c.lab.slope},
              {"max_mode", c.lab.max_mode},
              {"horizon", c.lab.horizon},
              {"dt", c.lab.dt},
              {"windows", c.lab.windows}}}};
}

struct ConfigResult {
    std::optional<RunConfig> config;
    std::vector<std::string> errors;

    bool ok() const { return config.has_value() && errors.empty(); }
};

namespace detail {

inline std::string type_name(const nlohmann::json& j) {
    if (j.is_number_integer() || j.is_number_unsigned()) return "integer";
    if (j.is_number()) return "number";
    return j.type_name();
}

/// Copies `in` over `base`, reporting unknown keys and type mismatches by dotted path.
inline void overlay(nlohmann::json& base, const nlohmann::json& in, const std::string& path,
                    std::vector<std::string>& errs) {
    const nlohmann::json mode_template = to_json(ModeSpec{});
    for (auto it = in.begin(); it != in.end(); ++it) {
        const std::string key = path.empty() ? it.key() : path + "." + it.key();
        if (!base.contains(it.key())) {
            errs.push_back(key + ": unknown key");
            continue;
        }
        nlohmann::json& slot = base[it.key()];
        const nlohmann::json& v = it.value();
        if (slot.is_object()) {
            if (!v.is_object())
                errs.push_back(key + ": expected an object, got " + type_name(v));
            else
                overlay(slot, v, key, errs);
        } else if (slot.is_array()) {
            if (!v.is_array()) {
                errs.push_back(key + ": expected an array, got " + type_name(v));
                continue;
            }
            nlohmann::json arr = nlohmann::json::array();
            for (std::size_t i = 0; i < v.size(); ++i) {
                const std::string ek = key + "[" + std::to_string(i) + "]";
                if (key == "init.modes") {
                    nlohmann::json m = mode_template;
                    if (!v[i].is_object())
                        errs.push_back(ek + ": expected an object, got " + type_name(v[i]));
                    else
                        overlay(m, v[i], ek, errs);
                    arr.push_back(m);
                } else if (!v[i].is_number()) {
                    errs.push_back(ek + ": expected a number, got " + type_name(v[i]));
                } else if ((key == "m_schedule" || key.ends_with(".j")) && !v[i].is_number_integer()) {
                    errs.push_back(ek + ": expected an integer (got " + v[i].dump() + ")");
                } else {
                    arr.push_back(v[i]);
                }
            }
            if (key.ends_with(".j") && v.size() != 3)
                errs.push_back(key + ": expected 3 components (got " + std::to_string(v.size()) + ")");
            else
                slot = arr;
        } else if (slot.is_string()) {
            if (!v.is_string())
                errs.push_back(key + ": expected a string, got " + type_name(v));
            else
                slot = v;
        } else if (slot.is_boolean()) {
            if (!v.is_boolean())
                errs.push_back(key + ": expected a boolean, got " + type_name(v));
            else
                slot = v;
        } else if (slot.is_number_integer() || slot.is_number_unsigned()) {
            if (!v.is_number_integer() && !(v.is_number_float() && std::nearbyint(v.get<double>()) == v.get<double>()))
                errs.push_back(key + ": expected an integer (got " + v.dump() + ")");
            else if (slot.is_number_unsigned() && v.get<double>() < 0)
                errs.push_back(key + ": must be non-negative (got " + v.dump() + ")");
            else
                slot = v.is_number_float() ? nlohmann::json(static_cast<std::int64_t>(v.get<double>())) : v;
        } else if (slot.is_number()) {
            if (!v.is_number())
                errs.push_back(key + ": expected a number, got " + type_name(v));
            else
                slot = v.get<double>();
        }
    }
}

/// Sets `path` (dotted) in `doc` to the JSON value of `text`, or to the string itself
/// if it does not parse as JSON.
inline void apply_override(nlohmann::json& doc, const std::string& assignment, std::vector<std::string>& errs) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos || eq == 0) {
        errs.push_back("--set " + assignment + ": expected <dotted.key>=<value>");
        return;
    }
    const std::string path = assignment.substr(0, eq), text = assignment.substr(eq + 1);
    nlohmann::json value = nlohmann::json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    nlohmann::json* node = &doc;
    std::size_t start = 0;
    for (;;) {
        const auto dot = path.find('.', start);
        const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
        if (key.empty()) {
            errs.push_back("--set " + assignment + ": empty key segment");
            return;
        }
        if (!node->is_object()) *node = nlohmann::json::object();
        if (dot == std::string::npos) {
            (*node)[key] = value;
            return;
        }
        node = &(*node)[key];
        start = dot + 1;
    }
}

inline void validate(const RunConfig& c, std::vector<std::string>& errs) {
    for (const auto& e : c.params.validate()) errs.push_back("params: " + e);
    auto num = [](double v) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        return std::string(buf);
    };
    if (c.threads < 1) errs.push_back("threads: must be >= 1 (got " + std::to_string(c.threads) + ")");
    if (c.output_dir.empty()) errs.push_back("output_dir: must not be empty");
    if (c.snapshot_every < 0) errs.push_back("snapshot_every: must be >= 0 (got " + std::to_string(c.snapshot_every) + ")");
    if (!(c.kappa >= 1.0) || !std::isfinite(c.kappa)) errs.push_back("kappa: must be >= 1 (got " + num(c.kappa) + ")");
    if (c.kind == ExperimentKind::DecayStudy && std::isfinite(c.kappa) && c.params.Pe > 0.0 && c.params.Re > 0.0) {
        const double crit = 2.0 * c.kappa * c.params.Re;
        if (std::abs(c.params.Pe - crit) <= 1e-12 * crit)
            errs.push_back("params.Pe: the decay estimate requires Pe != 2*kappa*Re (got Pe=" + num(c.params.Pe) +
                           ", 2*kappa*Re=" + num(crit) + ")");
    }
    if (c.m_schedule.empty()) errs.push_back("m_schedule: must not be empty");
    else if (c.m_schedule.front() < 2) errs.push_back("m_schedule: must start at >= 2 (got " + std::to_string(c.m_schedule.front()) + ")");
    for (std::size_t i = 1; i < c.m_schedule.size(); ++i)
        if (c.m_schedule[i] <= c.m_schedule[i - 1])
            errs.push_back("m_schedule: must be strictly increasing (entry " + std::to_string(i) + " is " +
                           std::to_string(c.m_schedule[i]) + ")");
    if (c.deltas.empty()) errs.push_back("deltas: must not be empty");
    for (std::size_t i = 0; i < c.deltas.size(); ++i) {
        if (!(c.deltas[i] > 0.0) || !std::isfinite(c.deltas[i]))
            errs.push_back("deltas[" + std::to_string(i) + "]: must be positive (got " + num(c.deltas[i]) + ")");
        else if (i > 0 && !(c.deltas[i] < c.deltas[i - 1]))
            errs.push_back("deltas: must be strictly decreasing (entry " + std::to_string(i) + " is " + num(c.deltas[i]) + ")");
    }
    const auto& in = c.init;
    if (in.generator != "random" && in.generator != "modes" && in.generator != "zero")
        errs.push_back("init.generator: expected random, modes or zero (got " + in.generator + ")");
    for (std::size_t i = 0; i < in.modes.size(); ++i) {
        const auto& m = in.modes[i];
        const std::string k = "init.modes[" + std::to_string(i) + "]";
        if (m.field != "w" && m.field != "omega" && m.field != "theta")
            errs.push_back(k + ".field: expected w, omega or theta (got " + m.field + ")");
        if (m.j[0] == 0 && m.j[1] == 0) errs.push_back(k + ".j: horizontal wavenumber must be nonzero");
        const int ns[3] = {c.params.nx, c.params.ny, c.params.nz};
        for (int d = 0; d < 3; ++d)
            if (2 * std::abs(m.j[d]) >= ns[d])
                errs.push_back(k + ".j: component " + std::to_string(m.j[d]) + " does not fit the grid");
    }
    if (in.generator == "modes" && in.modes.empty()) errs.push_back("init.modes: the modes generator needs at least one mode");
    if (!(in.max_mode > 0.0)) errs.push_back("init.max_mode: must be positive (got " + num(in.max_mode) + ")");
    const std::pair<const char*, double> rms[] = {{"w_rms", in.w_rms}, {"u_rms", in.u_rms}, {"theta_rms", in.theta_rms}};
    for (const auto& [name, v] : rms)
        if (!(v >= 0.0) || !std::isfinite(v)) errs.push_back(std::string("init.") + name + ": must be non-negative (got " + num(v) + ")");
    const auto& l = c.lab;
    if (l.samples < 1) errs.push_back("lab.samples: must be >= 1");
    if (l.n < 4 || l.n % 2 || l.nz < 4 || l.nz % 2) errs.push_back("lab.n, lab.nz: must be even and >= 4");
    if (!(l.L > 0.0)) errs.push_back("lab.L: must be positive (got " + num(l.L) + ")");
    if (!(l.horizon > 1.0)) errs.push_back("lab.horizon: must exceed 1 (got " + num(l.horizon) + ")");
    const double per = l.dt > 0.0 ? 1.0 / l.dt : 0.0;
    if (!(l.dt > 0.0) || std::abs(per - std::round(per)) > 1e-9 || std::fmod(std::round(per), 4.0) != 0.0)
        errs.push_back("lab.dt: must be 1/(4k) for integer k (got " + num(l.dt) + ")");
    if (l.windows < 1) errs.push_back("lab.windows: must be >= 1");
}

inline RunConfig from_json(const nlohmann::json& j) {
    RunConfig c;
    c.kind = parse_kind(j.at("kind").get<std::string>()).value_or(ExperimentKind::Simulate);
    c.seed = j.at("seed").get<std::uint64_t>();
    c.threads = j.at("threads").get<unsigned>();
    c.output_dir = j.at("output_dir").get<std::string>();
    c.snapshot_every = j.at("snapshot_every").get<int>();
    const auto& p = j.at("params");
    c.params.L = p.at("L");
    c.params.Re = p.at("Re");
    c.params.Pe = p.at("Pe");
    c.params.Gamma = p.at("Gamma");
    c.params.epsilon = p.at("epsilon");
    c.params.nx = p.at("nx");
    c.params.ny = p.at("ny");
    c.params.nz = p.at("nz");
    c.params.dt = p.at("dt");
    c.params.T = p.at("T");
    c.params.sample_every = p.at("sample_every");
    c.params.dealias = p.at("dealias") == "none" ? Dealias::None : Dealias::TwoThirds;
    c.params.coupling = p.at("coupling") == "explicit" ? Coupling::Explicit : Coupling::Implicit;
    const auto& in = j.at("init");
    c.init.generator = in.at("generator");
    c.init.max_mode = in.at("max_mode");
    c.init.slope = in.at("slope");
    c.init.w_rms = in.at("w_rms");
    c.init.u_rms = in.at("u_rms");
    c.init.theta_rms = in.at("theta_rms");
    for (const auto& m : in.at("modes")) {
        ModeSpec s;
        s.field = m.at("field");
        const auto& jv = m.at("j");
        for (std::size_t d = 0; d < 3 && d < jv.size(); ++d) s.j[d] = jv[d].get<int>();
        s.amplitude = m.at("amplitude");
        s.sine = m.at("sine");
        c.init.modes.push_back(s);
    }
    c.kappa = j.at("kappa");
    c.m_schedule = j.at("m_schedule").get<std::vector<int>>();
    c.deltas = j.at("deltas").get<std::vector<double>>();
    const auto& l = j.at("lab");
    c.lab.samples = l.at("samples");
    c.lab.identity_samples = l.at("identity_samples");
    c.lab.n = l.at("n");
    c.lab.nz = l.at("nz");
    c.lab.L = l.at("L");
    c.lab.slope = l.at("slope");
    c.lab.max_mode = l.at("max_mode");
    c.lab.horizon = l.at("horizon");
    c.lab.dt = l.at("dt");
    c.lab.windows = l.at("windows");
    return c;
}

} // namespace detail

/// Parses a JSON config, applies dotted `key=value` overrides, and validates.
/// All problems are collected; the config is returned only if there are none.
inline ConfigResult parse_config(std::string_view text, const std::vector<std::string>& overrides = {}) {
    ConfigResult res;
    nlohmann::json in = nlohmann::json::parse(text, nullptr, false);
    if (in.is_discarded()) {
        res.errors.push_back("config is not valid JSON");
        return res;
    }
    if (!in.is_object()) {
        res.errors.push_back("config must be a JSON object");
        return res;
    }
    for (const auto& o : overrides) detail::apply_override(in, o, res.errors);

    if (!in.contains("kind"))
        res.errors.push_back("kind: missing (expected simulate, decay-study, galerkin-study, perturb or ineq-lab)");
    else if (!in["kind"].is_string() || !parse_kind(in["kind"].get<std::string>()))
        res.errors.push_back("kind: expected simulate, decay-study, galerkin-study, perturb or ineq-lab (got " +
                             in["kind"].dump() + ")");
    nlohmann::json doc = to_json(RunConfig{});
    detail::overlay(doc, in, "", res.errors);

    // values that failed their type check keep their defaults, so the rest still gets validated
    RunConfig c = detail::from_json(doc);
    detail::validate(c, res.errors);
    if (res.errors.empty()) res.config = std::move(c);
    return res;
}

inline bool operator==(const RunConfig& a, const RunConfig& b) { return to_json(a) == to_json(b); }

} // namespace rotconv
