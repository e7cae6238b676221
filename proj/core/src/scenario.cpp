#include "oblique/scenario.hpp"

#include <algorithm>
#include <fstream>
#include <memory>
#include <sstream>

#include <json.hpp>

#include "oblique/expr.hpp"

namespace oblique {

using nlohmann::json;

const char* to_string(CheckName c) {
    switch (c) {
    case CheckName::Theorem1:    return "theorem1";
    case CheckName::Theorem2:    return "theorem2";
    case CheckName::EfNegative:  return "ef_negative";
    case CheckName::Caligo:      return "caligo";
    case CheckName::Comparisons: return "comparisons";
    }
    return "unknown";
}

const char* to_string(MonitorName m) {
    switch (m) {
    case MonitorName::V1:         return "v1";
    case MonitorName::V2:         return "v2";
    case MonitorName::BoundChain: return "bound_chain";
    }
    return "unknown";
}

namespace {

[[noreturn]] void fail(const std::string& msg) { throw ScenarioError(msg); }

void expect_keys(const json& j, const char* where,
                 std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : allowed)
            if (it.key() == k) { ok = true; break; }
        if (!ok)
            fail(std::string("unknown key '") + it.key() + "' in " + where);
    }
}

double get_num(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_number()) fail(std::string("'") + key + "' must be a number");
    return j[key].get<double>();
}

std::string get_str(const json& j, const char* key, const std::string& fallback = {}) {
    if (!j.contains(key)) return fallback;
    if (!j[key].is_string()) fail(std::string("'") + key + "' must be a string");
    return j[key].get<std::string>();
}

CheckName parse_check_name(const std::string& s) {
    if (s == "theorem1") return CheckName::Theorem1;
    if (s == "theorem2") return CheckName::Theorem2;
    if (s == "ef_negative") return CheckName::EfNegative;
    if (s == "caligo") return CheckName::Caligo;
    if (s == "comparisons") return CheckName::Comparisons;
    fail("unknown check name '" + s + "'");
}

MonitorName parse_monitor_name(const std::string& s) {
    if (s == "v1") return MonitorName::V1;
    if (s == "v2") return MonitorName::V2;
    if (s == "bound_chain") return MonitorName::BoundChain;
    fail("unknown monitor name '" + s + "'");
}

ProblemSpec parse_problem(const json& j) {
    if (!j.is_object()) fail("'problem' must be an object");
    ProblemSpec p;
    const std::string kind = get_str(j, "kind");
    if (kind == "general") {
        expect_keys(j, "problem",
                    {"kind", "f", "df_dv", "df_dt", "envelope_a", "envelope_g"});
        p.kind = ProblemSpec::Kind::General;
        p.f = get_str(j, "f");
        if (p.f.empty()) fail("general problem requires 'f'");
        p.df_dv = get_str(j, "df_dv");
        p.df_dt = get_str(j, "df_dt");
        p.envelope_a = get_str(j, "envelope_a");
        p.envelope_g = get_str(j, "envelope_g");
        if (p.envelope_a.empty() != p.envelope_g.empty())
            fail("envelope_a and envelope_g must be given together");
    } else if (kind == "emden_fowler") {
        expect_keys(j, "problem",
                    {"kind", "n", "A", "A_segments", "A_default", "dA_dt"});
        p.kind = ProblemSpec::Kind::EmdenFowler;
        if (!j.contains("n") || !j["n"].is_number_integer())
            fail("emden_fowler problem requires integer 'n'");
        p.n = j["n"].get<int>();
        if (p.n < 1) fail("'n' must be >= 1");
        p.A = get_str(j, "A");
        p.dA_dt = get_str(j, "dA_dt");
        if (j.contains("A_segments")) {
            if (!p.A.empty()) fail("give either 'A' or 'A_segments', not both");
            if (!j["A_segments"].is_array()) fail("'A_segments' must be an array");
            for (const auto& seg : j["A_segments"]) {
                expect_keys(seg, "A_segments entry", {"from", "to", "expr"});
                PiecewiseSegment s;
                if (!seg.contains("from") || !seg.contains("to") || !seg.contains("expr"))
                    fail("each segment needs 'from', 'to', 'expr'");
                s.from = seg["from"].get<double>();
                s.to = seg["to"].get<double>();
                s.expr = seg["expr"].get<std::string>();
                if (!(s.from < s.to)) fail("segment 'from' must be < 'to'");
                p.A_segments.push_back(std::move(s));
            }
            p.A_default = get_str(j, "A_default", "0");
            // ordered and non-overlapping
            for (std::size_t i = 1; i < p.A_segments.size(); ++i) {
                if (p.A_segments[i].from < p.A_segments[i - 1].to)
                    fail("overlapping or unordered A_segments");
            }
        } else if (p.A.empty()) {
            fail("emden_fowler problem requires 'A' or 'A_segments'");
        }
    } else {
        fail("problem 'kind' must be 'general' or 'emden_fowler'");
    }
    return p;
}

Scenario parse_scenario_json(const json& j) {
    if (!j.is_object()) fail("scenario must be a JSON object");
    expect_keys(j, "scenario",
                {"name", "problem", "ivp", "integration", "breakpoints", "checks",
                 "monitors", "grid", "classify", "estimate_window", "quad"});

    Scenario s;
    s.name = get_str(j, "name");
    if (!j.contains("problem")) fail("scenario requires 'problem'");
    s.problem = parse_problem(j["problem"]);

    if (!j.contains("ivp") || !j["ivp"].is_object()) fail("scenario requires 'ivp'");
    const json& ivp = j["ivp"];
    expect_keys(ivp, "ivp", {"t0", "x0", "xp0"});
    s.ivp.t0 = get_num(ivp, "t0", 1.0);
    s.ivp.x0 = get_num(ivp, "x0", 0.0);
    s.ivp.xp0 = get_num(ivp, "xp0", 0.0);
    if (!(s.ivp.t0 >= 1.0)) fail("ivp: t0 must be >= 1");

    if (!j.contains("integration") || !j["integration"].is_object())
        fail("scenario requires 'integration'");
    const json& in = j["integration"];
    expect_keys(in, "integration",
                {"rel_tol", "abs_tol", "t_end", "blowup_threshold", "h_min_factor",
                 "max_steps", "sample_stride"});
    s.integration.rel_tol = get_num(in, "rel_tol", 1e-9);
    s.integration.abs_tol = get_num(in, "abs_tol", 1e-12);
    if (!in.contains("t_end")) fail("integration requires 't_end'");
    s.integration.t_end = get_num(in, "t_end", 0.0);
    s.integration.blowup_threshold = get_num(in, "blowup_threshold", 1e8);
    s.integration.h_min_factor = get_num(in, "h_min_factor", 1e-12);
    s.integration.max_steps =
        static_cast<long>(get_num(in, "max_steps", 10'000'000.0));
    s.integration.sample_stride =
        static_cast<int>(get_num(in, "sample_stride", 1.0));
    if (!(s.integration.t_end > s.ivp.t0))
        fail("integration: t_end must exceed ivp.t0");
    if (!(s.integration.rel_tol > 0.0) || !(s.integration.abs_tol > 0.0))
        fail("integration: tolerances must be positive");

    if (j.contains("breakpoints")) {
        if (!j["breakpoints"].is_array()) fail("'breakpoints' must be an array");
        for (const auto& b : j["breakpoints"])
            s.integration.breakpoints.push_back(b.get<double>());
    }

    if (j.contains("checks")) {
        if (!j["checks"].is_array()) fail("'checks' must be an array");
        for (const auto& c : j["checks"])
            s.checks.push_back(parse_check_name(c.get<std::string>()));
    }
    if (j.contains("monitors")) {
        if (!j["monitors"].is_array()) fail("'monitors' must be an array");
        for (const auto& m : j["monitors"])
            s.monitors.push_back(parse_monitor_name(m.get<std::string>()));
    }

    const bool is_ef = s.problem.kind == ProblemSpec::Kind::EmdenFowler;
    for (CheckName c : s.checks) {
        if (!is_ef && (c == CheckName::EfNegative || c == CheckName::Caligo ||
                       c == CheckName::Comparisons))
            fail(std::string("check '") + to_string(c) +
                 "' requires an emden_fowler problem");
    }

    if (j.contains("grid")) {
        const json& g = j["grid"];
        expect_keys(g, "grid", {"t_count", "t_max", "log_t", "v_max", "v_count"});
        s.grid.t_count = static_cast<int>(get_num(g, "t_count", 256.0));
        s.grid.t_max = get_num(g, "t_max", 0.0);
        if (g.contains("log_t")) s.grid.log_t = g["log_t"].get<bool>();
        s.grid.v_max = get_num(g, "v_max", 10.0);
        s.grid.v_count = static_cast<int>(get_num(g, "v_count", 128.0));
        make_grid(s.grid, s.ivp.t0); // validates counts/ranges
    }

    if (j.contains("classify")) {
        const json& c = j["classify"];
        expect_keys(c, "classify", {"slope_floor", "limit_tol_rel", "growth_factor"});
        s.classify.slope_floor = get_num(c, "slope_floor", 1e-7);
        s.classify.limit_tol_rel = get_num(c, "limit_tol_rel", 1e-6);
        s.classify.growth_factor = get_num(c, "growth_factor", 10.0);
    }
    if (j.contains("estimate_window"))
        s.estimate_window = static_cast<std::size_t>(get_num(j, "estimate_window", 16.0));
    if (j.contains("quad")) {
        const json& q = j["quad"];
        expect_keys(q, "quad", {"rel", "abs"});
        s.quad.rel = get_num(q, "rel", 1e-8);
        s.quad.abs = get_num(q, "abs", 1e-12);
    }

    // expressions must parse under their declared variables
    build_problem(s.problem);
    return s;
}

using ExprPtr = std::shared_ptr<const Expression>;

ExprPtr compile(const std::string& src, std::vector<std::string> vars,
                const char* field) {
    try {
        return std::make_shared<const Expression>(parse_expression(src, std::move(vars)));
    } catch (const ExprError& e) {
        fail(std::string("in '") + field + "': " + e.what());
    }
}

} // namespace

Scenario parse_scenario_text(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(std::string("config parse error: ") + e.what());
    }
    return parse_scenario_json(j);
}

Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario_text(buf.str());
}

BuiltProblem build_problem(const ProblemSpec& p) {
    BuiltProblem out;
    if (p.kind == ProblemSpec::Kind::General) {
        ExprPtr f = compile(p.f, {"t", "v"}, "f");
        out.nl.f = [f](double t, double v) {
            const double args[2] = {t, v};
            return f->eval(std::span<const double>(args, 2));
        };
        if (!p.df_dv.empty()) {
            ExprPtr e = compile(p.df_dv, {"t", "v"}, "df_dv");
            out.nl.df_dv = [e](double t, double v) {
                const double args[2] = {t, v};
                return e->eval(std::span<const double>(args, 2));
            };
        }
        if (!p.df_dt.empty()) {
            ExprPtr e = compile(p.df_dt, {"t", "v"}, "df_dt");
            out.nl.df_dt = [e](double t, double v) {
                const double args[2] = {t, v};
                return e->eval(std::span<const double>(args, 2));
            };
        }
        if (!p.envelope_a.empty()) {
            ExprPtr a = compile(p.envelope_a, {"t"}, "envelope_a");
            ExprPtr g = compile(p.envelope_g, {"xi"}, "envelope_g");
            out.nl.envelope_a = [a](double t) {
                return a->eval(std::span<const double>(&t, 1));
            };
            out.nl.envelope_g = [g](double xi) {
                return g->eval(std::span<const double>(&xi, 1));
            };
        }
        return out;
    }

    EmdenFowlerCoeff ef;
    ef.n = p.n;
    if (!p.A_segments.empty()) {
        struct Compiled {
            double from, to;
            ExprPtr expr;
        };
        auto segs = std::make_shared<std::vector<Compiled>>();
        for (const auto& s : p.A_segments)
            segs->push_back({s.from, s.to, compile(s.expr, {"t"}, "A_segments.expr")});
        ExprPtr dflt = compile(p.A_default, {"t"}, "A_default");
        ef.A = [segs, dflt](double t) {
            for (const auto& s : *segs)
                if (t >= s.from && t < s.to)
                    return s.expr->eval(std::span<const double>(&t, 1));
            return dflt->eval(std::span<const double>(&t, 1));
        };
    } else {
        ExprPtr a = compile(p.A, {"t"}, "A");
        ef.A = [a](double t) { return a->eval(std::span<const double>(&t, 1)); };
    }
    if (!p.dA_dt.empty()) {
        ExprPtr da = compile(p.dA_dt, {"t"}, "dA_dt");
        ef.dA_dt = [da](double t) { return da->eval(std::span<const double>(&t, 1)); };
    }
    out.ef = ef;
    out.nl = to_nonlinearity(ef);
    return out;
}

SamplingGrid make_grid(const GridSpec& g, double t0) {
    SamplingGrid grid;
    grid.t_lo = t0;
    grid.t_hi = g.t_max > 0.0 ? g.t_max : 1e6 * t0;
    grid.t_count = g.t_count;
    grid.log_t = g.log_t;
    grid.v_max = g.v_max;
    grid.v_count = g.v_count;
    grid.validate();
    return grid;
}

std::string scenario_to_json_text(const Scenario& s) {
    json j;
    j["name"] = s.name;

    json p;
    if (s.problem.kind == ProblemSpec::Kind::General) {
        p["kind"] = "general";
        p["f"] = s.problem.f;
        if (!s.problem.df_dv.empty()) p["df_dv"] = s.problem.df_dv;
        if (!s.problem.df_dt.empty()) p["df_dt"] = s.problem.df_dt;
        if (!s.problem.envelope_a.empty()) {
            p["envelope_a"] = s.problem.envelope_a;
            p["envelope_g"] = s.problem.envelope_g;
        }
    } else {
        p["kind"] = "emden_fowler";
        p["n"] = s.problem.n;
        if (!s.problem.A_segments.empty()) {
            json arr = json::array();
            for (const auto& seg : s.problem.A_segments)
                arr.push_back({{"from", seg.from}, {"to", seg.to}, {"expr", seg.expr}});
            p["A_segments"] = arr;
            p["A_default"] = s.problem.A_default;
        } else {
            p["A"] = s.problem.A;
        }
        if (!s.problem.dA_dt.empty()) p["dA_dt"] = s.problem.dA_dt;
    }
    j["problem"] = p;

    j["ivp"] = {{"t0", s.ivp.t0}, {"x0", s.ivp.x0}, {"xp0", s.ivp.xp0}};
    j["integration"] = {
        {"rel_tol", s.integration.rel_tol},
        {"abs_tol", s.integration.abs_tol},
        {"t_end", s.integration.t_end},
        {"blowup_threshold", s.integration.blowup_threshold},
        {"h_min_factor", s.integration.h_min_factor},
        {"max_steps", s.integration.max_steps},
        {"sample_stride", s.integration.sample_stride},
    };
    if (!s.integration.breakpoints.empty())
        j["breakpoints"] = s.integration.breakpoints;

    json checks = json::array();
    for (CheckName c : s.checks) checks.push_back(to_string(c));
    j["checks"] = checks;
    json monitors = json::array();
    for (MonitorName m : s.monitors) monitors.push_back(to_string(m));
    j["monitors"] = monitors;

    j["grid"] = {{"t_count", s.grid.t_count}, {"t_max", s.grid.t_max},
                 {"log_t", s.grid.log_t},     {"v_max", s.grid.v_max},
                 {"v_count", s.grid.v_count}};
    j["classify"] = {{"slope_floor", s.classify.slope_floor},
                     {"limit_tol_rel", s.classify.limit_tol_rel},
                     {"growth_factor", s.classify.growth_factor}};
    j["estimate_window"] = s.estimate_window;
    j["quad"] = {{"rel", s.quad.rel}, {"abs", s.quad.abs}};
    return j.dump(2);
}

} // namespace oblique
