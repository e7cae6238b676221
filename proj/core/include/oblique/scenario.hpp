#ifndef OBLIQUE_SCENARIO_HPP
#define OBLIQUE_SCENARIO_HPP

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oblique/asymptote.hpp"
#include "oblique/hypotheses.hpp"
#include "oblique/integrator.hpp"
#include "oblique/numerics.hpp"
#include "oblique/problem.hpp"

namespace oblique {

/// Config or validation failure; what() carries the location/context.
class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A(t) on [from, to); segments are ordered and non-overlapping, the
/// default expression covers everything else.
struct PiecewiseSegment {
    double from = 0.0;
    double to = 0.0;
    std::string expr;
};

struct ProblemSpec {
    enum class Kind { General, EmdenFowler };
    Kind kind = Kind::General;

    // general: expressions in (t, v); envelope in t resp. xi
    std::string f;
    std::string df_dv;
    std::string df_dt;
    std::string envelope_a;
    std::string envelope_g;

    // emden_fowler
    int n = 1;
    std::string A; // exclusive with A_segments
    std::vector<PiecewiseSegment> A_segments;
    std::string A_default = "0";
    std::string dA_dt;
};

enum class CheckName { Theorem1, Theorem2, EfNegative, Caligo, Comparisons };
enum class MonitorName { V1, V2, BoundChain };

const char* to_string(CheckName c);
const char* to_string(MonitorName m);

struct GridSpec {
    int t_count = 256;
    double t_max = 0.0; // 0: defaults to 1e6 * t0
    bool log_t = true;
    double v_max = 10.0;
    int v_count = 128;
};

struct Scenario {
    std::string name;
    ProblemSpec problem;
    IvpSpec ivp;
    IntegrationConfig integration;
    std::vector<CheckName> checks;
    std::vector<MonitorName> monitors;
    GridSpec grid;
    ClassifyConfig classify;
    std::size_t estimate_window = 16;
    QuadTols quad; // quadrature tolerances for monitors
};

/// Parse and validate a scenario from a JSON file / JSON text.
Scenario load_scenario(const std::string& path);
Scenario parse_scenario_text(const std::string& json_text);

/// Canonical JSON round-trip of a scenario (used for the report echo);
/// serializing a parsed scenario is deterministic.
std::string scenario_to_json_text(const Scenario& s);

struct BuiltProblem {
    Nonlinearity nl;
    std::optional<EmdenFowlerCoeff> ef; // set for Kind::EmdenFowler
};

/// Compile the expressions into callables. Parse errors surface as
/// ScenarioError with the offending field named.
BuiltProblem build_problem(const ProblemSpec& p);

SamplingGrid make_grid(const GridSpec& g, double t0);

} // namespace oblique

#endif
