// orbmin: command-line driver for the minimality classifier.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "orbmin/commands.hpp"

namespace {

using namespace orbmin;
using namespace orbmin::cli;

enum Exit { kOk = 0, kNotCritical = 2, kNumeric = 3, kConfig = 4 };

int exit_code(ErrorKind k) {
    switch (k) {
    case ErrorKind::NotCritical:
    case ErrorKind::NotPeriodic:
        return kNotCritical;
    case ErrorKind::ConfigInvalid:
    case ErrorKind::AlphaOutOfRange:
    case ErrorKind::InvalidArgument:
        return kConfig;
    default:
        return kNumeric;
    }
}

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        std::cout.flush();
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw Error(ErrorKind::Io, "cannot open output file '" + out + "'");
    f << text;
    if (!f) throw Error(ErrorKind::Io, "write failed for '" + out + "'");
}

std::string read_file(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorKind::ConfigInvalid, "cannot read config file '" + path + "'");
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Local minimality tests for periodic solutions of Lagrangian systems"};
    app.set_version_flag("--version", std::string(kToolVersion));
    app.require_subcommand(1);

    std::string out;
    std::optional<double> alpha;
    std::string alpha_list;
    int k = 1;
    std::optional<double> period, tmax;
    std::optional<double> rtol, atol;
    std::string eps_schedule;
    std::string format = "csv";
    std::string config;
    std::string mode = "classify";

    auto common = [&](CLI::App* sub) { sub->add_option("--out", out, "Output file (default: stdout)"); };
    auto integ = [&](CLI::App* sub) {
        sub->add_option("--rtol", rtol, "Relative tolerance of the Jacobi integration")->check(CLI::PositiveNumber);
        sub->add_option("--atol", atol, "Absolute tolerance of the Jacobi integration")->check(CLI::PositiveNumber);
    };
    auto alphas = [&](CLI::App* sub) {
        auto* a = sub->add_option("--alpha", alpha, "Single exponent alpha");
        auto* l = sub->add_option("--alpha-list", alpha_list, "Exponents as a:b:step or a comma list");
        a->excludes(l);
        sub->add_option("--k", k, "Winding number of the circular orbit");
        sub->add_option("--period", period, "Period T (default 2*pi*k)")->check(CLI::PositiveNumber);
    };

    auto* jac = app.add_subcommand("kepler-jacobi", "det Y0(t) along circular Kepler orbits (CSV)");
    alphas(jac);
    jac->add_option("--tmax", tmax, "End of the sampled interval (default: period)")->check(CLI::PositiveNumber);
    integ(jac);
    common(jac);

    auto* act = app.add_subcommand("kepler-actions", "Actions of circular and collision-ejection solutions");
    alphas(act);
    act->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    common(act);

    auto* eight = app.add_subcommand("eight", "Figure-eight choreography: trajectory, Jacobi data, classification");
    eight->add_option("mode", mode, "trajectory | jacobi | classify | classify-symmetric")
        ->check(CLI::IsMember({"trajectory", "jacobi", "classify", "classify-symmetric"}));
    integ(eight);
    eight->add_option("--eps-schedule", eps_schedule, "Comma list of epsilon values for the SR test");
    common(eight);

    auto* cls = app.add_subcommand("classify", "Classify the orbit described by a JSON config");
    cls->add_option("--config", config, "Run configuration (JSON)")->required();
    integ(cls);
    cls->add_option("--eps-schedule", eps_schedule, "Comma list of epsilon values for the SR test");
    common(cls);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfig;
    }

    try {
        auto apply_integ = [&](IntegratorOpts& io) {
            if (rtol) io.rtol = *rtol;
            if (atol) io.atol = *atol;
        };
        auto alpha_values = [&]() {
            if (alpha) return std::vector<double>{*alpha};
            if (!alpha_list.empty()) return parse_alpha_list(alpha_list);
            throw Error(ErrorKind::ConfigInvalid, "one of --alpha or --alpha-list is required");
        };
        const double T = period.value_or(2 * std::numbers::pi * std::abs(k));
        if (k == 0) throw Error(ErrorKind::ConfigInvalid, "--k must be nonzero");

        if (*jac) {
            JacobiSweep s;
            s.alphas = alpha_values();
            s.k = k;
            s.period = T;
            s.tmax = tmax.value_or(T);
            apply_integ(s.integ);
            emit(cmd_kepler_jacobi(s), out);
        } else if (*act) {
            const auto rows = kepler_actions(alpha_values(), k, T);
            emit(format == "json" ? kepler_actions_json(rows, k, T).dump(2) + "\n" : kepler_actions_csv(rows, k, T), out);
        } else if (*eight) {
            ClassifyOpts o;
            apply_integ(o.integ);
            if (!eps_schedule.empty()) o.sr.eps_schedule = parse_alpha_list(eps_schedule);
            emit(cmd_eight(parse_eight_mode(mode), o), out);
        } else if (*cls) {
            RunConfig c = parse_config(read_file(config));
            apply_integ(c.classify.integ);
            if (!eps_schedule.empty()) c.classify.sr.eps_schedule = parse_alpha_list(eps_schedule);
            const std::string target = out.empty() ? c.report_path : out;
            emit(cmd_classify(c), target);
        }
    } catch (const Error& e) {
        std::cerr << "orbmin: " << e.what() << "\n";
        return exit_code(e.kind());
    } catch (const std::exception& e) {
        std::cerr << "orbmin: " << e.what() << "\n";
        return kNumeric;
    }
    return kOk;
}
