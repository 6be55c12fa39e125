#include "relaycancel/cli.hpp"

#include "relaycancel/discretize.hpp"

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>

namespace relaycancel {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

[[noreturn]] void bad_config(const std::string& detail) { throw Error(ErrorCode::InvalidConfig, detail); }

void reject_unknown(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    std::set<std::string> names(allowed.begin(), allowed.end());
    for (const auto& [key, value] : obj.items())
        if (!names.count(key)) bad_config("unknown key '" + key + "' in " + where);
}

const json& require(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key)) bad_config("missing key '" + std::string(key) + "' in " + where);
    return obj.at(key);
}

double number(const json& v, const std::string& what) {
    if (!v.is_number()) bad_config(what + " must be a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) bad_config(what + " must be finite");
    return x;
}

int integer(const json& v, const std::string& what) {
    if (!v.is_number_integer()) bad_config(what + " must be an integer");
    return v.get<int>();
}

TransferFunction read_tf(const json& v, const std::string& name) {
    if (!v.is_object()) bad_config(name + " must be an object {num, den}");
    reject_unknown(v, {"num", "den"}, name);
    TransferFunction tf;
    for (const auto* field : {"num", "den"}) {
        const json& arr = require(v, field, name);
        if (!arr.is_array() || arr.empty()) bad_config(name + "." + field + " must be a non-empty array");
        auto& out = std::string(field) == "num" ? tf.num : tf.den;
        for (const auto& c : arr) out.push_back(number(c, name + "." + field + " entry"));
    }
    return tf;
}

InputSpec read_input(const json& v) {
    if (!v.is_object()) bad_config("input must be an object");
    const json& kind_v = require(v, "kind", "input");
    if (!kind_v.is_string()) bad_config("input.kind must be a string");
    const auto kind = kind_v.get<std::string>();
    const auto get = [&](const char* key, double fallback) {
        return v.contains(key) ? number(v.at(key), std::string("input.") + key) : fallback;
    };
    if (kind == "rect") {
        reject_unknown(v, {"kind", "period", "amplitude"}, "input");
        return RectWave{get("period", 8.0), get("amplitude", 1.0)};
    }
    if (kind == "noise") {
        reject_unknown(v, {"kind", "seed", "active"}, "input");
        FilteredNoise n;
        if (v.contains("seed")) {
            if (!v.at("seed").is_number_unsigned()) bad_config("input.seed must be a nonnegative integer");
            n.seed = v.at("seed").get<std::uint64_t>();
        }
        n.active = get("active", n.active);
        return n;
    }
    if (kind == "pulse") {
        reject_unknown(v, {"kind", "start", "width"}, "input");
        return UnitNormPulse{get("start", 0.0), get("width", 1.0)};
    }
    bad_config("input.kind must be one of rect, noise, pulse");
}

json tf_json(const TransferFunction& tf) { return {{"num", tf.num}, {"den", tf.den}}; }

json input_json(const InputSpec& input) {
    return std::visit(
        [](const auto& in) -> json {
            using T = std::decay_t<decltype(in)>;
            if constexpr (std::is_same_v<T, RectWave>)
                return {{"kind", "rect"}, {"period", in.period}, {"amplitude", in.amplitude}};
            else if constexpr (std::is_same_v<T, FilteredNoise>)
                return {{"kind", "noise"}, {"seed", in.seed}, {"active", in.active}};
            else
                return {{"kind", "pulse"}, {"start", in.start}, {"width", in.width}};
        },
        input);
}

json resolved(const RunConfig& c) {
    return {{"mode", std::string(to_string(c.mode))},
            {"P", tf_json(c.P)},
            {"G", tf_json(c.G)},
            {"weight", tf_json(c.weight)},
            {"L", c.L},
            {"h", c.h},
            {"N", c.N},
            {"M", c.M},
            {"meas_reg", c.meas_reg},
            {"gamma_tol", c.gamma_tol},
            {"input", input_json(c.input)},
            {"duration", c.duration},
            {"out_dir", c.out_dir}};
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

fs::path prepare_out(const RunConfig& config, const std::string& override_dir) {
    fs::path dir = override_dir.empty() ? fs::path(config.out_dir) : fs::path(override_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
    return dir;
}

Controller load_controller(const std::string& path) { return controller_from_json(read_file(path)); }

template <class Body>
int guarded(Body&& body) {
    try {
        body();
        return 0;
    } catch (const Error& e) {
        std::cerr << "ERROR " << to_string(e.code()) << ": " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "ERROR NumericalFailure: " << e.what() << '\n';
        return 3;
    }
}

std::vector<double> log_grid(double lo, double hi, int count) {
    std::vector<double> pts(static_cast<std::size_t>(count));
    const double a = std::log10(lo), b = std::log10(hi);
    for (int i = 0; i < count; ++i) pts[static_cast<std::size_t>(i)] = std::pow(10.0, a + (b - a) * i / (count - 1));
    pts.back() = hi;
    return pts;
}

std::string magnitude_csv(const StateSpace& sys, const std::vector<double>& points) {
    const auto resp = freq_response(sys, points);
    std::string out = "freq,mag\n";
    char buf[64];
    for (std::size_t i = 0; i < points.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g\n", points[i], max_singular_value(resp[i]));
        out += buf;
    }
    return out;
}

}  // namespace

StateSpace TransferFunction::realize() const { return from_tf(num, den, TimeDomain::continuous()); }

RunConfig parse_config(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::exception& e) {
        bad_config(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) bad_config("config must be a JSON object");
    reject_unknown(doc,
                   {"mode", "P", "G", "weight", "L", "h", "N", "M", "meas_reg", "gamma_tol", "input", "duration",
                    "out_dir"},
                   "config");
    RunConfig c;
    const json& mode = require(doc, "mode", "config");
    if (mode == "feedforward")
        c.mode = CancelerMode::Feedforward;
    else if (mode == "feedback")
        c.mode = CancelerMode::Feedback;
    else
        bad_config("mode must be \"feedforward\" or \"feedback\"");
    c.P = read_tf(require(doc, "P", "config"), "P");
    c.G = read_tf(require(doc, "G", "config"), "G");
    c.weight = read_tf(require(doc, "weight", "config"), "weight");
    c.L = number(require(doc, "L", "config"), "L");
    c.h = number(require(doc, "h", "config"), "h");
    c.N = integer(require(doc, "N", "config"), "N");
    if (doc.contains("M")) c.M = integer(doc.at("M"), "M");
    if (doc.contains("meas_reg")) c.meas_reg = number(doc.at("meas_reg"), "meas_reg");
    if (doc.contains("gamma_tol")) c.gamma_tol = number(doc.at("gamma_tol"), "gamma_tol");
    if (doc.contains("input")) c.input = read_input(doc.at("input"));
    if (doc.contains("duration")) c.duration = number(doc.at("duration"), "duration");
    if (doc.contains("out_dir")) {
        if (!doc.at("out_dir").is_string()) bad_config("out_dir must be a string");
        c.out_dir = doc.at("out_dir").get<std::string>();
    }
    if (!(c.gamma_tol > 0.0 && c.gamma_tol < 1.0)) bad_config("gamma_tol must lie in (0, 1)");
    return c;
}

RunConfig load_config(const std::string& path) { return parse_config(read_file(path)); }

std::string config_to_json(const RunConfig& config) { return resolved(config).dump(2) + "\n"; }

DesignProblem make_problem(const RunConfig& c) {
    const DelaySpec delay = delay_decompose(c.L, c.h, c.N);
    return DesignProblem(c.P.realize(), c.G.realize(), c.weight.realize(), delay, c.mode, c.meas_reg);
}

SimConfig make_sim_config(const RunConfig& c, std::optional<Controller> K) {
    return SimConfig{make_problem(c), std::move(K), c.M, c.duration, c.input};
}

int exit_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::Infeasible: return 2;
        case ErrorCode::NumericalFailure:
        case ErrorCode::SingularResolvent:
        case ErrorCode::NoStabilizingSolution:
        case ErrorCode::IterationDivergence:
        case ErrorCode::PoleAtMinusOne:
        case ErrorCode::Unstable: return 3;
        default: return 1;
    }
}

int cmd_design(const std::string& config_path, const std::string& out_dir) {
    return guarded([&] {
        const RunConfig config = load_config(config_path);
        const DesignProblem problem = make_problem(config);
        const GeneralizedPlant plant = build_plant(problem, config.N);
        SynthesisOptions opts;
        opts.gamma_tol = config.gamma_tol;
        opts.require_stable_controller = config.mode == CancelerMode::Feedforward;
        const SynthesisResult result = synthesize(plant, opts);
        const fs::path dir = prepare_out(config, out_dir);

        json history = json::array();
        for (const auto& p : result.report.gamma_history)
            history.push_back({{"gamma", p.gamma}, {"feasible", p.feasible}});
        const json report = {{"gamma", result.report.gamma_opt},
                             {"order", result.report.order},
                             {"residuals", {result.controller.residuals.first, result.controller.residuals.second}},
                             {"closed_loop_radius", result.report.closed_loop_radius},
                             {"open_loop_norm", result.report.open_loop_norm},
                             {"iterations", result.controller.iterations},
                             {"gamma_history", history},
                             {"config", resolved(config)}};
        write_file(dir / "K.json", controller_to_json(result.controller));
        write_file(dir / "report.json", report.dump(2) + "\n");
    });
}

int cmd_simulate(const std::string& config_path, const std::optional<std::string>& controller_path,
                 const std::string& out_dir) {
    return guarded([&] {
        const RunConfig config = load_config(config_path);
        std::optional<Controller> K;
        if (controller_path) K = load_controller(*controller_path);
        const SimTrace trace = run(make_sim_config(config, K));

        json ratio = nullptr;
        if (K) {
            const SimTrace bare = run(make_sim_config(config, std::nullopt));
            const double t0 = config.duration > 4.0 * config.h ? 4.0 * config.h : 0.0;
            const double t1 = static_cast<double>(std::min(trace.size(), bare.size())) * trace.step();
            ratio = rms_reduction(trace, bare, t0, t1);
        }
        const json metrics = {{"l2_error", l2_norm(trace.e, trace.step())},
                              {"rms_ratio_vs_none", ratio},
                              {"diverged", trace.diverged},
                              {"samples", trace.size()},
                              {"controller", controller_path ? json(*controller_path) : json(nullptr)},
                              {"config", resolved(config)}};
        const fs::path dir = prepare_out(config, out_dir);
        std::ostringstream csv;
        write_csv(trace, csv);
        write_file(dir / "trace.csv", csv.str());
        write_file(dir / "metrics.json", metrics.dump(2) + "\n");
    });
}

int cmd_freqresp(const std::string& config_path, const std::optional<std::string>& controller_path,
                 const std::string& out_dir) {
    return guarded([&] {
        constexpr int kPoints = 512;
        const RunConfig config = load_config(config_path);
        const DesignProblem problem = make_problem(config);
        const GeneralizedPlant plant = build_plant(problem, config.N);
        const StateSpace error_sys = controller_path ? close_lft(plant, load_controller(*controller_path))
                                                     : plant.p11();
        const auto omega = log_grid(1e-3, 1e3, kPoints);
        const auto theta = log_grid(1e-4, M_PI, kPoints);

        const fs::path dir = prepare_out(config, out_dir);
        write_file(dir / "freq_P.csv", magnitude_csv(problem.P, omega));
        write_file(dir / "freq_GP.csv", magnitude_csv(series(problem.G, problem.P), omega));
        write_file(dir / "freq_weight.csv", magnitude_csv(problem.weight, omega));
        write_file(dir / "freq_error.csv", magnitude_csv(error_sys, theta));
    });
}

}  // namespace relaycancel
