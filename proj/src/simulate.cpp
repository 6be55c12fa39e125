#include "relaycancel/simulate.hpp"

#include "relaycancel/discretize.hpp"
#include "relaycancel/error.hpp"

#include <cmath>
#include <cstdio>
#include <random>

namespace relaycancel {

namespace {

// Exact number of fast steps in `span`, or GridMismatch.
long grid_steps(double span, double step, const char* what) {
    const double ratio = span / step;
    const long steps = std::lround(ratio);
    if (std::abs(ratio - static_cast<double>(steps)) > 1e-9 * std::max(1.0, ratio))
        throw Error(ErrorCode::GridMismatch, std::string(what) + " is not a multiple of the simulation step h/M");
    return steps;
}

// Scalar discrete SISO block stepped one sample at a time.
class Block {
public:
    explicit Block(const StateSpace& sys)
        : A_(sys.A()), B_(sys.B().col(0)), C_(sys.C().row(0)), d_(sys.D()(0, 0)), x_(Vector::Zero(sys.states())) {}

    /// Output for input `in` at the current state (does not advance).
    double output(double in) const { return C_.dot(x_) + d_ * in; }
    double free_output() const { return C_.dot(x_); }
    double feedthrough() const { return d_; }
    void advance(double in) { x_ = A_ * x_ + B_ * in; }

private:
    Matrix A_;
    Vector B_;
    Eigen::RowVectorXd C_;
    double d_;
    Vector x_;
};

// Fixed-length delay line of fast samples.
class DelayLine {
public:
    explicit DelayLine(long length) : buf_(static_cast<std::size_t>(length), 0.0) {}

    bool empty() const noexcept { return buf_.empty(); }
    double oldest(std::size_t i) const { return buf_[i % buf_.size()]; }
    void push(std::size_t i, double value) { buf_[i % buf_.size()] = value; }

private:
    std::vector<double> buf_;
};

}  // namespace

bool is_weighted(const InputSpec& input) noexcept { return !std::holds_alternative<RectWave>(input); }

std::vector<double> unit_norm_input(const InputSpec& input, double step, std::size_t steps) {
    std::vector<double> w(steps, 0.0);
    if (const auto* noise = std::get_if<FilteredNoise>(&input)) {
        if (!(noise->active > 0.0)) throw Error(ErrorCode::InvalidArgument, "noise: active span must be positive");
        std::mt19937_64 rng(noise->seed);
        std::normal_distribution<double> normal(0.0, 1.0);
        const auto active = std::min<std::size_t>(steps, static_cast<std::size_t>(std::lround(noise->active / step)));
        double energy = 0.0;
        for (std::size_t i = 0; i < active; ++i) {
            w[i] = normal(rng);
            energy += w[i] * w[i] * step;
        }
        if (energy > 0.0)
            for (auto& x : w) x /= std::sqrt(energy);
    } else if (const auto* pulse = std::get_if<UnitNormPulse>(&input)) {
        if (!(pulse->width > 0.0) || !(pulse->start >= 0.0))
            throw Error(ErrorCode::InvalidArgument, "pulse: need start >= 0 and width > 0");
        const auto first = static_cast<std::size_t>(std::lround(pulse->start / step));
        const auto count = std::max<std::size_t>(1, static_cast<std::size_t>(std::lround(pulse->width / step)));
        const double height = 1.0 / std::sqrt(static_cast<double>(count) * step);
        for (std::size_t i = first; i < std::min(steps, first + count); ++i) w[i] = height;
    } else {
        throw Error(ErrorCode::InvalidArgument, "rectangular waves are not unit-norm inputs");
    }
    return w;
}

SimTrace run(const SimConfig& config) {
    const auto& prob = config.problem;
    const double h = prob.h();
    const int M = config.M;
    if (M < 1 || M % prob.delay.N != 0)
        throw Error(ErrorCode::GridMismatch, "M = " + std::to_string(M) + " is not a positive multiple of N = " +
                                                 std::to_string(prob.delay.N));
    if (!(config.duration > 0.0) || !std::isfinite(config.duration))
        throw Error(ErrorCode::InvalidArgument, "simulation duration must be positive");

    const double step = h / M;
    const auto steps = static_cast<std::size_t>(std::max(1L, std::lround(config.duration / step)));
    const long delay_steps = grid_steps(prob.delay.L, step, "delay L");

    std::optional<Block> canceler;
    if (config.K) {
        const auto& K = config.K->K;
        if (!K.is_discrete() || !(K.domain() == TimeDomain::discrete(h)))
            throw Error(ErrorCode::PeriodMismatch, "controller period does not match h");
        if (K.inputs() != 1 || K.outputs() != 1)
            throw Error(ErrorCode::DimensionMismatch, "controller must be single-input single-output");
        canceler.emplace(K);
    }

    Block coupling(c2d_zoh(series(prob.G, prob.P), step));
    DelayLine delay(delay_steps);

    std::vector<double> w;
    std::optional<Block> weight;
    long rect_period = 0;
    if (const auto* rect = std::get_if<RectWave>(&config.input)) {
        rect_period = grid_steps(rect->period, step, "rectangular wave period");
        if (rect_period < 2) throw Error(ErrorCode::GridMismatch, "rectangular wave period shorter than two steps");
    } else {
        w = unit_norm_input(config.input, step, steps);
        weight.emplace(c2d_zoh(prob.weight, step));
    }
    const auto source = [&](std::size_t i) {
        const auto& rect = std::get<RectWave>(config.input);
        return (static_cast<long>(i) % rect_period) < rect_period / 2 ? rect.amplitude : -rect.amplitude;
    };
    const auto shaped = [&](std::size_t i) {
        const double out = weight->output(w[i]);
        weight->advance(w[i]);
        return out;
    };

    SimTrace trace{M, h, {}, {}, {}, {}, {}, false, config};
    for (auto* col : {&trace.t, &trace.v, &trace.y, &trace.u, &trace.e}) col->reserve(steps);

    const bool feedforward = prob.mode == CancelerMode::Feedforward;
    double held = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const bool sample_instant = i % static_cast<std::size_t>(M) == 0;
        const double c = delay.empty() ? coupling.free_output() : delay.oldest(i);
        double v = 0.0, y = 0.0, u = 0.0, transmitted = 0.0;

        if (feedforward) {
            if (weight) {
                y = shaped(i);
                if (canceler && sample_instant) {
                    held = canceler->output(y);
                    canceler->advance(y);
                }
                u = canceler ? held : 0.0;
                v = y - (c - u);
            } else {
                v = source(i);
                if (canceler && sample_instant) {
                    // y(nh) appears on both sides when K has feedthrough.
                    const double denom = 1.0 + canceler->feedthrough();
                    if (std::abs(denom) < 1e-12)
                        throw Error(ErrorCode::AlgebraicLoop, "canceler feedthrough makes the sampled loop ill-posed");
                    const double ys = (v + c - canceler->free_output()) / denom;
                    held = canceler->output(ys);
                    canceler->advance(ys);
                }
                u = canceler ? held : 0.0;
                y = v + c - u;
            }
            transmitted = y;
        } else {
            v = weight ? shaped(i) : source(i);
            y = v + c;
            if (canceler) {
                if (sample_instant) {
                    held = canceler->output(y);
                    canceler->advance(y);
                }
                u = held;
            } else {
                u = y;
            }
            transmitted = u;
        }

        const double out = coupling.output(transmitted);
        coupling.advance(transmitted);
        if (!delay.empty()) delay.push(i, out);

        const double e = feedforward ? std::abs(y - v) : std::abs(v - u);
        trace.t.push_back(static_cast<double>(i) * step);
        trace.v.push_back(v);
        trace.y.push_back(y);
        trace.u.push_back(u);
        trace.e.push_back(e);

        const double peak = std::max({std::abs(v), std::abs(y), std::abs(u), std::abs(out)});
        if (!(peak <= kDivergenceThreshold)) {
            trace.diverged = true;
            break;
        }
    }
    return trace;
}

double l2_norm(std::span<const double> samples, double step) {
    double acc = 0.0;
    for (const double x : samples) acc += x * x;
    return std::sqrt(acc * step);
}

BoundReport check_bound(const SimTrace& trace, double gamma, double w_norm, double tol) {
    BoundReport r;
    r.error_norm = l2_norm(trace.e, trace.step());
    r.bound = gamma * w_norm;
    if (r.bound > 0.0)
        r.ratio = r.error_norm / r.bound;
    else
        r.ratio = r.error_norm == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    r.pass = !trace.diverged && r.ratio <= 1.0 + tol;
    return r;
}

double rms_reduction(const SimTrace& with_canceler, const SimTrace& without, double t0, double t1) {
    if (with_canceler.rate != without.rate || std::abs(with_canceler.h - without.h) > 1e-12 * without.h)
        throw Error(ErrorCode::GridMismatch, "traces were sampled on different grids");
    const double step = without.step();
    const auto i0 = static_cast<std::size_t>(std::lround(t0 / step));
    const auto i1 = static_cast<std::size_t>(std::lround(t1 / step));
    if (!(t0 >= 0.0) || i1 <= i0 || i1 > with_canceler.size() || i1 > without.size())
        throw Error(ErrorCode::InvalidArgument, "window is not inside both traces");
    double num = 0.0, den = 0.0;
    for (std::size_t i = i0; i < i1; ++i) {
        num += with_canceler.e[i] * with_canceler.e[i];
        den += without.e[i] * without.e[i];
    }
    if (den == 0.0) return num == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    return std::sqrt(num / den);
}

void write_csv(const SimTrace& trace, std::ostream& out) {
    out << "t,v,y,u,e\n";
    char buf[128];
    for (std::size_t i = 0; i < trace.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.15g,%.15g,%.15g,%.15g,%.15g\n", trace.t[i], trace.v[i], trace.y[i],
                      trace.u[i], trace.e[i]);
        out << buf;
    }
}

}  // namespace relaycancel
