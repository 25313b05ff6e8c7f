#include "harvest/montecarlo.hpp"

#include "harvest/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>
#include <thread>

namespace harvest {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Per-path stream: depends only on (seed, path index).
std::mt19937_64 path_engine(std::uint64_t seed, std::size_t path) {
    const std::uint64_t s = splitmix64(splitmix64(seed) ^ splitmix64(0xD1B54A32D192ED03ULL * (path + 1)));
    return std::mt19937_64(s);
}

struct BMCoef {
    double mu, sigma;
    double drift(double) const { return mu; }
    double vol(double) const { return sigma; }
};
struct GBMCoef {
    double mu, sigma;
    double drift(double x) const { return mu * x; }
    double vol(double x) const { return sigma * x; }
};
struct LogisticCoef {
    double mu, capacity, sigma;
    double drift(double x) const { return mu * x * (1.0 - x / capacity); }
    double vol(double x) const { return sigma * x; }
};

struct PathOutcome {
    double discounted_local_time = 0.0;
    bool extinct = false;
};

template <class Coef, class Sink>
PathOutcome run_path(const Coef& coef, double start, double barrier, double r, double dt, std::size_t steps,
                     const SimConfig& cfg, std::size_t path, Sink&& sink) {
    PathOutcome out;
    auto eng = path_engine(cfg.seed, path);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double sqdt = std::sqrt(dt);
    const double floor = cfg.extinction_floor;
    const double decay = std::exp(-r * dt);

    double x = start;
    sink(0.0, x, 0.0);
    if (x <= floor) {
        out.extinct = true;
        return out;
    }
    double disc = 1.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < steps; ++k) {
        const double v = coef.vol(x);
        const double proposal = x + coef.drift(x) * dt + v * sqdt * normal(eng);
        disc *= decay;
        const double t = static_cast<double>(k + 1) * dt;
        if (proposal <= floor) {
            out.extinct = true;
            sink(t, floor, 0.0);
            break;
        }
        if (cfg.bridge_extinction) {
            // P(bridge from x to proposal touches floor) = exp(-2 (x-f)(y-f) / (v^2 dt))
            const double arg = 2.0 * (x - floor) * (std::min(proposal, barrier) - floor) / (v * v * dt);
            if (arg < 40.0 && unif(eng) < std::exp(-arg)) {
                out.extinct = true;
                sink(t, floor, 0.0);
                break;
            }
        }
        double dl = 0.0;
        if (proposal > barrier) {
            dl = proposal - barrier;
            x = barrier;
            acc += disc * dl;
        } else {
            x = proposal;
        }
        sink(t, x, dl);
    }
    out.discounted_local_time = acc;
    return out;
}

template <class F>
auto with_coefficients(const ModelSpec& m, F&& f) {
    return std::visit(overloaded{
                          [&](const DriftedBM& p) { return f(BMCoef{p.mu, p.sigma}); },
                          [&](const GBM& p) { return f(GBMCoef{p.mu, p.sigma}); },
                          [&](const Logistic& p) { return f(LogisticCoef{p.mu, p.capacity, p.sigma}); },
                      },
                      m.family());
}

double start_state(const PolicySpec& policy, double x0) { return std::min(x0, barrier_of(policy)); }

// E int_T^inf e^{-rs} dL <= e^{-rT} (b + sup_{0<=x<=b} (drift(x) - r x)^+ / r)
double tail_bound_for(const ModelSpec& m, double barrier, double horizon) {
    double sup = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double x = barrier * i / 200.0;
        sup = std::max(sup, drift_at(m, x) - m.discount() * x);
    }
    return std::exp(-m.discount() * horizon) * yield_at(m, barrier) * (barrier + sup / m.discount());
}

void check_x0(double x0) {
    if (!(x0 > 0.0)) {
        std::ostringstream msg;
        msg << "initial population x0 must be > 0 (got " << x0 << ")";
        fail(ErrorKind::Domain, "montecarlo", msg.str());
    }
}

}  // namespace

double barrier_of(const PolicySpec& p) noexcept {
    return std::visit([](const auto& q) { return q.barrier; }, p);
}

std::string describe(const PolicySpec& p) {
    std::ostringstream os;
    os.precision(17);
    std::visit(overloaded{
                   [&](const ReflectAt& q) { os << "reflect(b=" << q.barrier << ")"; },
                   [&](const JumpThenReflect& q) { os << "jump(b=" << q.barrier << ")"; },
                   [&](const Chatter& q) { os << "chatter(b=" << q.barrier << ",n=" << q.n << ")"; },
                   [&](const RelaxedSweep& q) { os << "sweep(b=" << q.barrier << ")"; },
               },
               p);
    return os.str();
}

double effective_horizon(const ModelSpec& m, const SimConfig& cfg) {
    return cfg.horizon > 0.0 ? cfg.horizon : std::log(1e4) / m.discount();
}

void validate(const ModelSpec& m, const SimConfig& cfg) {
    auto bad = [](const std::string& what) { fail(ErrorKind::Config, "montecarlo", what); };
    if (!(cfg.dt > 0.0) || !std::isfinite(cfg.dt)) bad("dt must be > 0");
    if (cfg.dt > 1e-2 / m.discount()) bad("dt must not exceed 1e-2 / r");
    if (!(cfg.horizon >= 0.0) || !std::isfinite(cfg.horizon)) bad("horizon must be >= 0 (0 selects automatic)");
    if (effective_horizon(m, cfg) < cfg.dt) bad("horizon shorter than one step");
    if (cfg.n_paths < 2) bad("need at least 2 paths");
    if (cfg.extinction_floor != 0.0) bad("extinction_floor must be 0");
}

StepResult reflect_step(double x, double barrier, double dw, const ModelSpec& m, double dt) {
    const double proposal = x + drift_at(m, x) * dt + std::sqrt(sigma2_at(m, x)) * dw;
    if (proposal > barrier) return {barrier, proposal - barrier};
    return {proposal, 0.0};
}

double chatter_lump(const ModelSpec& m, double barrier, double x0, int n) {
    if (n < 1) fail(ErrorKind::Domain, "montecarlo", "chatter needs n >= 1");
    if (x0 <= barrier) return 0.0;
    const double step = (x0 - barrier) / n;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
        const double xk = x0 - step * k;
        const double xk1 = k + 1 == n ? barrier : x0 - step * (k + 1);
        acc += yield_at(m, xk) * (xk - xk1);
    }
    return acc;
}

double time0_lump(const ModelSpec& m, const PolicySpec& policy, double x0) {
    const double b = barrier_of(policy);
    if (x0 <= b) return 0.0;
    return std::visit(overloaded{
                          // Z jumps at time 0 and the harvest integrand is f(X(0-)) dZ
                          [&](const ReflectAt&) { return yield_at(m, x0) * (x0 - b); },
                          [&](const JumpThenReflect&) { return yield_at(m, x0) * (x0 - b); },
                          [&](const Chatter& q) { return chatter_lump(m, b, x0, q.n); },
                          [&](const RelaxedSweep&) { return yield_integral(m, b, x0); },
                      },
                      policy);
}

SimResult simulate_payoff(const ModelSpec& m, const PolicySpec& policy, double x0, const SimConfig& cfg) {
    check_x0(x0);
    validate(m, cfg);
    const double b = barrier_of(policy);
    if (!(b >= 0.0)) fail(ErrorKind::Domain, "montecarlo", "barrier must be >= 0");

    const double horizon = effective_horizon(m, cfg);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / cfg.dt - 1e-9));
    const double start = start_state(policy, x0);
    const double lump = time0_lump(m, policy, x0);
    const double fb = yield_at(m, b);

    std::vector<double> local(cfg.n_paths, 0.0);
    std::vector<unsigned char> extinct(cfg.n_paths, 0);
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const unsigned n_threads =
        static_cast<unsigned>(std::min<std::size_t>(cfg.threads == 0 ? hw : cfg.threads, cfg.n_paths));

    auto worker = [&](std::size_t begin, std::size_t end) {
        with_coefficients(m, [&](const auto& coef) {
            for (std::size_t i = begin; i < end; ++i) {
                const PathOutcome o = run_path(coef, start, b, m.discount(), cfg.dt, steps, cfg, i,
                                               [](double, double, double) {});
                local[i] = o.discounted_local_time;
                extinct[i] = o.extinct ? 1 : 0;
            }
            return 0;
        });
    };
    if (n_threads <= 1) {
        worker(0, cfg.n_paths);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (cfg.n_paths + n_threads - 1) / n_threads;
        for (unsigned t = 0; t < n_threads; ++t) {
            const std::size_t begin = t * chunk;
            const std::size_t end = std::min(cfg.n_paths, begin + chunk);
            if (begin < end) pool.emplace_back(worker, begin, end);
        }
        for (auto& th : pool) th.join();
    }

    // fixed-order reduction keeps the result independent of the thread schedule
    SimResult res;
    res.n_paths = cfg.n_paths;
    res.lump_term = lump;
    res.horizon = horizon;
    res.dt = cfg.dt;
    res.tail_bound = tail_bound_for(m, b, horizon);
    const double n = static_cast<double>(cfg.n_paths);
    double sum = 0.0;
    for (double v : local) sum += v;
    const double mean_lt = sum / n;
    double ss = 0.0;
    for (double v : local) ss += (v - mean_lt) * (v - mean_lt);
    const double var = ss / (n - 1.0);
    res.mean = lump + fb * mean_lt;
    res.std_error = fb * std::sqrt(var / n);
    res.extinct_fraction =
        static_cast<double>(std::accumulate(extinct.begin(), extinct.end(), std::size_t{0})) / n;
    if (cfg.keep_path_payoffs) {
        res.path_payoffs.resize(cfg.n_paths);
        for (std::size_t i = 0; i < cfg.n_paths; ++i) res.path_payoffs[i] = lump + fb * local[i];
    }
    return res;
}

std::vector<PathPoint> trace_path(const ModelSpec& m, const PolicySpec& policy, double x0, const SimConfig& cfg,
                                  std::size_t path_index) {
    check_x0(x0);
    validate(m, cfg);
    const double b = barrier_of(policy);
    const double horizon = effective_horizon(m, cfg);
    const auto steps = static_cast<std::size_t>(std::ceil(horizon / cfg.dt - 1e-9));
    std::vector<PathPoint> trace;
    trace.reserve(steps + 1);
    with_coefficients(m, [&](const auto& coef) {
        run_path(coef, start_state(policy, x0), b, m.discount(), cfg.dt, steps, cfg, path_index,
                 [&](double t, double x, double dl) { trace.push_back({t, x, dl}); });
        return 0;
    });
    return trace;
}

ChatterTable chatter_convergence(const ModelSpec& m, const Threshold& th, double x0, const SimConfig& cfg,
                                 const std::vector<int>& n_list) {
    check_x0(x0);
    if (!(x0 > th.bstar)) fail(ErrorKind::Domain, "montecarlo", "chatter convergence needs x0 > b*");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 1 || (i > 0 && n_list[i] % n_list[i - 1] != 0)) {
            fail(ErrorKind::Domain, "montecarlo", "chatter n_list must be nested refinements (1, 2, 4, ...)");
        }
    }
    ChatterTable table;
    table.sweep_lump = yield_integral(m, th.bstar, x0);
    if (th.bstar > 0.0) {
        table.continuation = simulate_payoff(m, ReflectAt{th.bstar}, th.bstar, cfg);
    } else {
        // reflecting at 0 means immediate extinction
        validate(m, cfg);
        table.continuation.n_paths = cfg.n_paths;
        table.continuation.extinct_fraction = 1.0;
        table.continuation.horizon = effective_horizon(m, cfg);
        table.continuation.dt = cfg.dt;
    }
    for (int n : n_list) {
        const double lump = chatter_lump(m, th.bstar, x0, n);
        table.rows.push_back({n, lump, lump + table.continuation.mean});
    }
    return table;
}

}  // namespace harvest
