// acceptance.cpp — End-to-end acceptance checks, one PASS/FAIL line per criterion
//
// Usage: acceptance <ac1..ac10|all> [--work DIR] [--threads N]
// Scenario outputs are cached under the work directory (keyed by the resolved
// configuration) so criteria that share a run do not recompute it.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include "oracle.hpp"
#include "swap_oracle.hpp"

#include "surrogate/boson_oracle.hpp"
#include "surrogate/scenario.hpp"

using namespace surrogate;
namespace fs = std::filesystem;

namespace {

// ---------------------------------------------------------------- pinned tolerances
constexpr double kPi = std::numbers::pi;

constexpr double kAc1RateTolerance = 0.20;         // relative to 2 pi eta omega
constexpr double kAc2DriftTolerance = 1e-5;        // relative drift of each energy channel
constexpr double kAc2OscillationFactor = 100.0;    // <L> amplitude vs largest drift
constexpr double kAc3CoherenceTolerance = 1e-6;    // C_l1 constancy, de-excited bath
constexpr double kAc4EnergyBand = 0.05;            // swapped <H_S> band around its initial value
constexpr double kAc4NoSwapDecay = 0.50;           // swap-free decay defining the window
constexpr double kAc5DecoupledBand = 0.03;         // |R - 1| for eps0 = 1.4
constexpr double kAc5SpreadTolerance = 0.05;       // R variation across eps0 < omega
constexpr double kAc5SlopeTolerance = 0.30;        // early slope vs -eta/2
constexpr double kAc6Unitarity = 1e-10;
constexpr double kAc6U00 = 1e-12;
constexpr double kAc6Secular = 1e-8;
constexpr double kAc6CrossingsPerPeriod = 1.0;     // N_tol: band exits per oscillator period
constexpr double kAc6BandFraction = 0.2;           // band half-width / max |r_env - 1|
constexpr double kAc7Deficit = 1e-10;
constexpr double kAc7Purity = 1e-10;
constexpr double kAc8Matrix = 1e-12;
constexpr double kAc8Deficit = 1e-8;
constexpr double kAc9Population = 1e-6;
constexpr double kAc9EnergyBand = 0.05;
constexpr double kAc9Evolve = 1e-6;                // excursion of the NV spin spreads above round-off

// Window lengths used by the off-resonance checks.
constexpr double kAc5TFinal = 25.0;
constexpr double kAc5Stride = 0.1;

struct Context {
    fs::path work{"acceptance_data"};
    int threads{1};
};

struct Report {
    std::string id;
    std::string title;
    bool pass{true};
    std::vector<std::string> notes{};

    void check(bool ok, const std::string& what) {
        pass = pass && ok;
        notes.push_back(std::string(ok ? "ok   " : "FAIL ") + what);
    }
    void info(const std::string& what) { notes.push_back("     " + what); }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}
std::string sci(double v) { return fmt("%.3e", v); }
std::string fix(double v) { return fmt("%.5f", v); }

// ---------------------------------------------------------------- cached scenario runs

fs::path ensure_run(const Context& ctx, const std::string& tag, const Config& cfg, int threads = -1) {
    const fs::path dir = ctx.work / tag;
    const std::string key = cfg.dump();
    const fs::path marker = dir / "resolved_config.json";
    if (fs::exists(dir / "complete") && fs::exists(marker)) {
        std::ifstream in(marker);
        std::stringstream ss;
        ss << in.rdbuf();
        if (ss.str() == key) return dir;
    }
    fs::remove_all(dir);
    fs::create_directories(dir);
    std::cerr << "[acceptance] running " << tag << " ...\n";
    RunOptions opt;
    opt.out_dir = dir.string();
    opt.threads = threads > 0 ? threads : ctx.threads;
    run_scenario(cfg, opt);
    std::ofstream(marker) << key;
    std::ofstream(dir / "complete") << "1\n";
    return dir;
}

struct Series {
    Trajectory traj;
    std::vector<double> col(const std::string& name) const {
        const auto it = std::find(traj.columns.begin(), traj.columns.end(), name);
        if (it == traj.columns.end()) throw std::runtime_error("missing column " + name);
        const auto c = static_cast<std::size_t>(it - traj.columns.begin());
        std::vector<double> out;
        for (const auto& r : traj.rows) out.push_back(r[c]);
        return out;
    }
};

Series load(const fs::path& p) { return Series{read_csv(p.string())}; }

// Least-squares slope and intercept of y(x) over the points with lo <= x <= hi.
std::pair<double, double> linear_fit(const std::vector<double>& x, const std::vector<double>& y, double lo, double hi) {
    double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi || !std::isfinite(y[i])) continue;
        n += 1;
        sx += x[i];
        sy += y[i];
        sxx += x[i] * x[i];
        sxy += x[i] * y[i];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

double max_abs_dev(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x - v.front()));
    return m;
}

// Per-period maxima of v sampled at times t (period T).
std::vector<double> period_maxima(const std::vector<double>& t, const std::vector<double>& v, double period) {
    std::vector<double> out;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const auto p = static_cast<std::size_t>(std::floor(t[i] / period * (1.0 - 1e-12)));
        if (p >= out.size()) out.resize(p + 1, -std::numeric_limits<double>::infinity());
        out[p] = std::max(out[p], v[i]);
    }
    // Drop an incomplete final period (a single sample at t = t_final).
    if (out.size() > 1 && t.back() - std::floor(t.back() / period) * period < 0.5 * period) out.pop_back();
    return out;
}

bool non_increasing(const std::vector<double>& v, double slack) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[i - 1] + slack) return false;
    }
    return true;
}

std::string join(const std::vector<double>& v, std::string (*f)(double)) {
    std::string s;
    for (double x : v) s += (s.empty() ? "" : ", ") + f(x);
    return "[" + s + "]";
}

// ---------------------------------------------------------------- AC1

Report ac1(const Context& ctx) {
    Report r{"AC1", "dissipation rate of the infrared excitation"};
    const double eta = default_config("fig3")["bath"]["eta"].get<double>();
    const double target = 2.0 * kPi * eta;
    std::vector<double> windows;
    for (int k : {5, 7, 9}) {
        Config cfg = default_config("fig3");
        cfg["bath"]["modes"] = k;
        cfg["bath"]["modes_sweep"] = nullptr;
        const auto bath = *build_model(cfg, k).tls_bath;
        const double t_rec = 2.0 * kPi / (bath.energies[1] - bath.energies[0]);
        cfg["t_final"] = std::min(40.0, std::ceil(t_rec));
        const auto s = load(ensure_run(ctx, "ac1_K" + std::to_string(k), cfg) / "fig3.csv");
        const auto t = s.col("t"), e = s.col("E_S");
        std::vector<double> y;
        for (double x : e) y.push_back(std::log(x - 0.5));
        const double lo = 1.0, hi = 0.9 * t_rec;
        const double rate = -linear_fit(t, y, lo, hi).first;
        windows.push_back(hi - lo);
        r.check(std::abs(rate - target) / target <= kAc1RateTolerance,
                "K=" + std::to_string(k) + ": fitted rate " + fix(rate) + " over t in [1, " + fmt("%.2f", hi) +
                    "] vs 2 pi eta omega = " + fix(target) + " (rel. dev. " + fmt("%.3f", std::abs(rate - target) / target) +
                    "; rate / (pi eta omega) = " + fmt("%.3f", rate / (kPi * eta)) + ")");
    }
    r.check(windows[0] < windows[1] && windows[1] < windows[2],
            "pre-recurrence fit window grows with K: " + join(windows, fix));
    return r;
}

// ---------------------------------------------------------------- AC2 / AC3

Report ac2(const Context& ctx) {
    Report r{"AC2", "pure dephasing conserves the energy channels"};
    const Config cfg = default_config("fig2");
    const auto s = load(ensure_run(ctx, "fig2", cfg) / "fig2.csv");
    const double m = cfg["system"]["mass"], w = cfg["system"]["omega"];
    const double period = 2.0 * kPi / w;
    const auto t = s.col("t");
    double worst_abs = 0.0;
    for (const std::string name : {"E_S", "E_B", "E_SB"}) {
        const auto v = s.col(name);
        const double drift = max_abs_dev(v);
        worst_abs = std::max(worst_abs, drift);
        r.check(drift / std::abs(v.front()) < kAc2DriftTolerance,
                name + " relative drift " + sci(drift / std::abs(v.front())) + " (absolute " + sci(drift) + ", initial " +
                    sci(v.front()) + ")");
    }
    const auto l = s.col("lagrangian");
    const double amp = 0.5 * (*std::max_element(l.begin(), l.end()) - *std::min_element(l.begin(), l.end()));
    r.check(amp >= kAc2OscillationFactor * worst_abs,
            "<L> amplitude " + sci(amp) + " vs 100 x largest drift " + sci(kAc2OscillationFactor * worst_abs));

    const auto c = period_maxima(t, s.col("coherence"), period);
    r.check(non_increasing(c, 1e-12) && c.back() < c.front(), "C_l1 per-period maxima decrease: " + join(c, fix));

    const auto q = s.col("q_mean"), p = s.col("p_mean");
    std::vector<double> radius;
    for (std::size_t i = 0; i < q.size(); ++i) radius.push_back(std::abs(ladder_mean(q[i], p[i], m, w)));
    const auto rad = period_maxima(t, radius, period);
    r.check(non_increasing(rad, 1e-12) && rad.back() < rad.front(),
            "phase-space radius |<a>| per-period maxima decrease: " + join(rad, fix));
    return r;
}

Report ac3(const Context& ctx) {
    Report r{"AC3", "dephasing requires an activated bath"};
    Config cfg = default_config("fig2");
    cfg["bath"]["init"] = "vacuum";
    const auto s = load(ensure_run(ctx, "fig2_vacuum", cfg) / "fig2.csv");
    const auto c = s.col("coherence");
    r.check(max_abs_dev(c) < kAc3CoherenceTolerance,
            "de-excited bath: C_l1 deviation " + sci(max_abs_dev(c)) + " (C_l1(0) = " + fix(c.front()) + ")");
    const auto act = load(ensure_run(ctx, "fig2", default_config("fig2")) / "fig2.csv").col("coherence");
    r.check(act.front() - act.back() > 100.0 * kAc3CoherenceTolerance,
            "activated bath for comparison: C_l1 " + fix(act.front()) + " -> " + fix(act.back()));
    return r;
}

// ---------------------------------------------------------------- AC4

Report ac4(const Context& ctx) {
    Report r{"AC4", "Zeno freezing by spin swaps"};
    const Config cfg = default_config("fig4");
    const auto dir = ensure_run(ctx, "fig4", cfg);
    const auto sw = load(dir / "fig4_mean.csv"), ref = load(dir / "fig4_noswap.csv");
    const auto meta = Config::parse(std::ifstream(dir / "fig4_mean.meta.json"));
    const double t_z = meta["details"]["t_Z"], interval = meta["details"]["swap_interval"];
    r.info("t_Z = " + fix(t_z) + ", swap interval t_f = " + fix(interval) + ", realizations " +
           std::to_string(meta["details"]["succeeded"].get<int>()));
    r.check(std::abs(interval - t_z / 10.0) < 1e-12 * t_z, "t_f = t_Z / 10");

    const auto t = sw.col("t"), e = sw.col("E_S"), e_ref = ref.col("E_S");
    const double e0 = e.front();
    std::size_t end = t.size() - 1;
    bool decayed = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (e_ref[i] <= (1.0 - kAc4NoSwapDecay) * e_ref.front()) {
            end = i;
            decayed = true;
            break;
        }
    }
    r.check(decayed, "swap-free <H_S> decays by >= 50%: " + fix(e_ref.front()) + " -> " + fix(e_ref[end]) +
                         " at t = " + fix(t[end]));
    double worst = 0.0;
    for (std::size_t i = 0; i <= end; ++i) worst = std::max(worst, std::abs(e[i] - e0) / e0);
    r.check(worst <= kAc4EnergyBand, "swapped <H_S> stays within 5% of " + fix(e0) + " on [0, " + fix(t[end]) +
                                         "]: max deviation " + fmt("%.4f", worst) + ", value at window end " +
                                         fix(e[end]));

    const auto dq = sw.col("dq"), dq_ref = ref.col("dq");
    double mean = 0.0;
    int n = 0;
    for (std::size_t i = end / 2; i <= end; ++i, ++n) mean += dq[i];
    mean /= n;
    const double excited = std::sqrt(1.5), ground = std::sqrt(0.5);
    r.check(std::abs(mean - excited) < std::abs(mean - ground),
            "swapped Delta q (second half of the window) averages " + fix(mean) + ", nearer sqrt(3/2) = " + fix(excited) +
                " than sqrt(1/2) = " + fix(ground));
    r.info("swap-free Delta q: " + fix(dq_ref.front()) + " -> " + fix(dq_ref[end]));
    return r;
}

// ---------------------------------------------------------------- AC5 / AC6

const std::vector<double> kSweep{0.0, 0.4, 0.8, 1.4};

fs::path fig5_run(const Context& ctx) {
    Config cfg = default_config("fig5");
    cfg["sweep"]["eps0_values"] = Config(kSweep);
    cfg["t_final"] = kAc5TFinal;
    cfg["stride"] = kAc5Stride;
    return ensure_run(ctx, "fig5", cfg);
}

std::string eps_name(char state, double eps0) { return std::string("fig5") + state + fmt("_eps0_%.2f.csv", eps0); }

Report ac5(const Context& ctx) {
    Report r{"AC5", "off-resonance decoupling and the R(t) ratio"};
    const auto dir = fig5_run(ctx);
    const double eta = default_config("fig5")["bath"]["eta"];
    for (char st : {'a', 'b'}) {
        const auto rr = load(dir / eps_name(st, 1.4)).col("ratio_R");
        double worst = 0.0;
        for (double x : rr) worst = std::max(worst, std::isfinite(x) ? std::abs(x - 1.0) : INFINITY);
        r.check(worst <= kAc5DecoupledBand, std::string("eps0 = 1.4, state ") + st + ": max |R - 1| = " + sci(worst));
    }
    for (char st : {'a', 'b'}) {
        std::vector<std::vector<double>> curves;
        for (double e0 : kSweep) {
            if (e0 < 1.0) curves.push_back(load(dir / eps_name(st, e0)).col("ratio_R"));
        }
        double spread = 0.0;
        for (std::size_t i = 0; i < curves[0].size(); ++i) {
            double lo = INFINITY, hi = -INFINITY, mean = 0.0;
            for (const auto& c : curves) {
                lo = std::min(lo, c[i]);
                hi = std::max(hi, c[i]);
                mean += c[i] / static_cast<double>(curves.size());
            }
            spread = std::max(spread, (hi - lo) / mean);
        }
        r.check(spread < kAc5SpreadTolerance,
                std::string("state ") + st + ": R varies across eps0 < omega by at most " + fmt("%.4f", spread));
    }
    const double target = -eta / 2.0;
    for (double e0 : kSweep) {
        if (e0 >= 1.0) continue;
        const auto sa = load(dir / eps_name('a', e0));
        const auto t = sa.col("t"), ra = sa.col("ratio_R");
        const auto [slope, icpt] = linear_fit(t, ra, 0.0, kAc5TFinal);
        const double mean_a = std::accumulate(ra.begin() + 1, ra.end(), 0.0) / static_cast<double>(ra.size() - 1);
        r.check(mean_a < 1.0 && slope < 0.0, "eps0 = " + fmt("%.1f", e0) + ", high-energy state: mean R = " + fix(mean_a) + " < 1");
        r.check(std::abs(slope - target) / std::abs(target) <= kAc5SlopeTolerance,
                "eps0 = " + fmt("%.1f", e0) + ", early slope " + sci(slope) + " vs -eta/2 = " + sci(target) +
                    " (rel. dev. " + fmt("%.3f", std::abs(slope - target) / std::abs(target)) + ")");
        const auto rb = load(dir / eps_name('b', e0)).col("ratio_R");
        const double mean_b = std::accumulate(rb.begin() + 1, rb.end(), 0.0) / static_cast<double>(rb.size() - 1);
        r.check(mean_b > 1.0, "eps0 = " + fmt("%.1f", e0) + ", displaced ground state: mean R = " + fix(mean_b) + " > 1");
    }
    return r;
}

Report ac6(const Context& ctx) {
    Report r{"AC6", "boson-bath oracle self-consistency and the R envelope"};
    std::mt19937_64 rng(606);
    std::uniform_real_distribution<double> w(0.2, 2.0), c(0.01, 0.3), tt(0.0, 50.0);
    double unit = 0.0, u00 = 0.0, secular = 0.0;
    int interlace_fail = 0;
    for (int trial = 0; trial < 100; ++trial) {
        ArrowheadModel m;
        m.omega = w(rng);
        for (int k = 0; k < 11; ++k) {
            m.omegas.push_back(w(rng));
            m.chis.push_back(c(rng));
        }
        const auto d = decompose(m);
        const double t = tt(rng);
        const auto u = evolution_matrix(d, t);
        unit = std::max(unit, (u * u.adjoint() - Eigen::MatrixXcd::Identity(u.rows(), u.rows())).cwiseAbs().maxCoeff());
        u00 = std::max(u00, std::abs(u00_abs2(d, t) - std::norm(u(0, 0))));
        const auto res = secular_residuals(d);
        for (Index i = 0; i < res.size(); ++i) {
            if (std::isfinite(res[i])) secular = std::max(secular, res[i]);
        }
        auto ws = m.omegas;
        std::sort(ws.begin(), ws.end());
        for (std::size_t j = 0; j + 1 < ws.size(); ++j) {
            int count = 0;
            for (Index i = 0; i < d.eigenvalues.size(); ++i) count += d.eigenvalues[i] > ws[j] && d.eigenvalues[i] < ws[j + 1];
            interlace_fail += count != 1;
        }
    }
    r.check(unit < kAc6Unitarity, "U(t) unitarity residual " + sci(unit) + " (100 random K=11 models)");
    r.check(u00 < kAc6U00, "u00_abs2 vs |U_00|^2 " + sci(u00));
    r.check(secular < kAc6Secular, "secular-equation backward error " + sci(secular));
    r.check(interlace_fail == 0, "interlacing violations: " + std::to_string(interlace_fail));

    // Envelope property on the off-resonance runs: R_sim stays inside a band around r_envelope.
    const auto dir = fig5_run(ctx);
    for (char st : {'a', 'b'}) {
        const auto env = load(dir / (std::string("fig5") + st + "_envelope.csv"));
        const auto et = env.col("t"), ee = env.col("eps0"), er = env.col("r_envelope");
        for (double e0 : kSweep) {
            if (e0 >= 1.0) continue;
            const auto sim = load(dir / eps_name(st, e0));
            const auto t = sim.col("t"), rs = sim.col("ratio_R");
            std::vector<double> diff;
            std::size_t j = 0;
            for (std::size_t i = 0; i < et.size(); ++i) {
                if (std::abs(ee[i] - e0) > 1e-12) continue;
                diff.push_back(rs[j] - er[i]);
                ++j;
            }
            // Band around the envelope: a fixed fraction of the envelope's own excursion from 1.
            double excursion = 0.0;
            for (std::size_t i = 0; i < et.size(); ++i) {
                if (std::abs(ee[i] - e0) < 1e-12 && std::isfinite(er[i])) excursion = std::max(excursion, std::abs(er[i] - 1.0));
            }
            const double band = kAc6BandFraction * excursion;
            int crossings = 0, exits = 0, sign = 0;
            bool inside = true;
            double worst = 0.0;
            for (double d : diff) {
                if (!std::isfinite(d)) continue;
                worst = std::max(worst, std::abs(d));
                const bool in = std::abs(d) <= band;
                if (inside && !in) ++exits;
                inside = in;
                if (std::abs(d) < 1e-12) continue;
                const int s = d > 0 ? 1 : -1;
                if (sign != 0 && s != sign) ++crossings;
                sign = s;
            }
            const double periods = t.back() / (2.0 * kPi);
            r.check(exits / periods < kAc6CrossingsPerPeriod,
                    std::string("state ") + st + ", eps0 = " + fmt("%.1f", e0) + ": R_sim leaves the envelope band +-" +
                        sci(band) + " " + std::to_string(exits) + " times over " + fmt("%.1f", periods) +
                        " periods (N_tol = " + fmt("%.0f", kAc6CrossingsPerPeriod) + " per period); max |R_sim - r_env| = " +
                        sci(worst) + ", envelope excursion " + sci(excursion));
            r.info(std::string("state ") + st + ", eps0 = " + fmt("%.1f", e0) + ": R_sim - r_env changes sign " +
                   std::to_string(crossings) + " times (oscillation at 2 omega around the envelope curve)");
        }
    }
    return r;
}

// ---------------------------------------------------------------- AC7 / AC8

Report ac7(const Context&) {
    Report r{"AC7", "spin swap against the two-spin matrix recipe"};
    std::mt19937_64 rng(707);
    std::normal_distribution<double> g;
    double worst = 0.0;
    for (int trial = 0; trial < 1000; ++trial) {
        const Eigen::VectorXcd lambda = oracle::random_vector(4, rng);
        const cplx b(0.5 * g(rng), g(rng));
        for (bool right : {true, false}) {
            SpinorState psi(2, 1);
            psi.data() = lambda;
            swap_spin(psi, right ? 1 : 2, fresh_spin_from_b(b), SwapMode::full);
            worst = std::max(worst, oracle::overlap_deficit(psi.data(), oracle::recipe(lambda, right, b)));
        }
    }
    r.check(worst < kAc7Deficit, "K=2, 1000 random states, both spins: worst overlap deficit " + sci(worst));

    double purity_gap = 0.0;
    const SystemModel sys{GridSystem::make(1.0, 1.0, 4)};
    const auto basis = swap_basis(sys);
    for (int modes = 1; modes <= 7; ++modes) {
        for (int k = 1; k <= modes; ++k) {
            for (const Eigen::MatrixXcd& bs : {Eigen::MatrixXcd(), basis}) {
                auto psi = oracle::random_state(modes, 4, rng);
                swap_spin(psi, k, fresh_spin_from_b(cplx(g(rng), g(rng))), SwapMode::full, bs);
                const auto rho = oracle::mode_marginal(psi, k);
                purity_gap = std::max(purity_gap, 1.0 - (rho * rho).trace().real());
            }
        }
    }
    r.check(purity_gap < kAc7Purity, "K <= 7, every mode: post-swap marginal purity deficit " + sci(purity_gap));
    return r;
}

Report ac8(const Context&) {
    Report r{"AC8", "matrix-free operators and Krylov propagation vs dense matrices"};
    std::mt19937_64 rng(808);
    double op_err = 0.0, deficit = 0.0;
    for (Index n : {Index{8}, Index{16}}) {
        const SystemModel sys{GridSystem::make(1.0, 1.0, n)};
        const Eigen::MatrixXcd hs = oracle::dense_grid_system(sys);
        const auto q = oracle::positions(n, sys.grid().grid->q_min(), sys.grid().grid->q_max());
        const Eigen::MatrixXcd qd = q.cast<cplx>().asDiagonal();
        for (int modes = 1; modes <= 3; ++modes) {
            const auto bath = make_bath(0.0, 3.0, modes, 0.3);
            const Eigen::MatrixXcd hb = oracle::lift_bath(oracle::dense_tls_bath(bath.energies), n);
            const Index nb = Index{1} << modes;
            Eigen::MatrixXcd x = Eigen::MatrixXcd::Zero(nb, nb), hop = Eigen::MatrixXcd::Zero(nb, nb);
            for (int k = 1; k <= modes; ++k) {
                x += bath.couplings[k - 1] * oracle::mode_operator(oracle::raise() + oracle::lower(), k, modes);
                for (int j = 1; j < k; ++j) {
                    const double de = bath.energies[j - 1] - bath.energies[k - 1];
                    const double cjk = 0.5 / (modes * (modes - 1)) * std::exp(-de * de / (2.0 * 0.4 * 0.4));
                    const Eigen::MatrixXcd a = oracle::mode_operator(oracle::raise(), j, modes) *
                                               oracle::mode_operator(oracle::lower(), k, modes);
                    hop += cjk * (a + a.adjoint());
                }
            }
            const Eigen::MatrixXcd dense_dip = oracle::lift_system(hs, modes) + hb + oracle::kron(x, qd);
            const Eigen::MatrixXcd dense_dep = oracle::lift_system(hs, modes) + hb + oracle::kron(hop, hs);
            const TotalHamiltonian dip(sys, TlsBath{bath}, make_dipolar(bath));
            std::vector<std::pair<const TotalHamiltonian*, const Eigen::MatrixXcd*>> cases{{&dip, &dense_dip}};
            std::optional<TotalHamiltonian> dep;
            if (modes >= 2) {
                dep.emplace(sys, TlsBath{bath}, make_dephasing(0.5, 0.4, bath.energies, -1.0));
                cases.emplace_back(&*dep, &dense_dep);
            }
            for (const auto& [h, dense] : cases) {
                const auto mat = oracle::materialize(modes, n, [&](const SpinorState& in, SpinorState& out) {
                    h->apply(Term::total, in, out);
                });
                op_err = std::max(op_err, (mat - *dense).cwiseAbs().maxCoeff());
                auto psi = oracle::random_state(modes, n, rng);
                // Smooth system profile keeps the state within the represented band.
                for (Index s = 0; s < psi.n_bath(); ++s)
                    for (Index i = 0; i < n; ++i) psi(s, i) *= std::exp(-0.5 * q[i] * q[i]);
                psi.normalize();
                const double t = 10.0; // 10 / omega
                const Eigen::VectorXcd ref = oracle::dense_evolve(*dense, psi.data(), t);
                propagate(psi, *h, t, PropagatorConfig{});
                deficit = std::max(deficit, 1.0 - std::norm(ref.dot(psi.data())));
            }
        }
    }
    r.check(op_err < kAc8Matrix, "apply_total vs Kronecker matrix (K <= 3, N_sys in {8, 16}, dipolar and dephasing): " + sci(op_err));
    r.check(deficit < kAc8Deficit, "Krylov vs dense exponential at t = 10/omega: worst overlap deficit " + sci(deficit));
    return r;
}

// ---------------------------------------------------------------- AC9

Report ac9(const Context& ctx) {
    Report r{"AC9", "NV center: strong-field dephasing and swap freezing"};
    const Config cfg = default_config("fig6");
    const auto dir = ensure_run(ctx, "fig6", cfg);

    Config sf = cfg;
    sf["system"]["reduced"] = true;
    sf["coupling"]["kind"] = "nv_reduced";
    const NVSpec nv_reduced = build_model(sf, cfg["bath"]["modes"]).system.nv();
    const SystemModel pseudo{nv_reduced};
    const Eigen::MatrixXcd hs_r = system_hamiltonian_matrix(pseudo);
    const double e0 = hs_r(nv_index_zero(pseudo), nv_index_zero(pseudo)).real();
    const double em = hs_r(nv_index_minus_one(pseudo), nv_index_minus_one(pseudo)).real();
    const auto strong = load(dir / "fig6_strongfield.csv");
    std::vector<double> pop;
    for (double e : strong.col("E_S")) pop.push_back((e - e0) / (em - e0));
    r.check(max_abs_dev(pop) < kAc9Population,
            "B = 59 G, activated bath: |m_S=-1> population deviation " + sci(max_abs_dev(pop)) + " (initial " + fix(pop.front()) + ")");
    const auto c = strong.col("coherence");
    r.check(c.back() < 0.9 * c.front(), "strong-field coherence decays: C_l1 " + fix(c.front()) + " -> " + fix(c.back()));

    Config full = cfg;
    const SystemModel spin1{build_model(full, cfg["bath"]["modes"]).system};
    const Eigen::MatrixXcd hs_f = system_hamiltonian_matrix(spin1);
    const double e_minus = hs_f(nv_index_minus_one(spin1), nv_index_minus_one(spin1)).real();
    const auto mean = load(dir / "fig6_mean.csv"), ref = load(dir / "fig6_noswap.csv");
    double worst = 0.0;
    for (double e : mean.col("E_S")) worst = std::max(worst, std::abs(e - e_minus) / std::abs(e_minus));
    r.check(worst <= kAc9EnergyBand, "swap ensemble: <H_S> within " + fmt("%.4f", worst) + " of E(-1) = " + fix(e_minus) + " rad/us");
    for (const std::string name : {"nv_sx_std", "nv_sz_std"}) {
        const auto v = mean.col(name);
        const double excursion = *std::max_element(v.begin(), v.end()) - *std::min_element(v.begin(), v.end());
        r.check(excursion > kAc9Evolve, "swap ensemble: " + name + " evolves (range " + sci(excursion) + ")");
    }
    double worst_ref = 0.0;
    for (double e : ref.col("E_S")) worst_ref = std::max(worst_ref, std::abs(e - e_minus) / std::abs(e_minus));
    r.info("swap-free <H_S> deviation from E(-1): " + sci(worst_ref));
    return r;
}

// ---------------------------------------------------------------- AC10

std::map<std::string, std::string> file_map(const fs::path& dir) {
    std::map<std::string, std::string> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        const auto name = e.path().filename().string();
        if (name == "complete" || name == "resolved_config.json") continue;
        std::ifstream in(e.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out[name] = ss.str();
    }
    return out;
}

Report ac10(const Context& ctx) {
    Report r{"AC10", "byte-identical output across thread counts"};
    std::vector<std::pair<std::string, Config>> cases;
    Config f3 = default_config("fig3");
    f3["bath"]["modes_sweep"] = Config::array({3, 5});
    f3["seed"] = 7;
    cases.emplace_back("fig3", f3);
    Config f4 = default_config("fig4");
    f4["bath"]["modes"] = 5;
    f4["swap"]["n_r"] = 6;
    f4["t_final"] = 5.0;
    f4["seed"] = 7;
    cases.emplace_back("fig4", f4);
    Config f6 = default_config("fig6");
    f6["swap"]["n_r"] = 4;
    f6["t_final"] = 0.2;
    f6["strong_field"]["t_final"] = 0.2;
    f6["seed"] = 7;
    cases.emplace_back("fig6", f6);
    Config f5 = default_config("fig5");
    f5["sweep"]["eps0_values"] = Config::array({0.0, 1.4});
    f5["t_final"] = 1.0;
    f5["seed"] = 7;
    cases.emplace_back("fig5", f5);
    for (const auto& [tag, cfg] : cases) {
        const auto a = file_map(ensure_run(ctx, "ac10_" + tag + "_t1", cfg, 1));
        const auto b = file_map(ensure_run(ctx, "ac10_" + tag + "_t3", cfg, 3));
        r.check(!a.empty() && a == b, tag + ": " + std::to_string(a.size()) + " files (CSV + sidecars) identical for 1 and 3 threads");
    }
    return r;
}

} // namespace

int main(int argc, char** argv) {
    Context ctx;
    std::vector<std::string> wanted;
    for (int i = 1; i < argc; ++i) {
        const std::string a = argv[i];
        if (a == "--work" && i + 1 < argc) {
            ctx.work = argv[++i];
        } else if (a == "--threads" && i + 1 < argc) {
            ctx.threads = std::max(1, std::atoi(argv[++i]));
        } else {
            wanted.push_back(a);
        }
    }
    if (wanted.empty() || (wanted.size() == 1 && wanted[0] == "all")) {
        wanted = {"ac1", "ac2", "ac3", "ac4", "ac5", "ac6", "ac7", "ac8", "ac9", "ac10"};
    }
    const std::map<std::string, std::function<Report(const Context&)>> table{
        {"ac1", ac1}, {"ac2", ac2}, {"ac3", ac3}, {"ac4", ac4}, {"ac5", ac5},
        {"ac6", ac6}, {"ac7", ac7}, {"ac8", ac8}, {"ac9", ac9}, {"ac10", ac10}};
    fs::create_directories(ctx.work);
    bool all_pass = true;
    for (const auto& id : wanted) {
        const auto it = table.find(id);
        if (it == table.end()) {
            std::cerr << "unknown criterion " << id << '\n';
            return 2;
        }
        Report rep;
        try {
            rep = it->second(ctx);
        } catch (const std::exception& e) {
            rep.id = "AC" + id.substr(2);
            rep.title = "aborted";
            rep.pass = false;
            rep.notes.push_back(std::string("FAIL exception: ") + e.what());
        }
        for (const auto& n : rep.notes) std::cout << "    " << n << '\n';
        std::cout << rep.id << ' ' << (rep.pass ? "PASS" : "FAIL") << "  " << rep.title << '\n' << std::flush;
        all_pass = all_pass && rep.pass;
    }
    return all_pass ? 0 : 1;
}
