#include "cli.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <utility>

#include <fmt/core.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "json_config.hpp"
#include "pcsisac/air.hpp"
#include "pcsisac/ambiguity.hpp"
#include "pcsisac/detect.hpp"
#include "pcsisac/errors.hpp"
#include "pcsisac/ofdm.hpp"
#include "pcsisac/pcs.hpp"

namespace pcsisac::cli {

namespace {

std::string num(double v) { return fmt::format("{:.12g}", v); }

std::string render(double v) { return num(v); }
std::string render(const std::string& v) { return v; }
std::string render(bool v) { return v ? "true" : "false"; }
template <typename T>
    requires std::is_integral_v<T>
std::string render(T v) {
    return std::to_string(v);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    return s;
}

double parse_double(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(text, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used == 0 || used != text.size()) throw std::invalid_argument("not a number: '" + text + "'");
    return v;
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, sep)) parts.push_back(item);
    if (!text.empty() && text.back() == sep) parts.emplace_back();
    return parts;
}

// One leaf subcommand: its flags, the values they resolve to, and the work.
struct Leaf {
    CLI::App* app = nullptr;
    std::string command;
    std::vector<std::pair<std::string, std::function<std::string()>>> params;
    std::function<void(Leaf&)> body;
    std::vector<std::string> notes;  // extra header lines produced while running
    std::string out;

    template <typename T>
    CLI::Option* flag(const std::string& name, T& var, const std::string& desc, bool record = true) {
        auto* opt = app->add_option("--" + name, var, desc)->capture_default_str();
        if (record) params.emplace_back(name, [&var] { return render(var); });
        return opt;
    }

    std::string header() const {
        std::string h = fmt::format("# pcsisac {}\n# command: {}\n", kVersion, command);
        for (const auto& [k, v] : params) h += fmt::format("# {}={}\n", k, v());
        for (const auto& n : notes) h += "# " + n + "\n";
        return h;
    }

    nlohmann::json meta() const {
        nlohmann::json m = {{"tool", fmt::format("pcsisac {}", kVersion)}, {"command", command}};
        for (const auto& [k, v] : params) m["params"][k] = v();
        return m;
    }
};

struct Shared {
    std::string modulation = "qam16";
    std::string constellation_file;
    Seed seed = 0;
    unsigned threads = 1;
    std::size_t subcarriers = 64;
    double bandwidth = 100e6;
    std::size_t oversampling = 4;
};

std::string g_stage = "parse arguments";

void write_output(const std::string& path, const std::string& content) {
    g_stage = "write output";
    if (path.empty() || path == "-") {
        std::cout << content;
        std::cout.flush();
        return;
    }
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
    f << content;
    if (!f.flush()) throw std::runtime_error("write to '" + path + "' failed");
}

Constellation load_base(const Shared& s) {
    g_stage = "load constellation";
    if (s.constellation_file.empty()) return parse_modulation(s.modulation);
    std::ifstream f(s.constellation_file);
    if (!f) throw std::runtime_error("cannot read constellation file '" + s.constellation_file + "'");
    try {
        return constellation_from_json(nlohmann::json::parse(f));
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error(std::string("bad constellation file: ") + e.what());
    }
}

TieBreak parse_tie_break(const std::string& text) {
    const auto t = lower(text);
    if (t == "max-entropy") return TieBreak::max_entropy;
    if (t == "none") return TieBreak::none;
    throw std::invalid_argument("unknown tie-break '" + text + "' (max-entropy|none)");
}

OfdmConfig ofdm_from(const Shared& s) {
    auto cfg = OfdmConfig::from_bandwidth(s.bandwidth, s.subcarriers, s.oversampling);
    cfg.validate();
    return cfg;
}

void add_modulation(Leaf& leaf, Shared& s) {
    leaf.flag("modulation", s.modulation, "qam16, qam64, psk16, bpsk, qpsk, ...");
    leaf.flag("constellation", s.constellation_file, "constellation JSON file (overrides --modulation)");
}

void add_ofdm(Leaf& leaf, Shared& s, bool sampled) {
    leaf.flag("subcarriers", s.subcarriers, "number of subcarriers L");
    leaf.flag("bandwidth", s.bandwidth, "total bandwidth in Hz (spacing = bandwidth / L)");
    if (sampled) leaf.flag("oversampling", s.oversampling, "samples per subcarrier");
}

void add_threads(Leaf& leaf, Shared& s) {
    leaf.flag("threads", s.threads, "worker threads (0 = all cores); does not change results", false);
}

void add_mc(Leaf& leaf, Shared& s) {
    leaf.flag("seed", s.seed, "RNG seed");
    add_threads(leaf, s);
}

void add_out(Leaf& leaf) { leaf.app->add_option("--out", leaf.out, "output file (default stdout)"); }

// ---------------------------------------------------------------- constellation

void setup_constellation(CLI::App& root, std::vector<std::unique_ptr<Leaf>>& leaves, Shared& s) {
    auto* group = root.add_subcommand("constellation", "constellation utilities");
    group->require_subcommand(1);

    auto& dump = *leaves.emplace_back(std::make_unique<Leaf>());
    dump.app = group->add_subcommand("dump", "write points and probabilities, optionally PCS-shaped");
    dump.command = "constellation dump";
    add_modulation(dump, s);
    add_threads(dump, s);
    auto c0 = std::make_shared<std::string>();
    auto tie = std::make_shared<std::string>("max-entropy");
    auto format = std::make_shared<std::string>("json");
    dump.flag("c0", *c0, "shape to this fourth-moment target (empty = as loaded)");
    dump.flag("tie-break", *tie, "max-entropy|none");
    dump.flag("format", *format, "json|csv")->check(CLI::IsMember({"json", "csv"}));
    add_out(dump);
    dump.body = [&s, c0, tie, format](Leaf& leaf) {
        auto c = load_base(s);
        if (!c0->empty()) {
            g_stage = "pcs solve";
            const auto sol = solve_pcs(PcsProblem::from(c, parse_double(*c0)), parse_tie_break(*tie));
            c = shaped(c, sol);
        }
        std::string text;
        if (*format == "json") {
            auto j = to_json(c);
            j["meta"] = leaf.meta();
            text = j.dump(2) + "\n";
        } else {
            text = leaf.header() + "index,re,im,amplitude,phase,prob\n";
            for (std::size_t q = 0; q < c.size(); ++q) {
                const auto p = c.point(q);
                text += fmt::format("{},{},{},{},{},{}\n", q, num(c.points()[q].real()), num(c.points()[q].imag()),
                                    num(p.amplitude), num(p.phase), num(c.probs()[q]));
            }
        }
        write_output(leaf.out, text);
    };
}

// ---------------------------------------------------------------- pcs

void setup_pcs(CLI::App& root, std::vector<std::unique_ptr<Leaf>>& leaves, Shared& s) {
    auto* group = root.add_subcommand("pcs", "fourth-moment constellation shaping");
    group->require_subcommand(1);

    auto& solve = *leaves.emplace_back(std::make_unique<Leaf>());
    solve.app = group->add_subcommand("solve", "solve for one c0, write JSON");
    solve.command = "pcs solve";
    add_modulation(solve, s);
    add_threads(solve, s);
    auto c0 = std::make_shared<double>(1.32);
    auto tie = std::make_shared<std::string>("max-entropy");
    solve.flag("c0", *c0, "fourth-moment target");
    solve.flag("tie-break", *tie, "max-entropy|none");
    add_out(solve);
    solve.body = [&s, c0, tie](Leaf& leaf) {
        const auto base = load_base(s);
        g_stage = "pcs solve";
        const auto sol = solve_pcs(PcsProblem::from(base, *c0), parse_tie_break(*tie));
        std::vector<std::size_t> support;
        for (std::size_t q = 0; q < sol.probs.size(); ++q)
            if (sol.probs[q] > 1e-12) support.push_back(q);
        nlohmann::json j = {
            {"meta", leaf.meta()},
            {"c0", sol.c0},
            {"achieved_m4", sol.achieved_m4},
            {"gap", sol.gap},
            {"entropy_bits", sol.entropy_bits},
            {"feasible_range", {{"min", sol.feasible_range.min}, {"max", sol.feasible_range.max}}},
            {"support", support},
            {"support_size", support.size()},
            {"constellation", to_json(shaped(base, sol))},
        };
        write_output(leaf.out, j.dump(2) + "\n");
    };

    auto& sweep = *leaves.emplace_back(std::make_unique<Leaf>());
    sweep.app = group->add_subcommand("sweep", "solve over a c0 grid, write CSV");
    sweep.command = "pcs sweep";
    add_modulation(sweep, s);
    add_threads(sweep, s);
    auto grid = std::make_shared<std::string>("1:0.02:1.64");
    sweep.flag("c0", *grid, "c0 grid, a:step:b or comma list");
    sweep.flag("tie-break", *tie, "max-entropy|none");
    add_out(sweep);
    sweep.body = [&s, grid, tie](Leaf& leaf) {
        const auto base = load_base(s);
        const auto c0s = parse_grid(*grid);
        g_stage = "pcs sweep";
        const auto sols = sweep_c0(amplitudes(base), c0s, parse_tie_break(*tie));
        std::string text = leaf.header() + "c0,achieved_m4,gap,entropy_bits";
        for (std::size_t q = 0; q < base.size(); ++q) text += fmt::format(",p{}", q);
        text += "\n";
        for (const auto& sol : sols) {
            text += fmt::format("{},{},{},{}", num(sol.c0), num(sol.achieved_m4), num(sol.gap), num(sol.entropy_bits));
            for (double p : sol.probs) text += "," + num(p);
            text += "\n";
        }
        write_output(leaf.out, text);
    };
}

// ---------------------------------------------------------------- af

void setup_af(CLI::App& root, std::vector<std::unique_ptr<Leaf>>& leaves, Shared& s) {
    auto* group = root.add_subcommand("af", "ambiguity function statistics");
    group->require_subcommand(1);
    auto trials = std::make_shared<std::size_t>(500);
    auto tau_points = std::make_shared<std::size_t>(257);
    auto nu_points = std::make_shared<std::size_t>(257);

    auto& surface = *leaves.emplace_back(std::make_unique<Leaf>());
    surface.app = group->add_subcommand("surface", "Monte-Carlo mean |AF| over the delay-Doppler plane");
    surface.command = "af surface";
    add_modulation(surface, s);
    add_ofdm(surface, s, false);
    surface.flag("trials", *trials, "symbol draws M");
    surface.flag("tau-points", *tau_points, "delay grid points over [-T_p, T_p]");
    surface.flag("nu-points", *nu_points, "Doppler grid points over [-B/2, B/2]");
    add_mc(surface, s);
    add_out(surface);
    surface.body = [&s, trials, tau_points, nu_points](Leaf& leaf) {
        const auto c = load_base(s);
        const auto cfg = ofdm_from(s);
        const auto grid = DelayDopplerGrid::defaults(cfg, *tau_points, *nu_points);
        g_stage = "af surface";
        const auto surf = mc_average_af(cfg, c, grid.tau, grid.nu, *trials, s.seed, s.threads);
        std::string text = leaf.header() + "tau\\nu";
        for (double nu : surf.nu_grid) text += "," + num(nu);
        text += "\n";
        for (std::size_t i = 0; i < surf.tau_grid.size(); ++i) {
            text += num(surf.tau_grid[i]);
            for (std::size_t j = 0; j < surf.nu_grid.size(); ++j) text += "," + num(surf.at(i, j));
            text += "\n";
        }
        write_output(leaf.out, text);
    };

    auto& slice = *leaves.emplace_back(std::make_unique<Leaf>());
    slice.app = group->add_subcommand("slice", "Monte-Carlo mean |AF| along delay (fixed Doppler) or Doppler");
    slice.command = "af slice";
    add_modulation(slice, s);
    add_ofdm(slice, s, false);
    auto doppler = std::make_shared<double>(0.0);
    auto delay = std::make_shared<std::string>();
    auto points = std::make_shared<std::size_t>(257);
    slice.flag("doppler", *doppler, "Doppler of the delay slice in Hz");
    slice.flag("delay", *delay, "if set, slice along Doppler at this delay in seconds");
    slice.flag("points", *points, "grid points along the slice");
    slice.flag("trials", *trials, "symbol draws M");
    add_mc(slice, s);
    add_out(slice);
    slice.body = [&s, trials, doppler, delay, points](Leaf& leaf) {
        const auto c = load_base(s);
        const auto cfg = ofdm_from(s);
        const auto grid = DelayDopplerGrid::defaults(cfg, *points, *points);
        const bool along_nu = !delay->empty();
        const std::vector<double> fixed{along_nu ? parse_double(*delay) : *doppler};
        g_stage = "af slice";
        const auto surf = along_nu ? mc_average_af(cfg, c, fixed, grid.nu, *trials, s.seed, s.threads)
                                   : mc_average_af(cfg, c, grid.tau, fixed, *trials, s.seed, s.threads);
        const auto db = magnitude_db(surf.values);
        const auto& axis = along_nu ? surf.nu_grid : surf.tau_grid;
        leaf.notes.push_back("normalized to the slice peak");
        std::string text = leaf.header() + (along_nu ? "nu" : "tau") + ",magnitude_db\n";
        for (std::size_t i = 0; i < axis.size(); ++i) text += num(axis[i]) + "," + num(db[i]) + "\n";
        write_output(leaf.out, text);
    };

    auto& variance = *leaves.emplace_back(std::make_unique<Leaf>());
    variance.app = group->add_subcommand("variance", "self/cross AF variance, closed form and optional Monte-Carlo");
    variance.command = "af variance";
    add_modulation(variance, s);
    add_ofdm(variance, s, false);
    auto var_doppler = std::make_shared<double>(0.0);
    auto var_points = std::make_shared<std::size_t>(65);
    auto var_trials = std::make_shared<std::size_t>(0);
    variance.flag("doppler", *var_doppler, "Doppler in Hz");
    variance.flag("tau-points", *var_points, "delay grid points over [-T_p, T_p]");
    variance.flag("trials", *var_trials, "Monte-Carlo draws for empirical columns (0 = closed form only)");
    add_mc(variance, s);
    add_out(variance);
    variance.body = [&s, var_doppler, var_points, var_trials](Leaf& leaf) {
        const auto c = load_base(s);
        const auto cfg = ofdm_from(s);
        const auto grid = DelayDopplerGrid::defaults(cfg, *var_points, 1);
        const double scale = 1.0 / (cfg.symbol_duration() * cfg.symbol_duration());
        g_stage = "af variance";
        std::optional<AfComponentStats> mc;
        if (*var_trials > 0) mc = af_component_stats(cfg, c, grid.tau, *var_doppler, *var_trials, s.seed, s.threads);
        leaf.notes.push_back("variances normalized by T_p^2");
        std::string text = leaf.header() + "tau,var_self,var_cross";
        if (mc) text += ",var_self_mc,var_cross_mc";
        text += "\n";
        for (std::size_t i = 0; i < grid.tau.size(); ++i) {
            const double tau = grid.tau[i];
            text += fmt::format("{},{},{}", num(tau), num(scale * variance_self_closed(cfg, c, tau, *var_doppler)),
                                num(scale * variance_cross_closed(cfg, tau, *var_doppler)));
            if (mc) text += fmt::format(",{},{}", num(scale * mc->self_variance[i]), num(scale * mc->cross_variance[i]));
            text += "\n";
        }
        write_output(leaf.out, text);
    };
}

// ---------------------------------------------------------------- air

void setup_air(CLI::App& root, std::vector<std::unique_ptr<Leaf>>& leaves, Shared& s) {
    auto* group = root.add_subcommand("air", "achievable information rate over AWGN");
    group->require_subcommand(1);
    auto trials = std::make_shared<std::size_t>(200000);

    auto& by_c0 = *leaves.emplace_back(std::make_unique<Leaf>());
    by_c0.app = group->add_subcommand("sweep-c0", "AIR of max-entropy PCS over a c0 grid");
    by_c0.command = "air sweep-c0";
    add_modulation(by_c0, s);
    auto grid = std::make_shared<std::string>("1:0.02:1.64");
    auto sigma2 = std::make_shared<double>(0.01);
    by_c0.flag("c0", *grid, "c0 grid, a:step:b or comma list");
    by_c0.flag("sigma2", *sigma2, "complex noise variance");
    by_c0.flag("trials", *trials, "Monte-Carlo samples per point");
    add_mc(by_c0, s);
    add_out(by_c0);
    by_c0.body = [&s, grid, sigma2, trials](Leaf& leaf) {
        const auto base = load_base(s);
        const auto c0s = parse_grid(*grid);
        AirConfig cfg{*sigma2, *trials, s.seed, s.threads};
        g_stage = "air sweep-c0";
        const auto pts = air_vs_c0(base, c0s, cfg);
        std::string text = leaf.header() + "c0,achieved_m4,gap,entropy_bits,air,std_error\n";
        for (const auto& p : pts)
            text += fmt::format("{},{},{},{},{},{}\n", num(p.c0), num(p.achieved_m4), num(p.gap), num(p.entropy_bits),
                                num(p.air.rate), num(p.air.std_error));
        write_output(leaf.out, text);
    };

    auto& by_snr = *leaves.emplace_back(std::make_unique<Leaf>());
    by_snr.app = group->add_subcommand("sweep-snr", "AIR versus SNR for several modulations");
    by_snr.command = "air sweep-snr";
    auto mods = std::make_shared<std::string>("qam16,psk16");
    auto snr = std::make_shared<std::string>("0:2:30");
    by_snr.flag("modulations", *mods, "comma list of modulations");
    by_snr.flag("snr", *snr, "SNR grid in dB, a:step:b or comma list");
    by_snr.flag("trials", *trials, "Monte-Carlo samples per point");
    add_mc(by_snr, s);
    add_out(by_snr);
    by_snr.body = [&s, mods, snr, trials](Leaf& leaf) {
        g_stage = "load constellation";
        const auto names = split(*mods, ',');
        std::vector<Constellation> cs;
        for (const auto& n : names) cs.push_back(parse_modulation(n));
        const auto grid = parse_grid(*snr);
        AirConfig cfg{0.01, *trials, s.seed, s.threads};
        g_stage = "air sweep-snr";
        const auto series = air_vs_snr(cs, grid, cfg);
        std::string text = leaf.header() + "modulation,snr_db,sigma2,air,std_error\n";
        for (std::size_t m = 0; m < series.size(); ++m)
            for (const auto& p : series[m])
                text += fmt::format("{},{},{},{},{}\n", lower(names[m]), num(p.snr_db), num(p.noise_variance),
                                    num(p.air.rate), num(p.air.std_error));
        write_output(leaf.out, text);
    };
}

// ---------------------------------------------------------------- detect

struct CfarFlags {
    double pfa = 1e-3;
    std::size_t window = 16;
    std::size_t guard = 2;
    std::size_t calib_trials = 0;
};

void add_cfar(Leaf& leaf, CfarFlags& f) {
    leaf.flag("pfa", f.pfa, "target false-alarm probability per cell");
    leaf.flag("window", f.window, "CFAR reference cells per side");
    leaf.flag("guard", f.guard, "CFAR guard cells per side");
    leaf.flag("calib-trials", f.calib_trials, "noise profiles for alpha calibration (0 = ~2000 false alarms)");
}

void setup_detect(CLI::App& root, std::vector<std::unique_ptr<Leaf>>& leaves, Shared& s) {
    auto* group = root.add_subcommand("detect", "matched filter + SO-CFAR weak-target detection");
    group->require_subcommand(1);
    auto cfar = std::make_shared<CfarFlags>();

    auto& pd = *leaves.emplace_back(std::make_unique<Leaf>());
    pd.app = group->add_subcommand("pd-sweep", "Pd versus SNR for PCS-shaped constellations");
    pd.command = "detect pd-sweep";
    add_modulation(pd, s);
    add_ofdm(pd, s, true);
    auto c0 = std::make_shared<std::string>("1.0,1.32,1.64");
    auto snr = std::make_shared<std::string>("-5:1:20");
    auto trials = std::make_shared<std::size_t>(5000);
    auto si_db = std::make_shared<double>(10.0);
    auto no_si = std::make_shared<bool>(false);
    auto target = std::make_shared<std::size_t>(8);
    pd.flag("c0", *c0, "c0 list (max-entropy shaping of the base constellation)");
    pd.flag("snr", *snr, "target SNR grid in dB");
    pd.flag("trials", *trials, "trials per SNR point");
    add_cfar(pd, *cfar);
    pd.flag("si-db", *si_db, "self-interference to noise ratio in dB");
    pd.app->add_flag("--no-si", *no_si, "drop the self-interference");
    pd.params.emplace_back("no-si", [no_si] { return render(*no_si); });
    pd.flag("target-cell", *target, "target delay in samples");
    add_mc(pd, s);
    add_out(pd);
    pd.body = [&s, c0, snr, trials, si_db, no_si, target, cfar](Leaf& leaf) {
        const auto base = load_base(s);
        const auto c0s = parse_grid(*c0);
        DetectionScenario scn;
        scn.ofdm = ofdm_from(s);
        scn.include_si = !*no_si;
        scn.si_to_noise_db = *si_db;
        scn.target_cell = *target;
        scn.pfa_target = cfar->pfa;
        scn.snr_grid_db = parse_grid(*snr);
        scn.trials = *trials;
        scn.cfar.window_cells = cfar->window;
        scn.cfar.guard_cells = cfar->guard;
        scn.calib_trials = cfar->calib_trials;
        scn.seed = s.seed;
        scn.threads = s.threads;

        std::string body = "c0,snr_db,pd,trials\n";
        for (double c : c0s) {
            g_stage = fmt::format("pcs solve (c0={})", num(c));
            scn.constellation = shaped(base, solve_pcs(PcsProblem::from(base, c)));
            g_stage = fmt::format("detect pd-sweep (c0={})", num(c));
            const auto res = pd_experiment(scn);
            leaf.notes.push_back(fmt::format("c0={} alpha={} calib_pfa={} calib_cells={}", num(c),
                                             num(res.calibration.alpha), num(res.calibration.achieved.pfa),
                                             res.calibration.achieved.cells));
            for (const auto& p : res.points)
                body += fmt::format("{},{},{},{}\n", num(c), num(p.snr_db), num(p.pd), p.trials);
        }
        write_output(leaf.out, leaf.header() + body);
    };

    auto& cal = *leaves.emplace_back(std::make_unique<Leaf>());
    cal.app = group->add_subcommand("calibrate", "calibrate the SO-CFAR multiplier and check it on held-out noise");
    cal.command = "detect calibrate";
    auto model = std::make_shared<std::string>("matched-filter");
    auto length = std::make_shared<std::size_t>(256);
    auto shape_c0 = std::make_shared<std::string>();
    auto heldout = std::make_shared<std::size_t>(0);
    cal.flag("noise-model", *model, "matched-filter|exponential")
        ->check(CLI::IsMember({"matched-filter", "exponential"}));
    cal.flag("length", *length, "profile length for the exponential model");
    add_modulation(cal, s);
    cal.flag("c0", *shape_c0, "shape the replica constellation (matched-filter model)");
    add_ofdm(cal, s, true);
    add_cfar(cal, *cfar);
    cal.flag("heldout-trials", *heldout, "held-out noise profiles (0 = same as calibration)");
    add_mc(cal, s);
    add_out(cal);
    cal.body = [&s, model, length, shape_c0, heldout, cfar](Leaf& leaf) {
        NoiseProfileModel noise;
        noise.kind = *model == "exponential" ? NoiseModel::exponential : NoiseModel::matched_filter;
        noise.exponential_length = *length;
        if (noise.kind == NoiseModel::matched_filter) {
            noise.ofdm = ofdm_from(s);
            noise.constellation = load_base(s);
            if (!shape_c0->empty()) {
                g_stage = "pcs solve";
                noise.constellation = shaped(
                    noise.constellation, solve_pcs(PcsProblem::from(noise.constellation, parse_double(*shape_c0))));
            }
        }
        CfarConfig shape;
        shape.window_cells = cfar->window;
        shape.guard_cells = cfar->guard;
        const std::size_t trials = cfar->calib_trials
                                       ? cfar->calib_trials
                                       : default_calib_trials(noise.profile_length(), shape, cfar->pfa);
        g_stage = "detect calibrate";
        const auto res = calibrate_alpha(shape, noise, cfar->pfa, trials, s.seed, s.threads);
        shape.alpha = res.alpha;
        g_stage = "detect held-out check";
        const auto check = empirical_pfa(shape, noise, *heldout ? *heldout : trials, s.seed, s.threads);
        leaf.notes.push_back(fmt::format("calibration profiles={} bisection steps={}", trials, res.trace.size()));
        std::string text = leaf.header() +
                           "alpha,calib_pfa,calib_cells,calib_false_alarms,heldout_pfa,heldout_cells,"
                           "heldout_false_alarms\n";
        text += fmt::format("{},{},{},{},{},{},{}\n", num(res.alpha), num(res.achieved.pfa), res.achieved.cells,
                            res.achieved.false_alarms, num(check.pfa), check.cells, check.false_alarms);
        write_output(leaf.out, text);
    };
}

// CLI11 reads "-5:1:20" after an option as a short flag; glue such values to
// the preceding long option so negative grids and numbers parse as values.
std::vector<std::string> glue_negative_values(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) {
        std::string a = argv[i];
        const bool long_opt = a.rfind("--", 0) == 0 && a.find('=') == std::string::npos;
        if (long_opt && i + 1 < argc) {
            const std::string next = argv[i + 1];
            if (next.size() > 1 && next[0] == '-' && (std::isdigit(static_cast<unsigned char>(next[1])) || next[1] == '.')) {
                args.push_back(a + "=" + next);
                ++i;
                continue;
            }
        }
        args.push_back(std::move(a));
    }
    return args;
}

}  // namespace

std::vector<double> parse_grid(const std::string& text) {
    if (text.empty()) throw std::invalid_argument("empty grid");
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3) throw std::invalid_argument("range grid must be a:step:b, got '" + text + "'");
        const double a = parse_double(parts[0]);
        const double step = parse_double(parts[1]);
        const double b = parse_double(parts[2]);
        if (step == 0.0 || (b - a) / step < 0.0)
            throw std::invalid_argument("range grid '" + text + "' has a step that never reaches the end");
        // count from the span so accumulated rounding never drops the endpoint
        const auto count = static_cast<std::size_t>(std::floor((b - a) / step + 1e-9)) + 1;
        std::vector<double> out(count);
        for (std::size_t i = 0; i < count; ++i) out[i] = a + static_cast<double>(i) * step;
        return out;
    }
    std::vector<double> out;
    for (const auto& p : split(text, ',')) out.push_back(parse_double(p));
    return out;
}

Constellation parse_modulation(const std::string& text) {
    const auto t = lower(text);
    if (t == "bpsk") return make_psk(2);
    if (t == "qpsk") return make_psk(4);
    for (const char* family : {"qam", "psk"}) {
        if (t.rfind(family, 0) != 0) continue;
        const auto digits = t.substr(3);
        if (digits.empty() || !std::all_of(digits.begin(), digits.end(), [](unsigned char ch) { return std::isdigit(ch); }))
            break;
        const int order = std::stoi(digits);
        return t[0] == 'q' ? make_qam(order) : make_psk(order);
    }
    throw std::invalid_argument("unknown modulation '" + text + "' (e.g. qam16, psk8, bpsk, qpsk)");
}

int run(int argc, const char* const* argv) {
    g_stage = "parse arguments";
    CLI::App app{"PCS for OFDM sensing: shaping, ambiguity statistics, AIR and CFAR detection", "pcsisac"};
    app.set_version_flag("--version", fmt::format("pcsisac {}", kVersion));
    app.config_formatter(std::make_shared<JsonConfig>(&app));
    app.set_config("--config", "", "JSON file of flag values (command-line flags take precedence)");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.fallthrough();
    app.require_subcommand(1);

    Shared shared;
    std::vector<std::unique_ptr<Leaf>> leaves;
    setup_constellation(app, leaves, shared);
    setup_pcs(app, leaves, shared);
    setup_af(app, leaves, shared);
    setup_air(app, leaves, shared);
    setup_detect(app, leaves, shared);

    auto args = glue_negative_values(argc, argv);
    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "pcsisac: %s failed: %s\n", g_stage.c_str(), e.what());
        return e.get_exit_code() ? e.get_exit_code() : 2;
    }

    try {
        for (auto& leaf : leaves) {
            if (leaf->app->parsed()) {
                leaf->body(*leaf);
                return 0;
            }
        }
        throw std::logic_error("no command selected");
    } catch (const CalibrationFailed& e) {
        std::fprintf(stderr, "pcsisac: %s failed: %s\n", g_stage.c_str(), e.what());
        for (const auto& step : e.trace())
            std::fprintf(stderr, "  alpha=%.9g empirical_pfa=%.9g\n", step.alpha, step.empirical_pfa);
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "pcsisac: %s failed: %s\n", g_stage.c_str(), e.what());
        return 1;
    }
}

}  // namespace pcsisac::cli
