#pragma once

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "triodflow/diagnostics.hpp"
#include "triodflow/errors.hpp"
#include "triodflow/flow.hpp"
#include "triodflow/io.hpp"

namespace triodflow {

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ParseError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

inline int cmd_run(const std::string& config_path) {
    const RunConfig cfg = parse_config(read_file(config_path));
    const TriodNetwork net0 = build_initial(cfg);
    Emitter emit(cfg, net0);
    const auto [state, reason] =
        run(net0, cfg.anisotropy, cfg.flow,
            [&](const FlowState& s, const DiagnosticsRecord& r) { emit(s, r); });
    emit.finish(reason);
    std::cout << "stop: " << to_string(reason) << "\n";
    std::cout << "t = " << fmt17(state.t) << ", steps = " << state.step_index << "\n";
    return reason.kind == StopKind::SolverFailure ? 1 : 0;
}

inline int cmd_check(const std::string& config_path) {
    const RunConfig cfg = parse_config(read_file(config_path));
    const auto [m, M] = cfg.anisotropy.ellipticity_bounds();
    const TriodNetwork net = build_initial(cfg);
    const auto rep = admissibility_report(net, cfg.anisotropy, cfg.check_tol,
                                          cfg.flow.a0_floor, cfg.flow.delta_reg);
    std::cout << "ellipticity_bounds: m = " << fmt17(m) << ", M = " << fmt17(M) << "\n";
    std::cout << "herring_res = " << fmt17(rep.herring_res) << "\n";
    std::cout << "kphi_end = " << fmt17(rep.kphi_end[0]) << ' ' << fmt17(rep.kphi_end[1]) << ' '
              << fmt17(rep.kphi_end[2]) << "\n";
    std::cout << "velocity_mismatch = " << fmt17(rep.velocity_mismatch) << "\n";
    std::cout << "parametric_velocity_mismatch = " << fmt17(rep.parametric_velocity_mismatch)
              << "\n";
    std::cout << "lambda_mismatch = " << fmt17(rep.lambda_mismatch) << "\n";
    std::cout << "a0_min = " << fmt17(rep.a0_min) << "\n";
    std::cout << "tol = " << fmt17(rep.tol) << "\n";
    std::cout << (rep.pass ? "pass" : "fail") << "\n";
    return rep.pass ? 0 : 1;
}

inline int cmd_steiner(const std::string& config_path) {
    const RunConfig cfg = parse_config(read_file(config_path));
    const Vec2 q0 = cfg.initial.straight
                        ? cfg.initial.junction
                        : (cfg.endpoints[0] + cfg.endpoints[1] + cfg.endpoints[2]) / 3.0;
    const auto r = steiner_point(cfg.anisotropy, cfg.endpoints, q0);
    double residual = 0.0;
    if (!r.degenerate) {
        Vec2 g{0.0, 0.0};
        for (int i = 0; i < 3; ++i) g += cfg.anisotropy.polar_grad(perp(cfg.endpoints[i] - r.q));
        residual = norm(g);
    }
    std::cout << "q* = " << fmt17(r.q.x) << ' ' << fmt17(r.q.y) << "\n";
    std::cout << "residual = " << fmt17(residual) << "\n";
    std::cout << "energy = " << fmt17(r.energy) << "\n";
    if (r.degenerate) std::cout << "degenerate: minimizer at an endpoint\n";
    return 0;
}

inline int cmd_rate_fit(const std::string& csv_path) {
    std::ifstream f(csv_path);
    if (!f) throw ParseError("cannot read '" + csv_path + "'");
    std::string line;
    if (!std::getline(f, line)) throw ParseError("empty csv");
    auto split = [](const std::string& s) {
        std::vector<std::string> out;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) out.push_back(cell);
        return out;
    };
    const auto header = split(line);
    int t_col = -1, y_col = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == "t") t_col = static_cast<int>(i);
        if (header[i] == "kphi_l2sq") y_col = static_cast<int>(i);
    }
    if (t_col < 0 || y_col < 0) throw ParseError("csv lacks 't'/'kphi_l2sq' columns");
    std::vector<std::pair<double, double>> series;
    while (std::getline(f, line)) {
        if (line.empty() || line[0] == '#') continue;
        const auto cells = split(line);
        if (static_cast<int>(cells.size()) <= std::max(t_col, y_col))
            throw ParseError("csv row with too few columns");
        series.emplace_back(std::strtod(cells[t_col].c_str(), nullptr),
                            std::strtod(cells[y_col].c_str(), nullptr));
    }
    const auto fit = rate_fit(series);
    std::cout << "C = " << fmt17(fit.C) << "\n";
    std::cout << "T_est = " << fmt17(fit.T_est) << "\n";
    std::cout << "rms = " << fmt17(fit.rms) << "\n";
    return 0;
}

inline int cmd_wulff(const std::string& config_path, int n) {
    const RunConfig cfg = parse_config(read_file(config_path));
    for (const auto& p : cfg.anisotropy.wulff_boundary(n))
        std::cout << fmt17(p.x) << ' ' << fmt17(p.y) << "\n";
    return 0;
}

} // namespace detail

// Subcommand entry point. Exit codes: 0 on a normal stop, 1 on solver or fit
// failures, 2 on parse/validation problems (bad arguments included).
inline int dispatch(const std::vector<std::string>& argv) {
    CLI::App app{"anisotropic curvature flow of a triod network"};
    app.require_subcommand(1);

    std::string config_path, csv_path;
    int wulff_n = 0;
    auto* c_run = app.add_subcommand("run", "integrate the flow; writes csv/snapshots/frames");
    c_run->add_option("config", config_path, "JSON config file")->required();
    auto* c_check = app.add_subcommand("check", "print admissibility report and psi bounds");
    c_check->add_option("config", config_path, "JSON config file")->required();
    auto* c_steiner = app.add_subcommand("steiner", "anisotropic Steiner point of the endpoints");
    c_steiner->add_option("config", config_path, "JSON config file")->required();
    auto* c_rate = app.add_subcommand("rate-fit", "fit C/sqrt(T-t) to a run's kphi_l2sq series");
    c_rate->add_option("csv", csv_path, "csv written by run")->required();
    auto* c_wulff = app.add_subcommand("wulff", "sample the Wulff shape boundary");
    c_wulff->add_option("config", config_path, "JSON config file")->required();
    c_wulff->add_option("n", wulff_n, "number of boundary samples")->required();

    std::vector<const char*> cargv;
    cargv.reserve(argv.size());
    for (const auto& s : argv) cargv.push_back(s.c_str());
    try {
        app.parse(static_cast<int>(cargv.size()), cargv.data());
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_run->parsed()) return detail::cmd_run(config_path);
        if (c_check->parsed()) return detail::cmd_check(config_path);
        if (c_steiner->parsed()) return detail::cmd_steiner(config_path);
        if (c_rate->parsed()) return detail::cmd_rate_fit(csv_path);
        if (c_wulff->parsed()) return detail::cmd_wulff(config_path, wulff_n);
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << "\n";
        return 2;
    } catch (const ValidationError& e) {
        std::cerr << "invalid config: " << e.what() << "\n";
        return 2;
    } catch (const NotElliptic& e) {
        std::cerr << "anisotropy not elliptic: " << e.what() << "\n";
        return 2;
    } catch (const SpecViolation& e) {
        std::cerr << "invalid request: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

} // namespace triodflow
