#pragma once

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "triodflow/anisotropy.hpp"
#include "triodflow/diagnostics.hpp"
#include "triodflow/errors.hpp"
#include "triodflow/flow.hpp"
#include "triodflow/network.hpp"
#include "triodflow/vec2.hpp"

namespace triodflow {

struct OutputConfig {
    std::string csv = "out.csv";
    std::string snapshots; // empty = disabled
    int snapshot_every = 100;
    int svg_every = 0;
};

struct InitialConfig {
    bool straight = true;
    Vec2 junction{0.0, 0.0};
    std::array<std::vector<Vec2>, 3> curves; // polylines variant
};

struct RunConfig {
    Anisotropy anisotropy = Anisotropy::isotropic();
    std::array<Vec2, 3> endpoints;
    InitialConfig initial;
    FlowConfig flow;
    OutputConfig output;
    double check_tol = 1e-6;
};

inline std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline double get_num(const nlohmann::json& j, const char* field) {
    if (!j.contains(field) || !j[field].is_number())
        throw ValidationError(std::string("field '") + field + "' must be a number");
    return j[field].get<double>();
}

inline Vec2 get_vec2(const nlohmann::json& j, const char* field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ValidationError(std::string("field '") + field + "' must be a pair of numbers");
    return {j[0].get<double>(), j[1].get<double>()};
}

inline Anisotropy parse_anisotropy(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("family") || !j["family"].is_string())
        throw ValidationError("anisotropy: missing family");
    const std::string fam = j["family"].get<std::string>();
    if (fam == "isotropic") return Anisotropy::isotropic();
    if (fam == "fourier") {
        const double a = get_num(j, "a");
        if (!j.contains("k") || !j["k"].is_number_integer())
            throw ValidationError("fourier frequency 'k' must be an integer");
        const int k = j["k"].get<int>();
        if (k < 2) throw ValidationError("fourier frequency 'k' must be >= 2");
        const double theta0 = j.contains("theta0") ? get_num(j, "theta0") : 0.0;
        return Anisotropy::fourier(a, k, theta0);
    }
    if (fam == "elliptic") {
        if (!j.contains("A") || !j["A"].is_array() || j["A"].size() != 2)
            throw ValidationError("elliptic matrix 'A' must be a 2x2 array");
        const auto& A = j["A"];
        const Vec2 r0 = get_vec2(A[0], "A");
        const Vec2 r1 = get_vec2(A[1], "A");
        if (r0.y != r1.x) throw ValidationError("elliptic matrix 'A' must be symmetric");
        SymMat2 m{r0.x, r0.y, r1.y};
        if (m.a11 <= 0.0 || m.a11 * m.a22 - m.a12 * m.a12 <= 0.0)
            throw ValidationError("elliptic matrix 'A' must be positive definite");
        return Anisotropy::elliptic(m);
    }
    throw ValidationError("anisotropy family '" + fam + "' unknown");
}

} // namespace detail

inline RunConfig parse_config(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(e.what());
    }
    if (!j.is_object()) throw ParseError("config root must be an object");

    RunConfig cfg;
    if (!j.contains("anisotropy")) throw ValidationError("missing 'anisotropy'");
    cfg.anisotropy = detail::parse_anisotropy(j["anisotropy"]);

    if (!j.contains("endpoints") || !j["endpoints"].is_array() || j["endpoints"].size() != 3)
        throw ValidationError("'endpoints' must be an array of three points");
    for (int i = 0; i < 3; ++i) cfg.endpoints[i] = detail::get_vec2(j["endpoints"][i], "endpoints");
    for (int i = 0; i < 3; ++i)
        for (int k = i + 1; k < 3; ++k)
            if (cfg.endpoints[i] == cfg.endpoints[k])
                throw ValidationError("'endpoints' must be pairwise distinct");

    if (j.contains("flow")) {
        const auto& f = j["flow"];
        if (!f.is_object()) throw ValidationError("'flow' must be an object");
        auto opt = [&](const char* name, double dflt) {
            return f.contains(name) ? detail::get_num(f, name) : dflt;
        };
        if (f.contains("N")) {
            if (!f["N"].is_number_integer()) throw ValidationError("'N' must be an integer");
            cfg.flow.N = f["N"].get<int>();
        }
        cfg.flow.cfl = opt("cfl", cfg.flow.cfl);
        cfg.flow.t_max = opt("t_max", cfg.flow.t_max);
        cfg.flow.L_min = opt("L_min", cfg.flow.L_min);
        cfg.flow.K_max = opt("K_max", cfg.flow.K_max);
        cfg.flow.newton_tol = opt("newton_tol", cfg.flow.newton_tol);
        if (f.contains("newton_max_iter")) {
            if (!f["newton_max_iter"].is_number_integer())
                throw ValidationError("'newton_max_iter' must be an integer");
            cfg.flow.newton_max_iter = f["newton_max_iter"].get<int>();
        }
        if (f.contains("reparam_every")) {
            if (!f["reparam_every"].is_number_integer())
                throw ValidationError("'reparam_every' must be an integer");
            cfg.flow.reparam_every = f["reparam_every"].get<int>();
        }
        cfg.flow.delta_reg = opt("delta_reg", cfg.flow.delta_reg);
        cfg.flow.a0_floor = opt("a0_floor", cfg.flow.a0_floor);
    }
    if (cfg.flow.N < 4) throw ValidationError("'N' must be >= 4");
    if (!(cfg.flow.cfl > 0.0) || cfg.flow.cfl > 1.0)
        throw ValidationError("'cfl' must lie in (0, 1]");
    if (!(cfg.flow.t_max > 0.0)) throw ValidationError("'t_max' must be positive");
    if (!(cfg.flow.L_min > 0.0)) throw ValidationError("'L_min' must be positive");
    if (!(cfg.flow.K_max > 0.0)) throw ValidationError("'K_max' must be positive");
    if (!(cfg.flow.newton_tol > 0.0)) throw ValidationError("'newton_tol' must be positive");
    if (cfg.flow.newton_max_iter < 1) throw ValidationError("'newton_max_iter' must be >= 1");
    if (cfg.flow.reparam_every < 0) throw ValidationError("'reparam_every' must be >= 0");
    if (!(cfg.flow.delta_reg > 0.0)) throw ValidationError("'delta_reg' must be positive");
    if (!(cfg.flow.a0_floor > 0.0)) throw ValidationError("'a0_floor' must be positive");

    if (j.contains("initial")) {
        const auto& ini = j["initial"];
        if (!ini.is_object() || !ini.contains("kind") || !ini["kind"].is_string())
            throw ValidationError("'initial' must carry a 'kind'");
        const std::string kind = ini["kind"].get<std::string>();
        if (kind == "straight") {
            cfg.initial.straight = true;
            if (!ini.contains("junction"))
                throw ValidationError("straight initial needs a 'junction'");
            cfg.initial.junction = detail::get_vec2(ini["junction"], "junction");
        } else if (kind == "polylines") {
            cfg.initial.straight = false;
            if (!ini.contains("curves") || !ini["curves"].is_array() || ini["curves"].size() != 3)
                throw ValidationError("'curves' must be an array of three node arrays");
            for (int i = 0; i < 3; ++i) {
                const auto& arr = ini["curves"][i];
                if (!arr.is_array() || arr.size() < 5)
                    throw ValidationError("'curves' entries need at least 5 nodes");
                cfg.initial.curves[i].reserve(arr.size());
                for (const auto& p : arr)
                    cfg.initial.curves[i].push_back(detail::get_vec2(p, "curves"));
            }
            const std::size_t n = cfg.initial.curves[0].size();
            for (int i = 0; i < 3; ++i) {
                if (cfg.initial.curves[i].size() != n)
                    throw ValidationError("'curves' must share one node count");
                if (!(cfg.initial.curves[i].front() == cfg.initial.curves[0].front()))
                    throw ValidationError("'curves' must share the junction node");
                if (!(cfg.initial.curves[i].back() == cfg.endpoints[i]))
                    throw ValidationError("'curves' must end at the matching endpoint");
            }
        } else {
            throw ValidationError("initial kind '" + kind + "' unknown");
        }
    } else {
        cfg.initial.straight = true;
        cfg.initial.junction =
            (cfg.endpoints[0] + cfg.endpoints[1] + cfg.endpoints[2]) / 3.0;
    }

    if (j.contains("output")) {
        const auto& o = j["output"];
        if (!o.is_object()) throw ValidationError("'output' must be an object");
        if (o.contains("csv")) {
            if (!o["csv"].is_string()) throw ValidationError("'csv' must be a path");
            cfg.output.csv = o["csv"].get<std::string>();
        }
        if (o.contains("snapshots") && !o["snapshots"].is_null()) {
            if (!o["snapshots"].is_string()) throw ValidationError("'snapshots' must be a path or null");
            cfg.output.snapshots = o["snapshots"].get<std::string>();
        }
        if (o.contains("snapshot_every")) {
            if (!o["snapshot_every"].is_number_integer())
                throw ValidationError("'snapshot_every' must be an integer");
            cfg.output.snapshot_every = o["snapshot_every"].get<int>();
        }
        if (o.contains("svg_every")) {
            if (!o["svg_every"].is_number_integer())
                throw ValidationError("'svg_every' must be an integer");
            cfg.output.svg_every = o["svg_every"].get<int>();
        }
    }
    if (!cfg.output.snapshots.empty() && cfg.output.snapshot_every < 1)
        throw ValidationError("'snapshot_every' must be >= 1 when snapshots are enabled");
    if (cfg.output.svg_every < 0) throw ValidationError("'svg_every' must be >= 0");
    if (!cfg.output.snapshots.empty() && cfg.output.snapshots == cfg.output.csv)
        throw ValidationError("output paths must be distinct");

    if (j.contains("check_tol")) {
        cfg.check_tol = detail::get_num(j, "check_tol");
        if (!(cfg.check_tol > 0.0)) throw ValidationError("'check_tol' must be positive");
    }
    return cfg;
}

inline std::string serialize_config(const RunConfig& cfg) {
    nlohmann::ordered_json j;
    switch (cfg.anisotropy.family()) {
    case Anisotropy::Family::Isotropic:
        j["anisotropy"] = {{"family", "isotropic"}};
        break;
    case Anisotropy::Family::Fourier:
        j["anisotropy"] = {{"family", "fourier"},
                           {"a", cfg.anisotropy.fourier_a()},
                           {"k", cfg.anisotropy.fourier_k()},
                           {"theta0", cfg.anisotropy.fourier_theta0()}};
        break;
    case Anisotropy::Family::EllipticQuadratic: {
        const auto& A = cfg.anisotropy.matrix();
        j["anisotropy"] = {{"family", "elliptic"},
                           {"A", {{A.a11, A.a12}, {A.a12, A.a22}}}};
        break;
    }
    }
    j["endpoints"] = nlohmann::ordered_json::array();
    for (int i = 0; i < 3; ++i)
        j["endpoints"].push_back({cfg.endpoints[i].x, cfg.endpoints[i].y});
    if (cfg.initial.straight) {
        j["initial"] = {{"kind", "straight"},
                        {"junction", {cfg.initial.junction.x, cfg.initial.junction.y}}};
    } else {
        auto curves = nlohmann::ordered_json::array();
        for (int i = 0; i < 3; ++i) {
            auto arr = nlohmann::ordered_json::array();
            for (const auto& p : cfg.initial.curves[i]) arr.push_back({p.x, p.y});
            curves.push_back(std::move(arr));
        }
        j["initial"] = {{"kind", "polylines"}, {"curves", std::move(curves)}};
    }
    j["flow"] = {{"N", cfg.flow.N},
                 {"cfl", cfg.flow.cfl},
                 {"t_max", cfg.flow.t_max},
                 {"L_min", cfg.flow.L_min},
                 {"K_max", cfg.flow.K_max},
                 {"newton_tol", cfg.flow.newton_tol},
                 {"newton_max_iter", cfg.flow.newton_max_iter},
                 {"reparam_every", cfg.flow.reparam_every},
                 {"delta_reg", cfg.flow.delta_reg},
                 {"a0_floor", cfg.flow.a0_floor}};
    j["output"] = {{"csv", cfg.output.csv},
                   {"snapshot_every", cfg.output.snapshot_every},
                   {"svg_every", cfg.output.svg_every}};
    if (!cfg.output.snapshots.empty())
        j["output"]["snapshots"] = cfg.output.snapshots;
    else
        j["output"]["snapshots"] = nullptr;
    j["check_tol"] = cfg.check_tol;
    return j.dump(2);
}

inline TriodNetwork build_initial(const RunConfig& cfg) {
    if (cfg.initial.straight)
        return straight_triod(cfg.initial.junction, cfg.endpoints, cfg.flow.N);
    std::array<DiscreteCurve, 3> cs;
    for (int i = 0; i < 3; ++i) cs[i] = DiscreteCurve(cfg.initial.curves[i]);
    return TriodNetwork(std::move(cs), cfg.endpoints);
}

// CSV time series, JSON-lines snapshots, SVG frames. The CSV carries one row
// per accepted step; snapshots and frames also record the initial state.
class Emitter {
  public:
    static constexpr const char* csv_header =
        "t,L1,L2,L3,Lphi1,Lphi2,Lphi3,kphi_l2sq,kphi_h1sq,herring_res,qx,qy,a0_min,"
        "lambda_mismatch";

    Emitter(const RunConfig& cfg, const TriodNetwork& net0) : cfg_(cfg) {
        csv_.open(cfg.output.csv, std::ios::trunc);
        if (!csv_) throw IoError("cannot open csv output '" + cfg.output.csv + "'");
        csv_ << csv_header << "\n";
        if (!csv_) throw IoError("csv write failure");

        if (!cfg.output.snapshots.empty()) {
            snap_.open(cfg.output.snapshots, std::ios::trunc);
            if (!snap_) throw IoError("cannot open snapshots output '" + cfg.output.snapshots + "'");
            write_snapshot(0.0, net0);
        }
        if (cfg.output.svg_every > 0) {
            double xmin = net0.curves[0].nodes[0].x, xmax = xmin;
            double ymin = net0.curves[0].nodes[0].y, ymax = ymin;
            for (const auto& c : net0.curves)
                for (const auto& p : c.nodes) {
                    xmin = std::min(xmin, p.x);
                    xmax = std::max(xmax, p.x);
                    ymin = std::min(ymin, p.y);
                    ymax = std::max(ymax, p.y);
                }
            const double cx = 0.5 * (xmin + xmax), cy = 0.5 * (ymin + ymax);
            const double w = std::max(xmax - xmin, 1e-12), h = std::max(ymax - ymin, 1e-12);
            vx_ = cx - 0.6 * w;
            vy_ = cy - 0.6 * h;
            vw_ = 1.2 * w;
            vh_ = 1.2 * h;
            wulff_ = cfg.anisotropy.wulff_boundary(128);
            const auto dotpos = cfg.output.csv.rfind('.');
            svg_stem_ = dotpos == std::string::npos ? cfg.output.csv : cfg.output.csv.substr(0, dotpos);
            write_frame(0, net0);
        }
    }

    void operator()(const FlowState& s, const DiagnosticsRecord& r) {
        csv_ << fmt17(r.t) << ',' << fmt17(r.L[0]) << ',' << fmt17(r.L[1]) << ','
             << fmt17(r.L[2]) << ',' << fmt17(r.Lphi[0]) << ',' << fmt17(r.Lphi[1]) << ','
             << fmt17(r.Lphi[2]) << ',' << fmt17(r.kphi_l2sq) << ',' << fmt17(r.kphi_h1sq)
             << ',' << fmt17(r.herring_res) << ',' << fmt17(r.junction.x) << ','
             << fmt17(r.junction.y) << ',' << fmt17(r.a0_min) << ','
             << fmt17(r.lambda_mismatch) << '\n';
        if (!csv_) throw IoError("csv write failure");
        if (snap_.is_open() && s.step_index % cfg_.output.snapshot_every == 0)
            write_snapshot(s.t, s.net);
        if (cfg_.output.svg_every > 0 && s.step_index % cfg_.output.svg_every == 0)
            write_frame(s.step_index, s.net);
    }

    // final comment line carrying the stop reason
    void finish(const StopReason& reason) {
        csv_ << "# stop: " << to_string(reason) << "\n";
        csv_.flush();
        if (!csv_) throw IoError("csv write failure");
        if (snap_.is_open()) {
            snap_.flush();
            if (!snap_) throw IoError("snapshot write failure");
        }
    }

  private:
    void write_snapshot(double t, const TriodNetwork& net) {
        snap_ << "{\"t\":" << fmt17(t) << ",\"curves\":[";
        for (int i = 0; i < 3; ++i) {
            snap_ << (i ? ",[" : "[");
            for (std::size_t k = 0; k < net.curves[i].nodes.size(); ++k) {
                const auto& p = net.curves[i].nodes[k];
                snap_ << (k ? ",[" : "[") << fmt17(p.x) << ',' << fmt17(p.y) << ']';
            }
            snap_ << ']';
        }
        snap_ << "]}\n";
        if (!snap_) throw IoError("snapshot write failure");
    }

    void write_frame(int step, const TriodNetwork& net) {
        char name[32];
        std::snprintf(name, sizeof(name), "_frame_%06d.svg", step);
        std::ofstream f(svg_stem_ + name, std::ios::trunc);
        if (!f) throw IoError("cannot open svg frame");
        // y axis flipped so the plane is drawn with y up
        const double sw = 0.004 * std::max(vw_, vh_);
        f << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"" << vx_ << ' ' << -(vy_ + vh_)
          << ' ' << vw_ << ' ' << vh_ << "\">\n";
        const char* colors[3] = {"#1f77b4", "#d62728", "#2ca02c"};
        for (int i = 0; i < 3; ++i) {
            f << "<polyline fill=\"none\" stroke=\"" << colors[i] << "\" stroke-width=\"" << sw
              << "\" points=\"";
            for (const auto& p : net.curves[i].nodes) f << p.x << ',' << -p.y << ' ';
            f << "\"/>\n";
        }
        // Wulff boundary inset, top-right corner at 15% of the viewport
        double wr = 0.0;
        for (const auto& p : wulff_) wr = std::max(wr, norm(p));
        const double scale = 0.075 * std::min(vw_, vh_) / wr;
        const double ox = vx_ + 0.88 * vw_, oy = vy_ + 0.12 * vh_;
        f << "<polygon fill=\"none\" stroke=\"#888888\" stroke-width=\"" << sw << "\" points=\"";
        for (const auto& p : wulff_) f << ox + scale * p.x << ',' << -(oy + scale * p.y) << ' ';
        f << "\"/>\n</svg>\n";
        if (!f) throw IoError("svg write failure");
    }

    RunConfig cfg_;
    std::ofstream csv_;
    std::ofstream snap_;
    std::string svg_stem_;
    std::vector<Vec2> wulff_;
    double vx_ = 0, vy_ = 0, vw_ = 1, vh_ = 1;
};

} // namespace triodflow
