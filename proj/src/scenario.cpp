#include "hmlab/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hmlab {

using nlohmann::json;

namespace {

Vec parse_vec(const json& j, int dim) {
    Vec v(dim);
    if (!j.is_array() || static_cast<int>(j.size()) > 4)
        throw ConfigError("expected a coordinate array");
    for (size_t i = 0; i < j.size() && i < 4; ++i) v[static_cast<int>(i)] = j[i].get<double>();
    return v;
}

template <typename T>
void get_if(const json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

Scenario parse_scenario(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse: ") + e.what());
    }
    Scenario s;
    try {
        get_if(j, "name", s.name);
        std::string run = "minimize";
        get_if(j, "run", run);
        if (run == "minimize") s.run = RunKind::Minimize;
        else if (run == "flow") s.run = RunKind::Flow;
        else if (run == "picard") s.run = RunKind::Picard;
        else if (run == "diagnose") s.run = RunKind::Diagnose;
        else throw ConfigError("run: unknown kind '" + run + "'");

        std::string init = "harmonic";
        get_if(j, "init", init);
        if (init == "harmonic") s.init = InitKind::Harmonic;
        else if (init == "homogeneous") s.init = InitKind::Homogeneous;
        else throw ConfigError("init: unknown kind '" + init + "'");

        get_if(j, "seed", s.seed);
        get_if(j, "write_fields", s.write_fields);
        get_if(j, "constraint_tol", s.constraint_tol);

        if (!j.contains("grid")) throw ConfigError("grid: missing section");
        const json& jg = j.at("grid");
        get_if(jg, "dim", s.dim);
        get_if(jg, "h", s.h);
        get_if(jg, "extent", s.extent);
        get_if(jg, "distortion_constant", s.distortion_constant);

        if (j.contains("targets")) {
            const json& jt = j.at("targets");
            get_if(jt, "kind", s.target_kind);
            get_if(jt, "radius", s.radius);
        }
        if (j.contains("interface")) {
            const json& ji = j.at("interface");
            get_if(ji, "kind", s.interface_kind);
            get_if(ji, "beta", s.beta);
            get_if(ji, "lambda", s.lambda);
        }
        if (j.contains("boundary")) {
            const json& jb = j.at("boundary");
            get_if(jb, "form", s.boundary_form);
            get_if(jb, "theta_plus", s.theta_plus);
            get_if(jb, "theta_minus", s.theta_minus);
            get_if(jb, "a0", s.lin_a0);
            if (jb.contains("a")) {
                s.lin_a.clear();
                for (const auto& v : jb.at("a")) s.lin_a.push_back(v.get<double>());
            }
            get_if(jb, "bn", s.lin_bn);
            get_if(jb, "wave_amp", s.wave_amp);
            get_if(jb, "wave_k", s.wave_k);
        }
        if (j.contains("minimize")) {
            const json& jm = j.at("minimize");
            get_if(jm, "max_iterations", s.minimize_opts.max_iterations);
            get_if(jm, "energy_tol", s.minimize_opts.energy_tol);
            get_if(jm, "gradient_tol", s.minimize_opts.gradient_tol);
            get_if(jm, "tau0_factor", s.minimize_opts.tau0_factor);
            get_if(jm, "backtracking", s.minimize_opts.backtracking);
            get_if(jm, "cascade_from_h", s.cascade_from_h);
            get_if(jm, "ledger_stride", s.minimize_opts.ledger_stride);
            if (s.minimize_opts.max_iterations < 1)
                throw ConfigError("minimize.max_iterations must be >= 1");
            if (s.minimize_opts.energy_tol <= 0 || s.minimize_opts.gradient_tol <= 0)
                throw ConfigError("minimize tolerances must be positive");
        }
        s.minimize_opts.constraint_tol = s.constraint_tol;
        if (j.contains("flow")) {
            const json& jf = j.at("flow");
            get_if(jf, "t_end", s.flow_opts.t_end);
            get_if(jf, "dt_factor", s.flow_opts.dt_factor);
            get_if(jf, "frame_stride", s.flow_opts.frame_stride);
            get_if(jf, "ledger_stride", s.flow_opts.ledger_stride);
        }
        if (j.contains("picard")) {
            const json& jp = j.at("picard");
            get_if(jp, "horizon", s.picard_cfg.horizon);
            get_if(jp, "dt_factor", s.picard_cfg.dt_factor);
            get_if(jp, "alpha", s.picard_cfg.alpha);
            get_if(jp, "theta_target", s.picard_cfg.theta_target);
            get_if(jp, "max_sweeps", s.picard_cfg.max_sweeps);
            get_if(jp, "chart_scale", s.picard_cfg.chart_scale);
            get_if(jp, "cauchy_tol", s.picard_cfg.cauchy_tol);
            if (s.picard_cfg.alpha <= 0 || s.picard_cfg.alpha >= 1)
                throw ConfigError("picard.alpha must lie in (0,1)");
            if (s.picard_cfg.theta_target >= 1)
                throw ConfigError("picard.theta_target must be < 1");
        }
        if (j.contains("diagnostics")) {
            const json& jd = j.at("diagnostics");
            if (jd.contains("monotonicity")) {
                Scenario::Mono m;
                m.center = parse_vec(jd.at("monotonicity").at("center"), s.dim);
                for (const auto& v : jd.at("monotonicity").at("radii"))
                    m.radii.push_back(v.get<double>());
                s.monotonicity = m;
            }
            if (jd.contains("detect")) {
                Scenario::Detect dtc;
                get_if(jd.at("detect"), "scale", dtc.scale);
                get_if(jd.at("detect"), "eps0", dtc.eps0);
                get_if(jd.at("detect"), "include_interior", dtc.include_interior);
                s.detect = dtc;
            }
            if (jd.contains("decay")) {
                Scenario::Decay dc;
                dc.center = parse_vec(jd.at("decay").at("center"), s.dim);
                get_if(jd.at("decay"), "r", dc.r);
                get_if(jd.at("decay"), "factor", dc.factor);
                s.decay = dc;
            }
            if (jd.contains("struwe")) {
                Scenario::Struwe st;
                st.center = parse_vec(jd.at("struwe").at("center"), s.dim);
                get_if(jd.at("struwe"), "t0", st.t0);
                for (const auto& v : jd.at("struwe").at("radii"))
                    st.radii.push_back(v.get<double>());
                s.struwe = st;
            }
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    s.picard_cfg.seed = s.seed + 12345;
    return s;
}

Scenario load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str());
}

std::string canonical_config(const Scenario& s) {
    json j;
    j["name"] = s.name;
    j["run"] = static_cast<int>(s.run);
    j["init"] = static_cast<int>(s.init);
    j["seed"] = s.seed;
    j["grid"] = {{"dim", s.dim}, {"h", s.h}, {"extent", s.extent},
                 {"distortion_constant", s.distortion_constant}};
    j["targets"] = {{"kind", s.target_kind}, {"radius", s.radius}};
    j["interface"] = {{"kind", s.interface_kind}, {"beta", s.beta}, {"lambda", s.lambda}};
    j["boundary"] = {{"form", s.boundary_form},  {"theta_plus", s.theta_plus},
                     {"theta_minus", s.theta_minus}, {"a0", s.lin_a0},
                     {"a", s.lin_a},             {"bn", s.lin_bn},
                     {"wave_amp", s.wave_amp},   {"wave_k", s.wave_k}};
    j["minimize"] = {{"max_iterations", s.minimize_opts.max_iterations},
                     {"energy_tol", s.minimize_opts.energy_tol},
                     {"gradient_tol", s.minimize_opts.gradient_tol},
                     {"cascade_from_h", s.cascade_from_h}};
    j["flow"] = {{"t_end", s.flow_opts.t_end},
                 {"dt_factor", s.flow_opts.dt_factor},
                 {"frame_stride", s.flow_opts.frame_stride}};
    j["picard"] = {{"horizon", s.picard_cfg.horizon},
                   {"alpha", s.picard_cfg.alpha},
                   {"max_sweeps", s.picard_cfg.max_sweeps}};
    return j.dump();
}

namespace {

Vec circle_point(double radius, double theta) {
    return Vec{radius * std::cos(theta), radius * std::sin(theta)};
}

}  // namespace

AdmissibleProblem build_problem_with_h(const Scenario& s, double h) {
    AdmissibleProblem p;
    p.grid = std::make_shared<SplitGrid>(s.dim, h, s.extent, s.distortion_constant);

    if (s.target_kind == "circle") {
        auto c_plus = std::make_shared<Circle>(Vec{0.0, 0.0}, s.radius);
        std::shared_ptr<const Manifold> n_minus = c_plus;
        if (s.interface_kind == "scaling")
            n_minus = std::make_shared<Circle>(Vec{0.0, 0.0}, s.lambda * s.radius);
        p.target_plus = {c_plus, c_plus};
        p.target_minus = {n_minus, n_minus};
    } else if (s.target_kind == "sphere-equator") {
        auto sph = std::make_shared<Sphere>(Vec{0.0, 0.0, 0.0}, s.radius);
        auto eq = std::make_shared<PlanarCircle3>(Vec{0.0, 0.0, 0.0}, s.radius, 2);
        p.target_plus = {sph, eq};
        p.target_minus = {sph, eq};
    } else if (s.target_kind == "sphere-full") {
        auto sph = std::make_shared<Sphere>(Vec{0.0, 0.0, 0.0}, s.radius);
        p.target_plus = {sph, sph};
        p.target_minus = {sph, sph};
    } else {
        throw ConfigError("targets.kind: unknown '" + s.target_kind + "'");
    }

    if (s.interface_kind == "identity") {
        p.interface = std::make_shared<IdentityInterface>(p.target_plus.inner);
    } else if (s.interface_kind == "rotation") {
        p.interface = std::make_shared<RotationInterface>(p.target_plus.inner,
                                                          p.target_minus.inner, s.beta, 2);
    } else if (s.interface_kind == "scaling") {
        p.interface = std::make_shared<ScalingInterface>(p.target_plus.inner,
                                                         p.target_minus.inner, s.lambda);
    } else {
        throw ConfigError("interface.kind: unknown '" + s.interface_kind + "'");
    }

    const int n = s.dim;
    const double radius = s.radius, beta = s.beta;
    const int split = n - 1;

    if (s.boundary_form == "constant") {
        const Vec pp = s.target_kind == "circle"
                           ? circle_point(radius, s.theta_plus)
                           : Vec{radius * std::cos(s.theta_plus),
                                 radius * std::sin(s.theta_plus), 0.0};
        const Vec pm = p.interface->tubular_forward(pp);
        p.g_plus = [pp](const Vec&) { return pp; };
        p.g_minus = [pm](const Vec&) { return pm; };
    } else if (s.boundary_form == "angles") {
        if (s.target_kind != "circle") throw ConfigError("boundary 'angles' needs circle targets");
        const double t0 = s.theta_plus, t1 = s.theta_minus;
        p.g_plus = [radius, t0](const Vec&) { return circle_point(radius, t0); };
        p.g_minus = [radius, t1](const Vec&) { return circle_point(radius, t1); };
    } else if (s.boundary_form == "angle-linear") {
        if (s.target_kind != "circle")
            throw ConfigError("boundary 'angle-linear' needs circle targets");
        Vec a(n);
        for (int d = 0; d < n && d < static_cast<int>(s.lin_a.size()); ++d) a[d] = s.lin_a[d];
        const double a0 = s.lin_a0, bn = s.lin_bn, lam = s.lambda;
        const bool scaled = s.interface_kind == "scaling";
        p.g_plus = [radius, a0, a](const Vec& x) {
            return circle_point(radius, a0 + dot(a, x));
        };
        p.g_minus = [radius, a0, a, bn, beta, split, lam, scaled](const Vec& x) {
            const double th = a0 + dot(a, x) + beta + bn * x[split];
            return circle_point(scaled ? lam * radius : radius, th);
        };
    } else if (s.boundary_form == "angle-harmonic") {
        // data restricting a globally harmonic angle
        //   a0 + a.x + c x1 xn + w sin(k x1) sinh(k xn)
        // with jump beta; the transmission solution is this angle itself,
        // smooth up to the corner ring
        if (s.target_kind != "circle")
            throw ConfigError("boundary 'angle-harmonic' needs circle targets");
        Vec a(n);
        for (int d = 0; d < n && d < static_cast<int>(s.lin_a.size()); ++d) a[d] = s.lin_a[d];
        const double a0 = s.lin_a0, c = s.lin_bn, w = s.wave_amp, k = s.wave_k;
        auto angle = [a0, a, c, w, k, split](const Vec& x) {
            return a0 + dot(a, x) + c * x[0] * x[split] +
                   w * std::sin(k * x[0]) * std::sinh(k * x[split]);
        };
        p.g_plus = [radius, angle](const Vec& x) { return circle_point(radius, angle(x)); };
        p.g_minus = [radius, angle, beta](const Vec& x) {
            return circle_point(radius, angle(x) + beta);
        };
    } else if (s.boundary_form == "radial-projection") {
        p.g_plus = [n](const Vec& x) {
            const double r = x.norm();
            Vec v(3);
            for (int d = 0; d < n; ++d) v[d] = x[d] / r;
            return v;
        };
        p.g_minus = p.g_plus;
        if (s.interface_kind != "identity")
            throw ConfigError("radial-projection boundary requires the identity interface");
    } else if (s.boundary_form == "geodesic-profile") {
        // closed-form 1-D matching profile run along the split axis
        const double t0 = s.theta_plus, t1 = s.theta_minus;
        const double mid = 0.5 * (t0 + t1 - beta);
        const double slope = 0.5 * (t0 - t1 + beta);
        const bool circle = s.target_kind == "circle";
        p.g_plus = [radius, mid, slope, split, circle](const Vec& x) {
            const double th = mid + slope * x[split];
            if (circle) return circle_point(radius, th);
            return Vec{radius * std::cos(th), radius * std::sin(th), 0.0};
        };
        p.g_minus = [radius, mid, slope, beta, split, circle](const Vec& x) {
            const double th = mid + beta + slope * x[split];
            if (circle) return circle_point(radius, th);
            return Vec{radius * std::cos(th), radius * std::sin(th), 0.0};
        };
    } else {
        throw ConfigError("boundary.form: unknown '" + s.boundary_form + "'");
    }
    return p;
}

AdmissibleProblem build_problem(const Scenario& s) { return build_problem_with_h(s, s.h); }

ValidationReport validate_scenario(const Scenario& s) {
    ValidationReport rep;
    AdmissibleProblem p = build_problem(s);
    rep.boundary_membership = p.boundary_membership_residual();
    rep.edge_compatibility = p.compatibility_residual();
    const double tol = std::max(s.constraint_tol, 1e-8);
    if (rep.boundary_membership > tol) {
        rep.ok = false;
        rep.messages.push_back("boundary data leaves the targets: residual " +
                               std::to_string(rep.boundary_membership));
    }
    if (rep.edge_compatibility > tol) {
        rep.ok = false;
        for (std::int64_t id : p.grid->sigma_edge_nodes()) {
            const Vec x = p.grid->position(id);
            const double r =
                (p.g_minus(x) - p.interface->tubular_forward(p.g_plus(x))).norm();
            if (r > tol)
                rep.messages.push_back("edge node " + std::to_string(id) +
                                       " compatibility violation " + std::to_string(r));
        }
    }
    if (s.run == RunKind::Flow && rep.ok) {
        CoupledField u0 = s.init == InitKind::Harmonic ? initialize_admissible(p)
                                                       : initialize_homogeneous(p);
        rep.initial_flux_compat = initial_flux_compatibility(u0, p);
        if (rep.initial_flux_compat > 10 * s.h)
            rep.messages.push_back(
                "warning: initial data fails the flux compatibility (residual " +
                std::to_string(rep.initial_flux_compat) + "); run proceeds flagged");
    }
    return rep;
}

}  // namespace hmlab
