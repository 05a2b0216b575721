#include "formctl/cli_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace formctl {

using nlohmann::json;

namespace {

json parse_strict(const std::string& text) {
    // Parser callback stack rejects duplicate keys, which the DOM parser
    // would silently overwrite.
    std::vector<std::set<std::string>> scopes;
    json::parser_callback_t cb = [&scopes](int /*depth*/, json::parse_event_t event,
                                           json& parsed) {
        switch (event) {
        case json::parse_event_t::object_start:
            scopes.emplace_back();
            break;
        case json::parse_event_t::object_end:
            scopes.pop_back();
            break;
        case json::parse_event_t::key: {
            const auto key = parsed.get<std::string>();
            if (!scopes.back().insert(key).second)
                throw ConfigError("duplicate key '" + key + "' in configuration");
            break;
        }
        default:
            break;
        }
        return true;
    };
    try {
        return json::parse(text, cb);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("configuration parse error: ") + e.what());
    }
}

void check_keys(const json& obj, const std::string& path,
                const std::set<std::string>& allowed) {
    if (!obj.is_object())
        throw ConfigError(path + ": expected an object");
    for (const auto& [key, _] : obj.items())
        if (!allowed.count(key))
            throw ConfigError(path + ": unknown key '" + key + "'");
}

double get_number(const json& obj, const std::string& path, const std::string& key,
                  std::optional<double> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(path + "." + key + ": missing required number");
    }
    if (!obj[key].is_number())
        throw ConfigError(path + "." + key + ": expected a number");
    return obj[key].get<double>();
}

bool get_bool(const json& obj, const std::string& path, const std::string& key,
              bool fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean())
        throw ConfigError(path + "." + key + ": expected a boolean");
    return obj[key].get<bool>();
}

std::string get_string(const json& obj, const std::string& path, const std::string& key,
                       std::optional<std::string> fallback = std::nullopt) {
    if (!obj.contains(key)) {
        if (fallback) return *fallback;
        throw ConfigError(path + "." + key + ": missing required string");
    }
    if (!obj[key].is_string())
        throw ConfigError(path + "." + key + ": expected a string");
    return obj[key].get<std::string>();
}

Eigen::Vector2d get_vec2(const json& obj, const std::string& path, const std::string& key,
                         Eigen::Vector2d fallback) {
    if (!obj.contains(key)) return fallback;
    const auto& arr = obj[key];
    if (!arr.is_array() || arr.size() != 2 || !arr[0].is_number() || !arr[1].is_number())
        throw ConfigError(path + "." + key + ": expected [x, y]");
    return {arr[0].get<double>(), arr[1].get<double>()};
}

Eigen::VectorXd get_flat_array(const json& arr, const std::string& path) {
    if (!arr.is_array())
        throw ConfigError(path + ": expected an array of numbers");
    Eigen::VectorXd out(static_cast<Eigen::Index>(arr.size()));
    for (std::size_t i = 0; i < arr.size(); ++i) {
        if (!arr[i].is_number())
            throw ConfigError(path + "[" + std::to_string(i) + "]: expected a number");
        out[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
    }
    return out;
}

RobotParams parse_robot(const json& obj, const std::string& path) {
    check_keys(obj, path,
               {"mass", "inertia", "wheel_separation", "wheel_radius", "com_offset"});
    RobotParams p;
    p.mass = get_number(obj, path, "mass", p.mass);
    p.moment_of_inertia = get_number(obj, path, "inertia", p.moment_of_inertia);
    p.wheel_separation = get_number(obj, path, "wheel_separation", p.wheel_separation);
    p.wheel_radius = get_number(obj, path, "wheel_radius", p.wheel_radius);
    p.com_offset = get_number(obj, path, "com_offset", p.com_offset);
    return p;
}

json robot_to_json(const RobotParams& p) {
    return {{"mass", p.mass},
            {"inertia", p.moment_of_inertia},
            {"wheel_separation", p.wheel_separation},
            {"wheel_radius", p.wheel_radius},
            {"com_offset", p.com_offset}};
}

void format_row(std::string& out, const double* values, int count) {
    char buf[64];
    for (int i = 0; i < count; ++i) {
        std::snprintf(buf, sizeof(buf), "%.6f", values[i]);
        if (i) out.push_back(',');
        out += buf;
    }
    out.push_back('\n');
}

class AtomicWriter {
public:
    explicit AtomicWriter(std::filesystem::path dir) : dir_(std::move(dir)) {}

    ~AtomicWriter() {
        std::error_code ec;
        for (const auto& tmp : pending_) std::filesystem::remove(tmp, ec);
    }

    void write(const std::string& name, const std::string& content) {
        const auto tmp = dir_ / (name + ".tmp");
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
        out << content;
        out.flush();
        if (!out) throw IoError("failed writing " + tmp.string());
        out.close();
        pending_.push_back(tmp);
        names_.push_back(name);
    }

    void commit() {
        for (std::size_t i = 0; i < pending_.size(); ++i) {
            std::error_code ec;
            std::filesystem::rename(pending_[i], dir_ / names_[i], ec);
            if (ec)
                throw IoError("failed to finalize " + (dir_ / names_[i]).string() + ": " +
                              ec.message());
        }
        pending_.clear();
        names_.clear();
    }

private:
    std::filesystem::path dir_;
    std::vector<std::filesystem::path> pending_;
    std::vector<std::string> names_;
};

} // namespace

Eigen::VectorXd triangle_formation_basis(double a, double b) {
    const double s3 = std::sqrt(3.0);
    const double y_lo = -s3 * a / 6.0 - s3 * b / 6.0;
    const double y_ap = -s3 * a / 6.0 + s3 * b / 3.0;
    Eigen::VectorXd basis(18);
    basis << a / 2 + b / 2, y_lo, a / 2 - b / 2, y_lo, a / 2, y_ap,
        -a / 2 + b / 2, y_lo, -a / 2 - b / 2, y_lo, -a / 2, y_ap,
        b / 2, s3 * a / 3 - s3 * b / 6, -b / 2, s3 * a / 3 - s3 * b / 6, 0.0,
        s3 * a / 3 + s3 * b / 3;
    return basis;
}

ScenarioConfig parse_config(const std::string& json_text) {
    const json doc = parse_strict(json_text);
    check_keys(doc, "$",
               {"version", "partition", "robots", "initial_conditions", "formation",
                "trajectory", "gains", "potential", "integrator", "outputs", "seed"});
    const int version = static_cast<int>(get_number(doc, "$", "version", 1.0));
    if (version != 1) throw ConfigError("$.version: unsupported document version");

    ScenarioConfig cfg;
    if (!doc.contains("partition") || !doc["partition"].is_array())
        throw ConfigError("$.partition: expected an array of group sizes");
    for (const auto& v : doc["partition"]) {
        if (!v.is_number_integer() || v.get<int>() <= 0)
            throw ConfigError("$.partition: group sizes must be positive integers");
        cfg.partition.group_sizes.push_back(v.get<int>());
    }
    cfg.partition.validate();
    const int n = cfg.partition.total();

    if (doc.contains("robots")) {
        const auto& robots = doc["robots"];
        if (robots.is_array()) {
            if (static_cast<int>(robots.size()) != n)
                throw ConfigError("$.robots: expected " + std::to_string(n) + " entries");
            for (std::size_t i = 0; i < robots.size(); ++i)
                cfg.robots.push_back(
                    parse_robot(robots[i], "$.robots[" + std::to_string(i) + "]"));
        } else {
            const RobotParams p = parse_robot(robots, "$.robots");
            cfg.robots.assign(static_cast<std::size_t>(n), p);
        }
    } else {
        cfg.robots.assign(static_cast<std::size_t>(n), RobotParams{});
    }

    if (!doc.contains("formation"))
        throw ConfigError("$.formation: missing section");
    const auto& formation = doc["formation"];
    check_keys(formation, "$.formation", {"triangle", "basis"});
    if (formation.contains("basis")) {
        cfg.formation_basis = get_flat_array(formation["basis"], "$.formation.basis");
    } else if (formation.contains("triangle")) {
        const auto& tri = formation["triangle"];
        check_keys(tri, "$.formation.triangle", {"a", "b"});
        if (cfg.partition.group_sizes != std::vector<int>{3, 3, 3})
            throw ConfigError("$.formation.triangle: requires partition [3,3,3]");
        cfg.formation_basis = triangle_formation_basis(
            get_number(tri, "$.formation.triangle", "a"),
            get_number(tri, "$.formation.triangle", "b"));
    } else {
        throw ConfigError("$.formation: either 'triangle' or 'basis' is required");
    }

    if (doc.contains("initial_conditions")) {
        const auto& ic = doc["initial_conditions"];
        check_keys(ic, "$.initial_conditions",
                   {"mode", "positions", "offset", "group_offsets", "radius"});
        const std::string mode = get_string(ic, "$.initial_conditions", "mode",
                                            std::string("basis_plus_offset"));
        if (mode == "explicit") {
            cfg.initial.mode = InitialConditions::Mode::Explicit;
            if (!ic.contains("positions"))
                throw ConfigError("$.initial_conditions.positions: required for explicit mode");
            cfg.initial.positions =
                get_flat_array(ic["positions"], "$.initial_conditions.positions");
        } else if (mode == "basis_plus_offset") {
            cfg.initial.mode = InitialConditions::Mode::BasisPlusOffset;
        } else if (mode == "random") {
            cfg.initial.mode = InitialConditions::Mode::Random;
        } else {
            throw ConfigError("$.initial_conditions.mode: unknown mode '" + mode + "'");
        }
        cfg.initial.offset = get_vec2(ic, "$.initial_conditions", "offset",
                                      Eigen::Vector2d::Zero());
        cfg.initial.radius = get_number(ic, "$.initial_conditions", "radius", 0.0);
        if (ic.contains("group_offsets")) {
            const auto& go = ic["group_offsets"];
            if (!go.is_array())
                throw ConfigError("$.initial_conditions.group_offsets: expected an array");
            for (std::size_t g = 0; g < go.size(); ++g) {
                const Eigen::VectorXd v = get_flat_array(
                    go[g], "$.initial_conditions.group_offsets[" + std::to_string(g) + "]");
                if (v.size() != 2)
                    throw ConfigError("$.initial_conditions.group_offsets[" +
                                      std::to_string(g) + "]: expected [x, y]");
                cfg.initial.group_offsets.emplace_back(v[0], v[1]);
            }
        }
    }

    if (doc.contains("trajectory")) {
        const auto& tr = doc["trajectory"];
        check_keys(tr, "$.trajectory", {"kind", "offset", "speed_x", "amplitude", "omega"});
        const std::string kind = get_string(tr, "$.trajectory", "kind",
                                            std::string("sine_track"));
        if (kind != "sine_track")
            throw ConfigError("$.trajectory.kind: unknown kind '" + kind + "'");
        const Eigen::Vector2d off = get_vec2(tr, "$.trajectory", "offset",
                                             Eigen::Vector2d::Zero());
        cfg.trajectory.x0 = off[0];
        cfg.trajectory.y0 = off[1];
        cfg.trajectory.speed_x = get_number(tr, "$.trajectory", "speed_x", 0.0);
        cfg.trajectory.amplitude = get_number(tr, "$.trajectory", "amplitude", 0.0);
        cfg.trajectory.omega = get_number(tr, "$.trajectory", "omega", 0.0);
    }

    if (doc.contains("gains")) {
        const auto& g = doc["gains"];
        check_keys(g, "$.gains",
                   {"slope_intra", "slope_inter", "slope_centroid", "reach_intra",
                    "reach_inter", "reach_centroid", "eps1", "eps2", "boundary_layer",
                    "margin_intra", "margin_inter", "margin_centroid"});
        ControllerGains& cg = cfg.gains;
        cg.slope_intra = get_number(g, "$.gains", "slope_intra", cg.slope_intra);
        cg.slope_inter = get_number(g, "$.gains", "slope_inter", cg.slope_inter);
        cg.slope_centroid = get_number(g, "$.gains", "slope_centroid", cg.slope_centroid);
        cg.reach_intra = get_number(g, "$.gains", "reach_intra", cg.reach_intra);
        cg.reach_inter = get_number(g, "$.gains", "reach_inter", cg.reach_inter);
        cg.reach_centroid = get_number(g, "$.gains", "reach_centroid", cg.reach_centroid);
        cg.eps1 = get_number(g, "$.gains", "eps1", cg.eps1);
        cg.eps2 = get_number(g, "$.gains", "eps2", cg.eps2);
        cg.boundary_layer = get_number(g, "$.gains", "boundary_layer", cg.boundary_layer);
        cg.margin_intra = get_number(g, "$.gains", "margin_intra", cg.margin_intra);
        cg.margin_inter = get_number(g, "$.gains", "margin_inter", cg.margin_inter);
        cg.margin_centroid = get_number(g, "$.gains", "margin_centroid", cg.margin_centroid);
    }

    if (doc.contains("potential")) {
        const auto& p = doc["potential"];
        check_keys(p, "$.potential",
                   {"enabled", "amplitude", "length_scale", "sensing_radius", "probe_speed",
                    "rate_bound_intra", "rate_bound_inter", "rate_bound_centroid",
                    "allow_gain_violation"});
        cfg.collision_enabled = get_bool(p, "$.potential", "enabled", false);
        cfg.allow_gain_violation = get_bool(p, "$.potential", "allow_gain_violation", false);
        PotentialParams& pp = cfg.potential;
        pp.amplitude = get_number(p, "$.potential", "amplitude", pp.amplitude);
        pp.length_scale = get_number(p, "$.potential", "length_scale", pp.length_scale);
        pp.sensing_radius = get_number(p, "$.potential", "sensing_radius", pp.sensing_radius);
        pp.probe_speed = get_number(p, "$.potential", "probe_speed", pp.probe_speed);
        pp.rate_bound_intra = get_number(p, "$.potential", "rate_bound_intra", 0.0);
        pp.rate_bound_inter = get_number(p, "$.potential", "rate_bound_inter", 0.0);
        pp.rate_bound_centroid = get_number(p, "$.potential", "rate_bound_centroid", 0.0);
    }

    if (doc.contains("integrator")) {
        const auto& it = doc["integrator"];
        check_keys(it, "$.integrator", {"scheme", "step", "duration", "record_stride"});
        const std::string scheme = get_string(it, "$.integrator", "scheme",
                                              std::string("rk4"));
        if (scheme == "rk4")
            cfg.integrator = Integrator::Rk4;
        else if (scheme == "semi_implicit_euler")
            cfg.integrator = Integrator::SemiImplicitEuler;
        else
            throw ConfigError("$.integrator.scheme: unknown scheme '" + scheme + "'");
        cfg.step = get_number(it, "$.integrator", "step", cfg.step);
        cfg.duration = get_number(it, "$.integrator", "duration", cfg.duration);
        cfg.record_stride =
            static_cast<int>(get_number(it, "$.integrator", "record_stride", 1.0));
    }

    if (doc.contains("outputs")) {
        const auto& out = doc["outputs"];
        check_keys(out, "$.outputs", {"convergence_tolerance", "hold_time"});
        cfg.conv_tol = get_number(out, "$.outputs", "convergence_tolerance", cfg.conv_tol);
        cfg.conv_hold = get_number(out, "$.outputs", "hold_time", cfg.conv_hold);
    }

    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_integer())
            throw ConfigError("$.seed: expected an integer");
        cfg.seed = doc["seed"].get<std::uint64_t>();
    }

    cfg.validate();
    return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open configuration file " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string serialize_config(const ScenarioConfig& cfg) {
    json doc;
    doc["version"] = 1;
    doc["partition"] = cfg.partition.group_sizes;
    json robots = json::array();
    for (const auto& r : cfg.robots) robots.push_back(robot_to_json(r));
    doc["robots"] = robots;

    json ic;
    switch (cfg.initial.mode) {
    case InitialConditions::Mode::Explicit: {
        ic["mode"] = "explicit";
        ic["positions"] = std::vector<double>(cfg.initial.positions.data(),
                                              cfg.initial.positions.data() +
                                                  cfg.initial.positions.size());
        break;
    }
    case InitialConditions::Mode::BasisPlusOffset:
        ic["mode"] = "basis_plus_offset";
        break;
    case InitialConditions::Mode::Random:
        ic["mode"] = "random";
        break;
    }
    ic["offset"] = {cfg.initial.offset[0], cfg.initial.offset[1]};
    ic["radius"] = cfg.initial.radius;
    if (!cfg.initial.group_offsets.empty()) {
        json go = json::array();
        for (const auto& v : cfg.initial.group_offsets) go.push_back({v[0], v[1]});
        ic["group_offsets"] = go;
    }
    doc["initial_conditions"] = ic;

    doc["formation"] = {{"basis", std::vector<double>(cfg.formation_basis.data(),
                                                      cfg.formation_basis.data() +
                                                          cfg.formation_basis.size())}};
    doc["trajectory"] = {{"kind", "sine_track"},
                         {"offset", {cfg.trajectory.x0, cfg.trajectory.y0}},
                         {"speed_x", cfg.trajectory.speed_x},
                         {"amplitude", cfg.trajectory.amplitude},
                         {"omega", cfg.trajectory.omega}};
    doc["gains"] = {{"slope_intra", cfg.gains.slope_intra},
                    {"slope_inter", cfg.gains.slope_inter},
                    {"slope_centroid", cfg.gains.slope_centroid},
                    {"reach_intra", cfg.gains.reach_intra},
                    {"reach_inter", cfg.gains.reach_inter},
                    {"reach_centroid", cfg.gains.reach_centroid},
                    {"eps1", cfg.gains.eps1},
                    {"eps2", cfg.gains.eps2},
                    {"boundary_layer", cfg.gains.boundary_layer},
                    {"margin_intra", cfg.gains.margin_intra},
                    {"margin_inter", cfg.gains.margin_inter},
                    {"margin_centroid", cfg.gains.margin_centroid}};
    doc["potential"] = {{"enabled", cfg.collision_enabled},
                        {"allow_gain_violation", cfg.allow_gain_violation},
                        {"amplitude", cfg.potential.amplitude},
                        {"length_scale", cfg.potential.length_scale},
                        {"sensing_radius", cfg.potential.sensing_radius},
                        {"probe_speed", cfg.potential.probe_speed},
                        {"rate_bound_intra", cfg.potential.rate_bound_intra},
                        {"rate_bound_inter", cfg.potential.rate_bound_inter},
                        {"rate_bound_centroid", cfg.potential.rate_bound_centroid}};
    doc["integrator"] = {
        {"scheme", cfg.integrator == Integrator::Rk4 ? "rk4" : "semi_implicit_euler"},
        {"step", cfg.step},
        {"duration", cfg.duration},
        {"record_stride", cfg.record_stride}};
    doc["outputs"] = {{"convergence_tolerance", cfg.conv_tol}, {"hold_time", cfg.conv_hold}};
    doc["seed"] = cfg.seed;
    return doc.dump(2) + "\n";
}

ScenarioConfig preset_paper_scenario() {
    ScenarioConfig cfg;
    cfg.partition.group_sizes = {3, 3, 3};
    cfg.robots.assign(9, RobotParams{});
    cfg.formation_basis = triangle_formation_basis(20.0, 7.0);
    cfg.initial.mode = InitialConditions::Mode::BasisPlusOffset;
    cfg.initial.offset = {-10.0, 0.0};
    cfg.initial.group_offsets = {{6.0, 5.0}, {-6.0, -5.0}, {-8.0, 9.0}};
    cfg.initial.radius = 7.0;
    cfg.trajectory = {0.0, 0.0, 1.0, 30.0, 0.1};
    cfg.gains = ControllerGains{}; // s = r = c = 1, delta = 1, eps = 0.1
    // Wide enough that the in-layer feedback rate (delta / (eps1 eps2 width))
    // times the step stays at or below 1: torques are held across a step, so
    // a rate-step product of 2 leaves a neutral period-two oscillation.
    cfg.gains.boundary_layer = 0.1;
    cfg.integrator = Integrator::Rk4;
    cfg.step = 1e-3;
    cfg.duration = 20.0;
    cfg.seed = 42;
    return cfg;
}

ScenarioConfig preset_headon_scenario() {
    ScenarioConfig cfg;
    cfg.partition.group_sizes = {2, 2};
    cfg.robots.assign(4, RobotParams{});
    const double ys = 0.15;
    cfg.formation_basis.resize(8);
    cfg.formation_basis << 5.0, 3.5 + ys, 5.0, -3.5 + ys, -5.0, 3.5 - ys, -5.0, -3.5 - ys;
    cfg.initial.mode = InitialConditions::Mode::Explicit;
    cfg.initial.positions.resize(8);
    cfg.initial.positions << -15.0, 3.5 - ys, -15.0, -3.5 - ys, 15.0, 3.5 + ys, 15.0,
        -3.5 + ys;
    cfg.trajectory = {};
    cfg.gains.slope_intra = 1.0;
    cfg.gains.slope_inter = 0.5;
    cfg.gains.slope_centroid = 1.0;
    cfg.gains.reach_intra = 12.0;
    cfg.gains.reach_inter = 12.0;
    cfg.gains.reach_centroid = 12.0;
    cfg.gains.eps1 = 1.0;
    cfg.gains.eps2 = 1.0;
    cfg.gains.boundary_layer = 0.01;
    cfg.gains.margin_intra = 0.5;
    cfg.gains.margin_inter = 0.5;
    cfg.gains.margin_centroid = 0.5;
    cfg.integrator = Integrator::SemiImplicitEuler;
    cfg.step = 1e-3;
    cfg.duration = 20.0;
    cfg.seed = 7;
    return cfg;
}

ScenarioConfig preset_by_name(const std::string& name) {
    if (name == "paper_3x3") return preset_paper_scenario();
    if (name == "headon_2x2") return preset_headon_scenario();
    throw ConfigError("unknown preset '" + name + "' (available: paper_3x3, headon_2x2)");
}

void write_outputs(const SimResult& result, const ConvergenceReport& report,
                   const ScenarioConfig& config, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory " + out_dir.string());

    const int n = config.robot_count();
    const Eigen::Index records = result.records();

    std::string trajectory = "t,robot_id,x,y,theta,theta_dot,tau_r,tau_l\n";
    for (Eigen::Index k = 0; k < records; ++k) {
        for (int i = 0; i < n; ++i) {
            double row[8] = {result.time[static_cast<std::size_t>(k)],
                             static_cast<double>(i),
                             result.positions(k, 2 * i),
                             result.positions(k, 2 * i + 1),
                             result.headings(k, i),
                             result.heading_rates(k, i),
                             result.torques(k, 2 * i),
                             result.torques(k, 2 * i + 1)};
            format_row(trajectory, row, 8);
        }
    }

    std::string shape = "t";
    for (int j = 0; j < 2 * n; ++j) shape += ",z_" + std::to_string(j);
    for (int j = 0; j < 2 * n; ++j) shape += ",s_" + std::to_string(j);
    shape += ",err_intra,err_inter,err_centroid\n";
    std::vector<double> row(static_cast<std::size_t>(1 + 4 * n + 3));
    for (Eigen::Index k = 0; k < records; ++k) {
        std::size_t c = 0;
        row[c++] = result.time[static_cast<std::size_t>(k)];
        for (int j = 0; j < 2 * n; ++j) row[c++] = result.shape(k, j);
        for (int j = 0; j < 2 * n; ++j) row[c++] = result.sliding(k, j);
        for (int j = 0; j < 3; ++j) row[c++] = result.error_norms(k, j);
        format_row(shape, row.data(), static_cast<int>(row.size()));
    }

    std::string mindist = "t,min_distance\n";
    for (Eigen::Index k = 0; k < records; ++k) {
        double r2[2] = {result.time[static_cast<std::size_t>(k)], result.min_distance[k]};
        format_row(mindist, r2, 2);
    }

    auto timing = [](const BlockTiming& bt) {
        json j;
        j["reach_time"] = bt.reach_time ? json(*bt.reach_time) : json(nullptr);
        j["error_convergence_time"] =
            bt.error_conv_time ? json(*bt.error_conv_time) : json(nullptr);
        j["settling_time_bound"] = bt.bound;
        j["initial_lyapunov"] = bt.initial_lyapunov;
        j["within_bound"] = bt.within_bound;
        return j;
    };
    json rep;
    rep["tolerance"] = report.tolerance;
    rep["hold_time"] = report.hold;
    rep["intra"] = timing(report.intra);
    rep["inter"] = timing(report.inter);
    rep["centroid"] = timing(report.centroid);
    rep["ratio_inter_intra"] =
        report.ratio_inter_intra ? json(*report.ratio_inter_intra) : json(nullptr);
    rep["ratio_centroid_inter"] =
        report.ratio_centroid_inter ? json(*report.ratio_centroid_inter) : json(nullptr);
    rep["min_distance"] = report.min_distance;
    rep["max_potential_rate"] = report.max_potential_rate;
    if (config.collision_enabled) {
        const GainConditionReport gc = check_gain_condition(config.gains, config.potential);
        rep["gain_condition"] = {{"ok", gc.all_ok()},
                                 {"bound_intra", gc.bound_intra},
                                 {"bound_inter", gc.bound_inter},
                                 {"bound_centroid", gc.bound_centroid},
                                 {"margin_intra", gc.margin_intra},
                                 {"margin_inter", gc.margin_inter},
                                 {"margin_centroid", gc.margin_centroid}};
    }

    AtomicWriter writer(out_dir);
    writer.write("trajectory.csv", trajectory);
    writer.write("shape.csv", shape);
    writer.write("mindist.csv", mindist);
    writer.write("report.json", rep.dump(2) + "\n");
    writer.commit();
}

} // namespace formctl
