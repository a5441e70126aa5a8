#include "mesogrow/sim_config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mesogrow {

void SimConfig::validate() const {
    if (!(dt > 0)) throw std::runtime_error("config: dt must be positive");
    if (!(h_e > 0) || h_e > h_l) throw std::runtime_error("config: need 0 < h_e <= h_l");
    if (!(r0 > 0)) throw std::runtime_error("config: r0 must be positive");
    if (!(u0 > 0) || !(u0 < 1)) throw std::runtime_error("config: need 0 < u0 < 1");
    if (m != 2 && m != 4) throw std::runtime_error("config: m must be 2 or 4");
    if (k < 1 || k > 4) throw std::runtime_error("config: k must be in 1..4");
    if (grains.empty()) throw std::runtime_error("config: at least one grain seed");
    // grains must start non-overlapping and at least delta apart from each
    // other and from the outer boundary
    double half = L / 2;
    for (std::size_t i = 0; i < grains.size(); ++i) {
        const Vec2& c = grains[i].center;
        double boundary_dist =
            domain_shape == spatial::OuterBoundary::Shape::circle
                ? half - c.norm()
                : std::min(half - std::abs(c.x), half - std::abs(c.y));
        if (boundary_dist - r0 < delta) throw std::runtime_error("invalid seeds");
        for (std::size_t j = i + 1; j < grains.size(); ++j) {
            if (dist(c, grains[j].center) - 2 * r0 < delta)
                throw std::runtime_error("invalid seeds");
        }
    }
}

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r\n");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r\n");
    return s.substr(a, b - a + 1);
}

bool parse_bool(const std::string& v) {
    if (v == "1" || v == "true" || v == "yes") return true;
    if (v == "0" || v == "false" || v == "no") return false;
    throw std::runtime_error("config: bad boolean '" + v + "'");
}

std::vector<double> parse_numbers(const std::string& v) {
    std::vector<double> out;
    std::stringstream ss(v);
    double x;
    while (ss >> x) out.push_back(x);
    return out;
}

} // namespace

SimConfig parse_config_text(const std::string& text) {
    SimConfig c;
    bool grains_cleared = false;
    std::stringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config: expected 'key = value': " + line);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));

        if (key == "L") c.L = std::stod(val);
        else if (key == "r0") c.r0 = std::stod(val);
        else if (key == "u0") c.u0 = std::stod(val);
        else if (key == "delta") c.delta = std::stod(val);
        else if (key == "dt") c.dt = std::stod(val);
        else if (key == "h_e") c.h_e = std::stod(val);
        else if (key == "h_l") c.h_l = std::stod(val);
        else if (key == "m") c.m = std::stoi(val);
        else if (key == "k") c.k = std::stoi(val);
        else if (key == "tip_stop") c.tip_stop = std::stod(val);
        else if (key == "i_max") c.i_max = std::stol(val);
        else if (key == "isotropic") c.isotropic = parse_bool(val);
        else if (key == "t_end") c.t_end = std::stod(val);
        else if (key == "stop_speed") c.stop_speed = std::stod(val);
        else if (key == "w_phi") c.w_phi = std::stod(val);
        else if (key == "b") c.b = std::stod(val);
        else if (key == "phi_env") c.phi_env = std::stod(val);
        else if (key == "phase_substeps") c.phase_substeps = std::stoi(val);
        else if (key == "domain_shape") {
            if (val == "square") c.domain_shape = spatial::OuterBoundary::Shape::square;
            else if (val == "circle") c.domain_shape = spatial::OuterBoundary::Shape::circle;
            else throw std::runtime_error("config: bad domain_shape '" + val + "'");
        } else if (key == "grain") {
            if (!grains_cleared) { c.grains.clear(); grains_cleared = true; }
            std::vector<double> v = parse_numbers(val);
            if (v.size() != 2 && v.size() != 3)
                throw std::runtime_error("config: grain wants 'x y [angle]'");
            c.grains.push_back({{v[0], v[1]}, v.size() == 3 ? v[2] : 0.0});
        } else if (key == "snapshots") {
            c.snapshot_times = parse_numbers(val);
        } else {
            throw std::runtime_error("config: unknown key '" + key + "'");
        }
    }
    c.validate();
    return c;
}

SimConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config_text(ss.str());
}

std::string config_to_text(const SimConfig& c) {
    std::stringstream out;
    out.precision(17);
    out << "L = " << c.L << "\n"
        << "r0 = " << c.r0 << "\n"
        << "u0 = " << c.u0 << "\n"
        << "delta = " << c.delta << "\n"
        << "dt = " << c.dt << "\n"
        << "h_e = " << c.h_e << "\n"
        << "h_l = " << c.h_l << "\n"
        << "m = " << c.m << "\n"
        << "k = " << c.k << "\n"
        << "tip_stop = " << c.tip_stop << "\n"
        << "i_max = " << c.i_max << "\n"
        << "isotropic = " << (c.isotropic ? 1 : 0) << "\n"
        << "domain_shape = "
        << (c.domain_shape == spatial::OuterBoundary::Shape::circle ? "circle" : "square")
        << "\n"
        << "phi_env = " << c.phi_env << "\n"
        << "phase_substeps = " << c.phase_substeps << "\n";
    if (c.t_end) out << "t_end = " << *c.t_end << "\n";
    if (c.stop_speed) out << "stop_speed = " << *c.stop_speed << "\n";
    if (c.w_phi) out << "w_phi = " << *c.w_phi << "\n";
    if (c.b) out << "b = " << *c.b << "\n";
    for (const GrainSeed& g : c.grains)
        out << "grain = " << g.center.x << ' ' << g.center.y << ' ' << g.orientation << "\n";
    if (!c.snapshot_times.empty()) {
        out << "snapshots =";
        for (double t : c.snapshot_times) out << ' ' << t;
        out << "\n";
    }
    return out.str();
}

} // namespace mesogrow
