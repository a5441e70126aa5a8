#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mesogrow/analyze.hpp"
#include "mesogrow/bench.hpp"
#include "mesogrow/mit.hpp"
#include "mesogrow/pfic.hpp"
#include "mesogrow/sim_config.hpp"

namespace {

using namespace mesogrow;

std::vector<Vec2> read_envelope_csv(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty file " + path);
    std::istringstream hs(line);
    std::string col;
    int xi = -1, yi = -1, idx = 0;
    while (std::getline(hs, col, ',')) {
        if (col == "x") xi = idx;
        if (col == "y") yi = idx;
        ++idx;
    }
    if (xi < 0 || yi < 0) throw std::runtime_error("no x,y columns in " + path);
    std::vector<Vec2> pts;
    while (std::getline(in, line)) {
        std::istringstream is(line);
        std::string field;
        std::vector<std::string> fields;
        while (std::getline(is, field, ','))
            fields.push_back(field);
        if (static_cast<int>(fields.size()) <= std::max(xi, yi)) continue;
        pts.push_back({std::stod(fields[static_cast<std::size_t>(xi)]),
                       std::stod(fields[static_cast<std::size_t>(yi)])});
    }
    return pts;
}

int report_run(const mit::RunResult& res)
{
    std::cout << "stop: " << res.stop_reason << "  steps: " << res.steps
              << "  t: " << res.t_final << "  wall: " << res.wall_seconds << " s\n";
    return res.diverged ? 2 : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"mesogrow: meshless grain-envelope growth simulator"};
    app.require_subcommand(1);

    std::string config_path, out_dir = "out";
    int threads = 1;
    long seed_offset = 0;
    app.add_option("--threads", threads, "worker threads (currently single-threaded)");
    app.add_option("--seed-offset", seed_offset, "reserved for randomized studies");

    auto add_run_opts = [&](CLI::App* cmd, bool need_config) {
        cmd->add_option("--config", config_path, "simulation config file")
            ->required(need_config)
            ->check(CLI::ExistingFile);
        cmd->add_option("--out", out_dir, "output directory");
    };

    CLI::App* dendrite = app.add_subcommand("dendrite", "single anisotropic dendrite run");
    add_run_opts(dendrite, true);
    CLI::App* isotropic = app.add_subcommand("isotropic", "isotropic-growth verification run");
    add_run_opts(isotropic, true);
    CLI::App* multigrain = app.add_subcommand("multigrain", "multiple interacting grains");
    add_run_opts(multigrain, true);
    CLI::App* pfic_cmd = app.add_subcommand("pfic", "phase-field interface-capturing baseline");
    add_run_opts(pfic_cmd, true);

    CLI::App* bi = app.add_subcommand("bench-interp", "scattered interpolation accuracy study");
    std::vector<int> n_fit_list{100, 400, 1600};
    std::vector<int> n_list{12, 30};
    std::vector<int> m_list{2, 4};
    bi->add_option("--n-fit", n_fit_list, "fit point counts");
    bi->add_option("--n", n_list, "Shepard neighborhood sizes");
    bi->add_option("--m", m_list, "RBF-FD monomial orders");
    bi->add_option("--out", out_dir, "output directory");

    CLI::App* br = app.add_subcommand("bench-reconstruct", "envelope reconstruction study");
    std::vector<double> h_fit_list{0.2, 0.1, 0.05, 0.025};
    std::vector<int> k_list{1, 2, 3, 4};
    double h_test = 0.005;
    br->add_option("--h-fit", h_fit_list, "fit spacings");
    br->add_option("--k", k_list, "spline degrees");
    br->add_option("--h-test", h_test, "evaluation spacing");
    br->add_option("--out", out_dir, "output directory");

    CLI::App* sd = app.add_subcommand("scan-dt", "time-step stability scan (isotropic mode)");
    std::vector<double> dt_list{1.5e-4, 3e-4, 6e-4};
    double t_target = 4.5;
    add_run_opts(sd, true);
    sd->add_option("--dt", dt_list, "time steps to scan");
    sd->add_option("--t-target", t_target, "comparison time");

    CLI::App* an = app.add_subcommand("analyze", "envelope anisotropy / morphology analysis");
    std::string envelope_path;
    double h_e = 0.1;
    an->add_option("--envelope", envelope_path, "envelope csv (x,y columns)")
        ->required()
        ->check(CLI::ExistingFile);
    an->add_option("--h-e", h_e, "envelope spacing for e_max / h_e");

    CLI11_PARSE(app, argc, argv);

    try {
        if (dendrite->parsed() || multigrain->parsed()) {
            SimConfig cfg = parse_config_file(config_path);
            if (multigrain->parsed() && cfg.grains.size() < 2)
                throw std::runtime_error("multigrain requires at least two grains");
            return report_run(mit::run(cfg, out_dir));
        }
        if (isotropic->parsed()) {
            SimConfig cfg = parse_config_file(config_path);
            cfg.isotropic = true;
            return report_run(mit::run(cfg, out_dir));
        }
        if (pfic_cmd->parsed()) {
            SimConfig cfg = parse_config_file(config_path);
            return report_run(pfic::run(cfg, out_dir));
        }
        if (bi->parsed()) {
            std::filesystem::create_directories(out_dir);
            auto rows = bench::bench_interpolation(n_fit_list, n_list, m_list);
            bench::write_interp_csv(out_dir + "/interp.csv", rows);
            for (const auto& r : rows)
                std::cout << r.method << " n_fit=" << r.n_fit << " n=" << r.n
                          << " m=" << r.m << " rel_l2=" << r.rel_l2 << "\n";
            return 0;
        }
        if (br->parsed()) {
            std::filesystem::create_directories(out_dir);
            auto rows = bench::bench_reconstruction(h_fit_list, k_list, h_test);
            bench::write_recon_csv(out_dir + "/recon.csv", rows);
            for (const auto& r : rows)
                std::cout << "h_fit=" << r.h_fit << " k=" << r.k << " n_fit=" << r.n_fit
                          << " max_r_err=" << r.max_radius_err
                          << " max_angle_err=" << r.max_normal_angle_err << "\n";
            return 0;
        }
        if (sd->parsed()) {
            SimConfig cfg = parse_config_file(config_path);
            std::filesystem::create_directories(out_dir);
            auto rows = bench::scan_dt(dt_list, cfg, t_target);
            bench::write_dtscan_csv(out_dir + "/dtscan.csv", rows);
            for (const auto& r : rows)
                std::cout << "dt=" << r.dt
                          << (r.diverged ? " diverged"
                                         : " mean_radius=" + std::to_string(r.mean_radius))
                          << "\n";
            return 0;
        }
        if (an->parsed()) {
            std::vector<Vec2> pts = read_envelope_csv(envelope_path);
            analyze::AnisotropyReport rep = analyze::analyze_anisotropy(pts, h_e);
            std::cout << "e_max=" << rep.e_max << " max_rel=" << rep.max_rel
                      << " e_max/h_e=" << rep.e_max_over_he << "\n";
            std::cout << "center_depression="
                      << (analyze::has_center_depression(pts) ? "yes" : "no") << "\n";
            return 0;
        }
    } catch (const mit::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
