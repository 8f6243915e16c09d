#include <CLI11.hpp>

#include <fstream>
#include <iostream>

#include "vkrod/config.hpp"

namespace {

using namespace vkrod;

struct CliArgs {
    std::string config_path;
    std::string h_list_arg;
    int threads_override = 0;
};

RunConfig load_and_validate(const CliArgs& args) {
    RunConfig cfg = load_config_file(args.config_path);
    if (args.threads_override > 0) cfg.threads = args.threads_override;
    if (!args.h_list_arg.empty()) {
        cfg.h_list.clear();
        std::stringstream ss(args.h_list_arg);
        std::string tok;
        while (std::getline(ss, tok, ','))
            cfg.h_list.push_back(std::stod(tok));
        for (size_t i = 0; i + 1 < cfg.h_list.size(); ++i)
            if (!(cfg.h_list[i + 1] < cfg.h_list[i]))
                throw std::invalid_argument("--h-list must be strictly decreasing");
    }
    return cfg;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    if (!out)
        throw std::runtime_error("cannot write output file: " + path);
    out << content;
}

void maybe_dump_mesh(const RunConfig& cfg, const CrossSection& cs) {
    if (cfg.out_mesh_json.empty()) return;
    Json j;
    Json verts = Json::array();
    for (const auto& v : cs.vertices) verts.push_back(Json::array({v.x(), v.y()}));
    Json tris = Json::array();
    for (const auto& t : cs.triangles) tris.push_back(Json::array({t[0], t[1], t[2]}));
    j["vertices"] = verts;
    j["triangles"] = tris;
    write_text_file(cfg.out_mesh_json, j.dump(2) + "\n");
}

int run_effective(const RunConfig& cfg) {
    if (!cfg.micro || !cfg.section || !cfg.regime)
        throw std::invalid_argument("effective: config needs microstructure, section and regime blocks");
    const CrossSection cs = build_section_from_config(*cfg.section);
    MicrostructureRealization micro = realize(*cfg.micro);
    CellProblem cell(*cfg.regime, cs, micro);
    CellReport report;
    const EffectiveForm eff = cell.effective_form(&report, nullptr, cfg.threads);

    Json out = effective_to_json(eff);
    out["seed"] = cfg.micro->seed;
    out["residuals"] = Json::array({report.residuals[0], report.residuals[1],
                                    report.residuals[2], report.residuals[3]});
    out["iterations"] = Json::array({report.iterations[0], report.iterations[1],
                                     report.iterations[2], report.iterations[3]});
    out["mesh_stats"] = {
        {"vertices", (int)cs.vertices.size()},
        {"triangles", (int)cs.triangles.size()},
        {"axial_nodes", cfg.regime->axial_nodes},
        {"dofs", report.dof_count},
        {"constraints", report.constraint_count},
    };
    const std::string text = out.dump(2) + "\n";
    if (!cfg.out_json.empty())
        write_text_file(cfg.out_json, text);
    else
        std::cout << text;
    maybe_dump_mesh(cfg, cs);
    return 0;
}

EffectiveTable resolve_effective(const RunConfig& cfg) {
    if (!cfg.effective_file.empty()) {
        std::ifstream in(cfg.effective_file);
        if (!in)
            throw std::invalid_argument("cannot read effective file: " + cfg.effective_file);
        Json j;
        in >> j;
        return effective_table_from_json(j);
    }
    if (cfg.effective_inline)
        return *cfg.effective_inline;
    throw std::invalid_argument("solve: config needs an 'effective' block (inline or file)");
}

std::string solution_csv(const RodSolution& sol) {
    std::string csv = "x1,u,v2,v3,w,wp,v2pp,v3pp,E11t,E11h,Mt\n";
    for (size_t i = 0; i < sol.grid.size(); ++i) {
        csv += format_g17(sol.grid[i]) + "," + format_g17(sol.u[i]) + ","
             + format_g17(sol.v2[i]) + "," + format_g17(sol.v3[i]) + ","
             + format_g17(sol.w[i]) + "," + format_g17(sol.wp[i]) + ","
             + format_g17(sol.v2pp[i]) + "," + format_g17(sol.v3pp[i]) + ","
             + format_g17(sol.e11_tilde[i]) + "," + format_g17(sol.e11_hat[i]) + ","
             + format_g17(sol.m_torsion[i]) + "\n";
    }
    return csv;
}

int run_solve(const RunConfig& cfg) {
    const EffectiveTable eff = resolve_effective(cfg);
    const RodSolution sol = solve_rod(eff, cfg.load, cfg.bc, cfg.rod_nodes);
    const std::string csv = solution_csv(sol);
    if (!cfg.out_csv.empty())
        write_text_file(cfg.out_csv, csv);
    else
        std::cout << csv;
    if (!cfg.out_json.empty()) {
        Json j;
        j["energy"] = sol.energy;
        j["seed"] = cfg.seed;
        j["n_nodes"] = (int)sol.grid.size();
        write_text_file(cfg.out_json, j.dump(2) + "\n");
    }
    return 0;
}

int run_verify(const RunConfig& cfg) {
    if (!cfg.micro || !cfg.section || !cfg.regime)
        throw std::invalid_argument("verify: config needs microstructure, section and regime blocks");
    if (cfg.h_list.empty())
        throw std::invalid_argument("verify: need a strictly decreasing h_list (config or --h-list)");
    const CrossSection cs = build_section_from_config(*cfg.section);
    MicrostructureRealization micro = realize(*cfg.micro);
    const SweepResult sweep = convergence_sweep(cfg.h_list, *cfg.regime, cs, micro,
                                                cfg.macro, cfg.macro_L, cfg.threads);
    std::string csv = "h,epsilon,energy,abs_error\n";
    for (const auto& row : sweep.rows)
        csv += format_g17(row.h) + "," + format_g17(row.epsilon) + ","
             + format_g17(row.scaled_energy) + "," + format_g17(row.abs_error) + "\n";
    if (!cfg.out_csv.empty())
        write_text_file(cfg.out_csv, csv);
    else
        std::cout << csv;

    Json j;
    j["limit_value"] = sweep.limit_value;
    j["fitted_rate"] = sweep.fitted_rate;
    j["seed"] = cfg.micro->seed;
    const std::string text = j.dump(2) + "\n";
    if (!cfg.out_json.empty())
        write_text_file(cfg.out_json, text);
    else
        std::cout << text;
    return 0;
}

int run_birkhoff(const RunConfig& cfg) {
    if (!cfg.micro)
        throw std::invalid_argument("birkhoff: config needs a microstructure block");
    if (cfg.birkhoff_g.empty() || cfg.birkhoff_windows.empty())
        throw std::invalid_argument("birkhoff: config needs a 'birkhoff' block with 'g' and 'windows'");
    MicrostructureRealization micro = realize(*cfg.micro);
    const double mean = micro.ensemble_mean(cfg.birkhoff_g);
    std::string csv = "T,average,abs_error\n";
    for (double T : cfg.birkhoff_windows) {
        const double avg = micro.birkhoff_average(cfg.birkhoff_g, T);
        csv += format_g17(T) + "," + format_g17(avg) + "," + format_g17(std::abs(avg - mean)) + "\n";
    }
    if (!cfg.out_csv.empty())
        write_text_file(cfg.out_csv, csv);
    else
        std::cout << csv;
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Homogenized von Karman rod toolkit"};
    app.require_subcommand(1);

    CliArgs args;
    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", args.config_path, "JSON config file")->required();
        sub->add_option("--threads", args.threads_override, "cap on concurrent workers");
    };
    CLI::App* eff = app.add_subcommand("effective", "solve the cell problems, write a0/a0_1/rho0");
    add_common(eff);
    CLI::App* solve = app.add_subcommand("solve", "solve the limit boundary-value problem, write CSV");
    add_common(solve);
    CLI::App* verify = app.add_subcommand("verify", "scaled-energy convergence sweep");
    add_common(verify);
    verify->add_option("--h-list", args.h_list_arg, "comma-separated decreasing h values");
    CLI::App* birkhoff = app.add_subcommand("birkhoff", "ergodic averaging, write CSV");
    add_common(birkhoff);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    RunConfig cfg;
    try {
        cfg = load_and_validate(args);
    } catch (const std::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (eff->parsed()) return run_effective(cfg);
        if (solve->parsed()) return run_solve(cfg);
        if (verify->parsed()) return run_verify(cfg);
        if (birkhoff->parsed()) return run_birkhoff(cfg);
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
