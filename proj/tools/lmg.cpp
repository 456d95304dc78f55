// Command-line front end: sector spectra, thermalization times, Pauli
// dynamics, parameter sweeps, figure datasets, the full-space laboratory and
// the radiation-regime classifier.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lmg/fullspace.hpp"
#include "lmg/regime.hpp"
#include "lmg/sweep.hpp"

namespace {

using nlohmann::json;

json load_config(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw CLI::ValidationError("--config", "cannot open " + path);
    json cfg;
    in >> cfg;
    return cfg;
}

// flag > config key > default
template <typename T>
T pick(const std::optional<T>& flag, const json& cfg, const char* key,
       T fallback) {
    if (flag) return *flag;
    if (cfg.contains(key)) return cfg.at(key).get<T>();
    return fallback;
}

std::vector<lmg::Vec3> load_positions(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open positions file " + path);
    std::vector<lmg::Vec3> r;
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        double x, y, z;
        if (std::sscanf(line.c_str(), "%lf %lf %lf", &x, &y, &z) == 3)
            r.push_back({x, y, z});
    }
    if (r.empty())
        throw std::runtime_error("no positions parsed from " + path);
    return r;
}

lmg::Beta parse_beta_json(const json& v) {
    if (v.is_string()) return lmg::Beta::parse(v.get<std::string>());
    return lmg::Beta::finite(v.get<double>());
}

void emit(const std::string& out_dir, const std::string& name,
          const std::string& content) {
    if (out_dir.empty() || out_dir == "-") {
        std::cout << content;
        return;
    }
    std::filesystem::create_directories(out_dir);
    lmg::write_file(out_dir + "/" + name, content);
    std::cerr << "wrote " << out_dir << "/" << name << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"LMG blackbody thermalization toolkit"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir;
    std::string format = "csv";
    int parallel = 1;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--out", out_dir, "output directory ('-' for stdout)");
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--parallel", parallel, "worker pool size")
        ->check(CLI::PositiveNumber);
    // let the global options above also appear after the subcommand name
    app.fallthrough();

    // shared sector options
    std::optional<int> opt_n, opt_two_j;
    std::optional<double> opt_field, opt_coupling, opt_gamma, opt_ratio;
    std::optional<std::string> opt_beta;
    auto add_sector_options = [&](CLI::App* cmd) {
        cmd->add_option("-N,--spins", opt_n, "number of spins N");
        cmd->add_option("--two-j", opt_two_j, "2j (defaults to N)");
        cmd->add_option("--gamma-field", opt_field, "transverse field");
        cmd->add_option("--gamma-ratio", opt_ratio,
                        "transverse field as a multiple of the critical one");
        cmd->add_option("--coupling", opt_coupling, "spin-spin coupling");
        cmd->add_option("--gamma", opt_gamma, "radiation coupling");
        cmd->add_option("--beta", opt_beta, "inverse temperature or 'inf'");
    };

    auto* cmd_spectrum = app.add_subcommand(
        "spectrum", "sector energies, gap and partition function");
    add_sector_options(cmd_spectrum);

    auto* cmd_times = app.add_subcommand(
        "times", "thermalization times of one sector");
    add_sector_options(cmd_times);

    auto* cmd_dynamics = app.add_subcommand(
        "dynamics", "Pauli-equation population evolution");
    add_sector_options(cmd_dynamics);
    std::vector<double> dyn_times;
    int dyn_start = -1;
    cmd_dynamics->add_option("--times", dyn_times, "sample times (ascending)");
    cmd_dynamics->add_option("--start-level", dyn_start,
                             "initial point-mass index (default: top level)");

    auto* cmd_sweep = app.add_subcommand("sweep", "parameter sweep");
    add_sector_options(cmd_sweep);
    std::vector<int> sweep_n;
    std::vector<std::string> sweep_beta;
    std::vector<double> sweep_fields, sweep_ratios;
    cmd_sweep->add_option("--N-grid", sweep_n, "N values");
    cmd_sweep->add_option("--beta-grid", sweep_beta, "beta values ('inf' ok)");
    cmd_sweep->add_option("--Gamma-grid", sweep_fields, "absolute fields");
    cmd_sweep->add_option("--ratio-grid", sweep_ratios,
                          "fields as multiples of the critical field");

    auto* cmd_figures = app.add_subcommand(
        "figures", "regenerate the bundled figure datasets");
    int figure = 0;
    cmd_figures->add_option("--figure", figure, "1, 2 or 3 (0 = all)")
        ->check(CLI::Range(0, 3));

    auto* cmd_fullspace = app.add_subcommand(
        "fullspace", "exact 2^N diagnostics: labels, dipoles, rates");
    add_sector_options(cmd_fullspace);
    std::string positions_path, geometry = "coincident";
    double gamma_y = 1.0, spacing = 1.0;
    cmd_fullspace->add_option("--positions", positions_path,
                              "positions file (x y z per line)");
    cmd_fullspace->add_option("--geometry", geometry,
                              "coincident | chain | cube_random")
        ->check(CLI::IsMember({"coincident", "chain", "cube_random"}));
    cmd_fullspace->add_option("--spacing", spacing, "geometry length scale");
    cmd_fullspace->add_option("--gamma-y", gamma_y, "anisotropy in [0,1]");

    auto* cmd_regime = app.add_subcommand(
        "regime", "classify coherent/incoherent/intermediate");
    double reg_ell = 0.0, reg_a = 0.0, reg_de = 0.0, reg_beta = 0.0;
    double margin_factor = 100.0;
    bool reg_estimate = false;
    cmd_regime->add_option("--ell", reg_ell, "max pair distance [um]");
    cmd_regime->add_option("--a", reg_a, "min pair distance [um]");
    cmd_regime->add_option("--delta-e", reg_de, "max level splitting [eV]");
    cmd_regime->add_option("--beta-ev", reg_beta,
                           "inverse temperature [1/eV], 0 to skip");
    cmd_regime->add_option("--margin-factor", margin_factor,
                           "operational factor for 'much less than'");
    cmd_regime->add_flag("--estimate-coupling", reg_estimate,
                         "add the geometric coupling estimate");

    CLI11_PARSE(app, argc, argv);

    try {
        const json cfg = load_config(config_path);

        const int n = pick(opt_n, cfg, "N", 100);
        const int two_j = pick(opt_two_j, cfg, "two_j", n);
        const double coupling = pick(opt_coupling, cfg, "J_coupling", 1.0);
        const double gamma = pick(opt_gamma, cfg, "gamma_coupling", 0.5);
        const lmg::Beta beta =
            opt_beta ? lmg::Beta::parse(*opt_beta)
                     : (cfg.contains("beta") ? parse_beta_json(cfg.at("beta"))
                                             : lmg::Beta::finite(1.0));

        auto resolve_field = [&](const lmg::SectorParams& probe) {
            if (opt_field) return *opt_field;
            if (opt_ratio) return *opt_ratio * lmg::critical_field(probe);
            if (cfg.contains("Gamma")) return cfg.at("Gamma").get<double>();
            if (cfg.contains("Gamma_over_Gammac"))
                return cfg.at("Gamma_over_Gammac").get<double>() *
                       lmg::critical_field(probe);
            return lmg::critical_field(probe);
        };

        if (*cmd_spectrum) {
            const lmg::SectorParams probe(n, two_j, coupling, 0.0);
            const lmg::SectorParams s(n, two_j, coupling,
                                      resolve_field(probe));
            const auto sp = lmg::sector_spectrum(s);
            const auto rep = lmg::gap(s);
            json out{{"N", s.n_spins},
                     {"two_j", s.two_j},
                     {"J_coupling", s.coupling},
                     {"Gamma", s.field},
                     {"critical_field", lmg::critical_field(s)},
                     {"delta", rep.delta},
                     {"gap", rep.gap},
                     {"branch", lmg::to_string(rep.branch)},
                     {"mz_ground", rep.mz_ground},
                     {"mz_excited", rep.mz_excited},
                     {"degeneracy_flag", rep.degeneracy_flag},
                     {"mz", sp.mz},
                     {"energy", sp.energy}};
            if (!beta.is_zero_temperature()) {
                const auto z = lmg::partition_function(s, beta.value());
                out["log_Z"] = z.log_exact;
                out["ground_shift"] = z.ground_shift;
                if (z.log_asymptotic)
                    out["log_Z_asymptotic"] = *z.log_asymptotic;
            }
            emit(out_dir, "spectrum.json", out.dump(2) + "\n");
        } else if (*cmd_times) {
            const lmg::SectorParams probe(n, two_j, coupling, 0.0);
            const auto rec = lmg::evaluate_grid_point(
                n, two_j, resolve_field(probe), beta, coupling, gamma);
            if (format == "csv")
                emit(out_dir, "times.csv", lmg::to_csv({rec}));
            else
                emit(out_dir, "times.json",
                     lmg::to_json_report({rec}, cfg).dump(2) + "\n");
        } else if (*cmd_dynamics) {
            const lmg::SectorParams probe(n, two_j, coupling, 0.0);
            const lmg::SectorParams s(n, two_j, coupling,
                                      resolve_field(probe));
            const auto g = lmg::sector_generator(s, beta, gamma);
            if (dyn_times.empty()) {
                const auto t = lmg::thermalization_times(g);
                for (int i = 1; i <= 10; ++i)
                    dyn_times.push_back(t.tau * i * 0.5);
            }
            std::vector<double> p0(g.size, 0.0);
            const int start = dyn_start >= 0 ? dyn_start : g.size - 1;
            if (start >= g.size)
                throw std::domain_error("start level out of range");
            p0[start] = 1.0;
            const auto traj = lmg::evolve_pauli(g, p0, dyn_times);
            const auto gibbs = lmg::gibbs_vector(g.energy, beta);
            json samples = json::array();
            for (std::size_t i = 0; i < traj.times.size(); ++i)
                samples.push_back(
                    {{"t", traj.times[i]},
                     {"p", traj.populations[i]},
                     {"l1_to_gibbs", lmg::l1_distance(traj.populations[i],
                                                      gibbs)}});
            json out{{"method", traj.method},
                     {"gibbs", gibbs},
                     {"samples", samples}};
            emit(out_dir, "dynamics.json", out.dump(2) + "\n");
        } else if (*cmd_sweep) {
            lmg::SweepSpec spec;
            spec.coupling = coupling;
            spec.gamma_coupling = gamma;
            spec.parallel = parallel;
            spec.n_grid = !sweep_n.empty()
                              ? sweep_n
                              : cfg.value("N_grid", std::vector<int>{});
            if (cfg.contains("two_j")) {
                spec.j_rule = lmg::JRule::fixed;
                spec.j_fixed = 0.5 * cfg.at("two_j").get<int>();
            }
            if (cfg.contains("j_alpha")) {
                spec.j_rule = lmg::JRule::alpha_n;
                spec.j_alpha = cfg.at("j_alpha").get<double>();
            }
            if (!sweep_fields.empty()) {
                spec.gamma_grid = sweep_fields;
            } else if (!sweep_ratios.empty()) {
                spec.gamma_grid = sweep_ratios;
                spec.gamma_is_ratio = true;
            } else if (cfg.contains("Gamma_grid")) {
                spec.gamma_grid =
                    cfg.at("Gamma_grid").get<std::vector<double>>();
            } else if (cfg.contains("ratio_grid")) {
                spec.gamma_grid =
                    cfg.at("ratio_grid").get<std::vector<double>>();
                spec.gamma_is_ratio = true;
            }
            if (!sweep_beta.empty()) {
                for (const auto& bs : sweep_beta)
                    spec.beta_grid.push_back(lmg::Beta::parse(bs));
            } else if (cfg.contains("beta_grid")) {
                for (const auto& v : cfg.at("beta_grid"))
                    spec.beta_grid.push_back(parse_beta_json(v));
            }
            const auto records = lmg::run_sweep(spec);
            if (format == "csv")
                emit(out_dir, "sweep.csv", lmg::to_csv(records));
            else
                emit(out_dir, "sweep.json",
                     lmg::to_json_report(records, cfg).dump(2) + "\n");
        } else if (*cmd_figures) {
            std::vector<lmg::FigureFile> files;
            if (figure == 0 || figure == 1)
                for (auto& f : lmg::figure1_datasets(coupling, gamma))
                    files.push_back(std::move(f));
            if (figure == 0 || figure == 2)
                for (auto& f : lmg::figure2_datasets(coupling, gamma))
                    files.push_back(std::move(f));
            if (figure == 0 || figure == 3)
                for (auto& f : lmg::figure3_datasets(coupling, gamma))
                    files.push_back(std::move(f));
            for (const auto& f : files) emit(out_dir, f.name, f.csv);
        } else if (*cmd_fullspace) {
            const lmg::SectorParams probe(n, std::max(2, n), coupling, 0.0);
            lmg::FullSpaceModel model(n, coupling, resolve_field(probe),
                                      gamma_y);
            if (!positions_path.empty())
                model.positions = load_positions(positions_path);
            else if (geometry == "coincident")
                model.positions = lmg::positions_coincident(n);
            else if (geometry == "chain")
                model.positions = lmg::positions_chain(n, spacing);
            else
                model.positions = lmg::positions_cube_random(n, spacing, 1);

            const auto sys = lmg::diagonalize_labeled(model);
            json states = json::array();
            for (std::size_t k = 0; k < sys.dim; ++k)
                states.push_back({{"energy", sys.energy[k]},
                                  {"j", sys.j_label[k]},
                                  {"parity", sys.parity[k]},
                                  {"cluster", sys.cluster[k]}});
            const auto coh = lmg::coherent_dipoles(sys, n, gamma);
            const auto inc = lmg::incoherent_dipoles(sys, n, gamma);
            json out{{"N", n},
                     {"gamma_y", gamma_y},
                     {"Gamma", model.field},
                     {"states", states},
                     {"coherent_dipoles", coh},
                     {"incoherent_dipoles", inc},
                     {"ell", lmg::max_pair_distance(model.positions)},
                     {"a", lmg::min_pair_distance(model.positions)}};
            if (n <= 4)
                out["general_dipole_table"] =
                    lmg::general_dipole_table(sys, model);
            emit(out_dir, "fullspace.json", out.dump(2) + "\n");
        } else if (*cmd_regime) {
            const auto a = lmg::regime_classify(reg_ell, reg_a, reg_de,
                                                reg_beta, margin_factor,
                                                reg_estimate);
            json out{{"regime", lmg::to_string(a.regime)},
                     {"ell_um", a.ell_um},
                     {"a_um", a.a_um},
                     {"max_delta_e_ev", a.max_delta_e_ev},
                     {"margin_factor", a.margin_factor},
                     {"coherent_margin", a.coherent_margin},
                     {"incoherent_margin", a.incoherent_margin},
                     {"incobeta_margin", a.incobeta_margin},
                     {"constants",
                      {{"hc_ev_um", lmg::constants::hc_ev_um},
                       {"fine_structure", lmg::constants::fine_structure},
                       {"bohr_radius_um", lmg::constants::bohr_radius_um}}}};
            if (a.coupling_estimate_ev)
                out["coupling_estimate_ev"] = *a.coupling_estimate_ev;
            if (a.geometric_coherent)
                out["geometric_coherent"] = *a.geometric_coherent;
            if (a.geometric_incoherent)
                out["geometric_incoherent"] = *a.geometric_incoherent;
            emit(out_dir, "regime.json", out.dump(2) + "\n");
        }
    } catch (const std::exception& err) {
        std::cerr << "error: " << err.what() << "\n";
        return 1;
    }
    return 0;
}
