#include "cli.hpp"

#include "pnar/copula.hpp"
#include "pnar/copula_boot.hpp"
#include "pnar/criteria.hpp"
#include "pnar/errors.hpp"
#include "pnar/gee.hpp"
#include "pnar/model.hpp"
#include "pnar/network.hpp"
#include "pnar/qmle.hpp"
#include "pnar/report.hpp"
#include "pnar/rng.hpp"
#include "pnar/simulate.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace pnar::cli {

namespace {

using nlohmann::json;

struct UnstableSpec : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string part;
    while (std::getline(ss, part, sep)) parts.push_back(part);
    return parts;
}

double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("invalid number '" + s + "' in " + what);
    }
}

int to_int(const std::string& s, const std::string& what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("invalid integer '" + s + "' in " + what);
    }
}

// Edge-list path, "sbm:N[,K]" or "er:N[,p]". Generated graphs draw from the
// "net" sub-stream of the master seed.
Network resolve_network(const std::string& text, std::uint64_t seed) {
    const std::uint64_t net_seed = derive_seed(seed, {stream_tag("net")});
    if (text.rfind("sbm:", 0) == 0) {
        const auto parts = split(text.substr(4), ',');
        if (parts.empty() || parts.size() > 2) throw ParseError("expected sbm:N[,K], got '" + text + "'");
        SbmParams params;
        params.nodes = to_int(parts[0], "--net");
        if (parts.size() == 2) params.blocks = to_int(parts[1], "--net");
        if (params.nodes < 1 || params.blocks < 1) throw ParseError("sbm needs N >= 1 and K >= 1");
        return gen_sbm(params, net_seed);
    }
    if (text.rfind("er:", 0) == 0) {
        const auto parts = split(text.substr(3), ',');
        if (parts.empty() || parts.size() > 2) throw ParseError("expected er:N[,p], got '" + text + "'");
        const int n = to_int(parts[0], "--net");
        if (n < 1) throw ParseError("er needs N >= 1");
        std::optional<double> p;
        if (parts.size() == 2) p = to_double(parts[1], "--net");
        return gen_er(n, p, net_seed);
    }
    return read_edge_list_file(text);
}

PnarSpec parse_spec(Link link, int p, const std::string& beta) {
    if (p < 1) throw ParseError("--p must be >= 1");
    const auto parts = split(beta, ',');
    if (static_cast<int>(parts.size()) != 2 * p + 1)
        throw ParseError("--beta needs 2p+1 = " + std::to_string(2 * p + 1) + " values, got " +
                         std::to_string(parts.size()));
    Eigen::VectorXd theta(parts.size());
    for (std::size_t k = 0; k < parts.size(); ++k) theta(k) = to_double(parts[k], "--beta");
    PnarSpec spec = PnarSpec::from_theta(link, p, theta);
    try {
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    return spec;
}

std::ofstream open_output(const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot write " + path);
    return f;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    auto f = open_output(path);
    f << text;
    if (!f) throw std::runtime_error("failed writing " + path);
}

void emit_json(const json& j, const std::string& path, std::ostream& out) { emit(j.dump(2) + "\n", path, out); }

PanelData load_panel(const std::string& path) {
    PanelData panel;
    panel.counts = read_counts_csv_file(path);
    return panel;
}

void check_shapes(const PanelData& panel, const Network& net) {
    if (panel.nodes() != net.size())
        throw DimensionError("data has " + std::to_string(panel.nodes()) + " nodes but the network has " +
                             std::to_string(net.size()));
}

struct SimulateArgs {
    std::string net, link = "linear", beta, copula = "indep", out, intensity_out, net_out;
    int p = 1, k = 1000, periods = 0, burnin = 500;
    std::uint64_t seed = 0;
    bool strict = false;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& err) {
    const Link link = parse_link(a.link);
    const PnarSpec spec = parse_spec(link, a.p, a.beta);
    CopulaSpec copula;
    try {
        copula = parse_copula(a.copula, a.k);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what());
    }
    if (a.periods < 1) throw ParseError("--T must be >= 1");
    if (a.burnin < 0) throw ParseError("--burnin must be >= 0");
    const Network net = resolve_network(a.net, a.seed);

    const StabilityReport st = check_stability(spec, net);
    SimulateOptions opt;
    opt.periods = a.periods;
    opt.burn_in = a.burnin;
    opt.seed = derive_seed(a.seed, {stream_tag("copula")});
    if (!st.sum_stable) {
        std::ostringstream msg;
        msg << "coefficient sum " << st.sum_condition << " is not below 1; the process is not stationary";
        if (a.strict) throw UnstableSpec(msg.str());
        err << "warning: " << msg.str() << "\n";
        opt.allow_unstable = true;
    }
    opt.keep_intensity = !a.intensity_out.empty();
    const PanelData panel = simulate(spec, net, copula, opt);

    {
        auto f = open_output(a.out);
        write_counts_csv(f, panel.counts);
    }
    const Eigen::VectorXd theta = spec.theta();
    json meta = {{"spec_hash", panel.meta.spec_hash},
                 {"link", link_name(link)},
                 {"p", spec.p},
                 {"theta", std::vector<double>(theta.data(), theta.data() + theta.size())},
                 {"copula", panel.meta.copula},
                 {"K", a.k},
                 {"seed", a.seed},
                 {"burn_in", a.burnin},
                 {"N", panel.nodes()},
                 {"T", panel.periods()},
                 {"saturated", panel.meta.saturated},
                 {"net", a.net},
                 {"sum_condition", st.sum_condition},
                 {"spectral_radius", st.spectral_radius}};
    emit_json(meta, a.out + ".meta.json", err);
    if (!a.intensity_out.empty()) {
        auto f = open_output(a.intensity_out);
        write_intensity_csv(f, *panel.intensity);
    }
    if (!a.net_out.empty()) {
        auto f = open_output(a.net_out);
        write_edge_list(f, net);
    }
    return kOk;
}

struct FitArgs {
    std::string data, net, link = "linear", gee, out;
    int p = 1;
    std::uint64_t seed = 0;
};

int cmd_fit(const FitArgs& a, std::ostream& out) {
    const Link link = parse_link(a.link);
    if (a.p < 1) throw ParseError("--p must be >= 1");
    std::optional<WorkingKind> kind;
    TauMethod method = TauMethod::MaxPairwise;
    if (!a.gee.empty()) {
        const auto parts = split(a.gee, ':');
        if (parts.empty() || parts.size() > 2) throw ParseError("expected --gee kind[:mean|:max]");
        kind = parse_working_kind(parts[0]);
        if (parts.size() == 2) method = parse_tau_method(parts[1]);
    }
    const PanelData panel = load_panel(a.data);
    const Network net = resolve_network(a.net, a.seed);
    check_shapes(panel, net);
    if (panel.periods() < a.p + 1) throw ParseError("panel is too short for lag order " + std::to_string(a.p));

    const Design d = build_design(panel.counts, net, link, a.p);
    const FitResult f = fit(d);
    json j = fit_report(f, information_criteria(f));
    if (kind) j["gee"] = gee_block(gee_fit(d, *kind, f, method));
    emit_json(j, a.out, out);
    return kOk;
}

struct SelectArgs {
    std::string data, net, links = "linear,loglin", out, format = "json";
    int pmax = 2;
    std::uint64_t seed = 0;
};

int cmd_select(const SelectArgs& a, std::ostream& out) {
    std::vector<Link> links;
    for (const auto& s : split(a.links, ',')) links.push_back(parse_link(s));
    if (links.empty()) throw ParseError("--links is empty");
    if (a.pmax < 1) throw ParseError("--pmax must be >= 1");
    const PanelData panel = load_panel(a.data);
    const Network net = resolve_network(a.net, a.seed);
    check_shapes(panel, net);
    if (panel.periods() < a.pmax + 1) throw ParseError("panel is too short for --pmax");

    // Every candidate conditions on the first pmax rows so all likelihoods
    // cover the same observations.
    std::vector<FitResult> fits;
    for (Link link : links)
        for (int p = 1; p <= a.pmax; ++p) fits.push_back(fit(build_design(panel.counts, net, link, p, a.pmax)));
    const auto table = rank_models(fits);
    if (a.format == "text") {
        std::ostringstream text;
        write_ranking_text(text, table);
        emit(text.str(), a.out, out);
    } else {
        emit_json(ranking_report(table), a.out, out);
    }
    return kOk;
}

struct CopulaArgs {
    std::string data, net, link = "linear", grids, out;
    int p = 1, b = 100, k = 1000;
    std::uint64_t seed = 0;
    bool order_by_variance = false;
};

int cmd_copula(const CopulaArgs& a, std::ostream& out) {
    const Link link = parse_link(a.link);
    if (a.p < 1) throw ParseError("--p must be >= 1");
    if (a.b < 1) throw ParseError("--B must be >= 1");
    const auto candidates = a.grids.empty() ? default_copula_grids() : parse_copula_grids(a.grids);
    const PanelData panel = load_panel(a.data);
    const Network net = resolve_network(a.net, a.seed);
    check_shapes(panel, net);
    if (panel.periods() < a.p + 1) throw ParseError("panel is too short for lag order " + std::to_string(a.p));

    BootstrapOptions opt;
    opt.replications = a.b;
    opt.seed = derive_seed(a.seed, {stream_tag("copula")});
    opt.truncation = a.k;
    opt.order_by_variance = a.order_by_variance;
    const CopulaSelection sel = bootstrap_copula_select(panel, net, link, a.p, candidates, opt);
    json j = copula_report(sel);
    j["seed"] = a.seed;
    emit_json(j, a.out, out);
    return kOk;
}

struct DiagnoseArgs {
    std::string net, data, link = "linear", out;
    int p = 1, anchor = 0;
    double delta = 8.0, gamma = 0.5;
    std::uint64_t seed = 0;
};

int cmd_diagnose(const DiagnoseArgs& a, std::ostream& out) {
    const Network net = resolve_network(a.net, a.seed);
    DiagnoseOptions opt;
    opt.delta = a.delta;
    opt.gamma = a.gamma;
    json j;
    if (a.data.empty()) {
        j = diagnostics_report(diagnose_network(net, nullptr, opt));
    } else {
        const Link link = parse_link(a.link);
        const PanelData panel = load_panel(a.data);
        check_shapes(panel, net);
        if (panel.periods() < a.p + 1) throw ParseError("panel is too short for lag order " + std::to_string(a.p));
        const FitResult f = fit(panel, net, link, a.p);
        const Eigen::MatrixXd sigma = empirical_noise_covariance(panel, f.spec(), net);
        j = diagnostics_report(diagnose_network(net, &sigma, opt));
        if (a.anchor < 0 || a.anchor >= net.size()) throw ParseError("--anchor is not a node index");
        j["profile"] = profile_report(correlation_decay_profile(panel, a.anchor));
        j["fit"] = {{"link", link_name(link)}, {"p", a.p}, {"converged", f.converged}};
    }
    j["N"] = net.size();
    emit_json(j, a.out, out);
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Poisson network autoregression: simulate, fit and diagnose count panels", "pnar"};
    app.set_version_flag("--version", std::string("pnar ") + kVersion);
    app.require_subcommand(1);

    SimulateArgs sa;
    auto* sim = app.add_subcommand("simulate", "simulate a count panel");
    sim->add_option("--net", sa.net, "edge-list file, sbm:N[,K] or er:N[,p]")->required();
    sim->add_option("--link", sa.link, "linear or loglin")->capture_default_str();
    sim->add_option("--p", sa.p, "lag order")->capture_default_str();
    sim->add_option("--beta", sa.beta, "beta0,beta1_1..beta1_p,beta2_1..beta2_p")->required();
    sim->add_option("--copula", sa.copula, "indep, gauss:<rho> or clayton:<theta>")->capture_default_str();
    sim->add_option("--K", sa.k, "waiting times drawn per node and step")->capture_default_str();
    sim->add_option("--T", sa.periods, "number of time steps kept")->required();
    sim->add_option("--burnin", sa.burnin, "discarded initial steps")->capture_default_str();
    sim->add_option("--seed", sa.seed, "master seed")->capture_default_str();
    sim->add_option("--out", sa.out, "counts CSV (metadata goes to <out>.meta.json)")->required();
    sim->add_option("--intensity-out", sa.intensity_out, "optional intensity CSV");
    sim->add_option("--net-out", sa.net_out, "optional edge list of the network used");
    sim->add_flag("--strict", sa.strict, "fail with exit code 3 on a non-stationary specification");

    FitArgs fa;
    auto* fit_cmd = app.add_subcommand("fit", "fit a PNAR model by quasi-maximum likelihood");
    fit_cmd->add_option("--data", fa.data, "counts CSV")->required();
    fit_cmd->add_option("--net", fa.net, "edge-list file")->required();
    fit_cmd->add_option("--link", fa.link, "linear or loglin")->capture_default_str();
    fit_cmd->add_option("--p", fa.p, "lag order")->capture_default_str();
    fit_cmd->add_option("--gee", fa.gee, "add a GEE refinement: ar1|eqc[:mean|:max] (default max)");
    fit_cmd->add_option("--seed", fa.seed, "seed for generated networks")->capture_default_str();
    fit_cmd->add_option("--out", fa.out, "report path (stdout if omitted)");

    SelectArgs ca;
    auto* sel = app.add_subcommand("select", "rank lag orders and links by information criteria");
    sel->add_option("--data", ca.data, "counts CSV")->required();
    sel->add_option("--net", ca.net, "edge-list file")->required();
    sel->add_option("--links", ca.links, "comma-separated links")->capture_default_str();
    sel->add_option("--pmax", ca.pmax, "largest lag order")->capture_default_str();
    sel->add_option("--format", ca.format, "json or text")
        ->check(CLI::IsMember({"json", "text"}))
        ->capture_default_str();
    sel->add_option("--seed", ca.seed, "seed for generated networks")->capture_default_str();
    sel->add_option("--out", ca.out, "output path (stdout if omitted)");

    CopulaArgs cb;
    auto* cop = app.add_subcommand("copula", "select the copula family by parametric bootstrap");
    cop->add_option("--data", cb.data, "counts CSV")->required();
    cop->add_option("--net", cb.net, "edge-list file")->required();
    cop->add_option("--link", cb.link, "linear or loglin")->capture_default_str();
    cop->add_option("--p", cb.p, "lag order")->capture_default_str();
    cop->add_option("--B", cb.b, "bootstrap replications")->capture_default_str();
    cop->add_option("--grids", cb.grids, "family:lo:hi:count,... (default gauss 0.1..0.9 and clayton 0.5..8, 17 points)");
    cop->add_option("--K", cb.k, "waiting times drawn per node and step")->capture_default_str();
    cop->add_option("--seed", cb.seed, "master seed")->capture_default_str();
    cop->add_flag("--order-by-variance", cb.order_by_variance, "sort nodes by decreasing sample variance first");
    cop->add_option("--out", cb.out, "output path (stdout if omitted)");

    DiagnoseArgs da;
    auto* diag = app.add_subcommand("diagnose", "network and dependence diagnostics");
    diag->add_option("--net", da.net, "edge-list file, sbm:N[,K] or er:N[,p]")->required();
    diag->add_option("--data", da.data, "counts CSV for residual-based statistics");
    diag->add_option("--link", da.link, "link of the model fitted to --data")->capture_default_str();
    diag->add_option("--p", da.p, "lag order of the model fitted to --data")->capture_default_str();
    diag->add_option("--delta", da.delta, "exponent of log N in mu_xi")->capture_default_str();
    diag->add_option("--gamma", da.gamma, "exponent of N in mu_pi")->capture_default_str();
    diag->add_option("--anchor", da.anchor, "node for the correlation-decay profile")->capture_default_str();
    diag->add_option("--seed", da.seed, "seed for generated networks")->capture_default_str();
    diag->add_option("--out", da.out, "output path (stdout if omitted)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        // Help and version requests arrive as zero-exit parse "errors".
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        err << "error: " << e.what() << "\n";
        return kParseError;
    }

    try {
        if (app.got_subcommand(sim)) return cmd_simulate(sa, err);
        if (app.got_subcommand(fit_cmd)) return cmd_fit(fa, out);
        if (app.got_subcommand(sel)) return cmd_select(ca, out);
        if (app.got_subcommand(cop)) return cmd_copula(cb, out);
        if (app.got_subcommand(diag)) return cmd_diagnose(da, out);
    } catch (const UnstableSpec& e) {
        err << "error: " << e.what() << "\n";
        return kUnstable;
    } catch (const DimensionError& e) {
        err << "error: " << e.what() << "\n";
        return kDimensionError;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kParseError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kRuntimeError;
    }
    return kParseError;
}

}  // namespace pnar::cli
