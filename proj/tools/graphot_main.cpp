// Command-line front end: graph generation, single distances, batch pairwise
// matrices, kernel matrices, benchmarking and the self-verification suite.
//
// Exit codes: 0 success, 1 verification failure, 2 parameter error,
// 3 numerical failure, 4 I/O error.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "graphot/batch.hpp"
#include "graphot/ept.hpp"
#include "graphot/errors.hpp"
#include "graphot/graph.hpp"
#include "graphot/measure.hpp"
#include "graphot/nfunc.hpp"
#include "graphot/ost.hpp"
#include "graphot/reference.hpp"
#include "json.hpp"

namespace {

using namespace graphot;
using nlohmann::json;
using clock_type = std::chrono::steady_clock;

struct Options {
    // Shared transport parameters (defaults follow the standard setup:
    // b = lambda = 1, alpha = 0, affine weights a1 = b, a0 = 1).
    std::string phi = "linear";
    double b = 1.0;
    double lambda = 1.0;
    double alpha = 0.0;
    std::string w1 = "1,1";
    std::string w2 = "1,1";

    std::string graph_path;
    int gen_nodes = 0;
    std::string gen_flavor = "sqrt";
    std::uint64_t gen_seed = 0;

    std::string mu_path;
    std::string nu_path;
    std::string measures_dir;
    std::string out_path;
    std::string format = "json";  // json|csv for records, csv|bin for matrices

    // ept
    double eps = 0.1;
    double tol_t = 1e-4;
    std::string bracket = "exact";
    std::string inner = "sinkhorn";
    double sinkhorn_tol = 1e-7;
    int sinkhorn_max_iter = 10000;

    // pairwise / bench
    std::string method = "ost";
    int threads = 1;
    int random_pairs = 0;
    int max_supports = 50;
    std::uint64_t seed = 0;

    // kernel
    std::string dist_path;
    double t_bar = 1.0;
    double diag_add = 0.0;

    // verify
    int instances = 20;
};

WeightFunction parse_weight(const std::string& spec) {
    const auto comma = spec.find(',');
    if (comma == std::string::npos)
        throw param_error("weight spec must be 'a1,a0' (affine in root distance)");
    try {
        const double a1 = std::stod(spec.substr(0, comma));
        const double a0 = std::stod(spec.substr(comma + 1));
        return WeightFunction::affine(a1, a0);
    } catch (const std::invalid_argument&) {
        throw param_error("cannot parse weight spec: " + spec);
    }
}

OstParams make_params(const Options& o) {
    OstParams p;
    p.b = o.b;
    p.lambda = o.lambda;
    p.alpha = o.alpha;
    p.w1 = parse_weight(o.w1);
    p.w2 = parse_weight(o.w2);
    return p;
}

EptParams make_ept_params(const Options& o) {
    EptParams p;
    p.base = make_params(o);
    p.eps = o.eps;
    p.tol_t_rel = o.tol_t;
    p.sinkhorn_tol = o.sinkhorn_tol;
    p.sinkhorn_max_iter = o.sinkhorn_max_iter;
    if (o.bracket == "exact")
        p.bracket = BracketMode::Exact;
    else if (o.bracket == "entropic")
        p.bracket = BracketMode::Entropic;
    else
        throw param_error("bracket must be 'exact' or 'entropic'");
    if (o.inner == "sinkhorn")
        p.inner = InnerSolver::Sinkhorn;
    else if (o.inner == "exact")
        p.inner = InnerSolver::Exact;
    else
        throw param_error("inner must be 'sinkhorn' or 'exact'");
    return p;
}

GraphFlavor parse_flavor(const std::string& s) {
    if (s == "log") return GraphFlavor::Log;
    if (s == "sqrt") return GraphFlavor::Sqrt;
    throw param_error("flavor must be 'log' or 'sqrt'");
}

Graph obtain_graph(const Options& o) {
    if (!o.graph_path.empty()) return load_graph(o.graph_path);
    if (o.gen_nodes > 0)
        return generate_graph(o.gen_nodes, parse_flavor(o.gen_flavor), o.gen_seed);
    throw param_error("provide --graph FILE or --gen-nodes N");
}

void emit_record(const Options& o, const json& record) {
    if (o.format == "csv") {
        std::string header, row;
        for (auto it = record.begin(); it != record.end(); ++it) {
            if (!header.empty()) {
                header += ",";
                row += ",";
            }
            header += it.key();
            row += it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
        }
        std::cout << header << "\n" << row << "\n";
    } else {
        std::cout << record.dump(2) << "\n";
    }
}

void write_matrix(const Options& o, const Eigen::MatrixXd& m) {
    if (o.out_path.empty()) throw param_error("--out is required");
    const bool binary = o.format == "bin" || (o.format != "csv" && o.out_path.ends_with(".bin"));
    if (binary)
        save_matrix_binary(o.out_path, m);
    else
        save_matrix_csv(o.out_path, m);
}

int cmd_gen_graph(const Options& o) {
    if (o.gen_nodes < 2) throw param_error("--nodes must be at least 2");
    const Graph g = generate_graph(o.gen_nodes, parse_flavor(o.gen_flavor), o.gen_seed);
    if (o.out_path.empty())
        write_graph(std::cout, g);
    else
        save_graph(o.out_path, g);
    return 0;
}

int cmd_ost(const Options& o) {
    const Graph g = obtain_graph(o);
    const auto spt = build_spt(g);
    const auto mu = load_measure(o.mu_path);
    const auto nu = load_measure(o.nu_path);
    const auto params = make_params(o);
    const auto phi = NFunction::parse(o.phi);
    const auto t0 = clock_type::now();
    const auto res = solve_ost(mu, nu, g, spt, phi, params);
    const double seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    json rec = {{"value", res.value},
                {"theta", res.theta},
                {"k_opt", res.k_opt ? json(*res.k_opt) : json()},
                {"iterations", res.iterations},
                {"active_edges", res.active_edge_count},
                {"seconds", seconds}};
    emit_record(o, rec);
    return 0;
}

int cmd_ept(const Options& o) {
    const Graph g = obtain_graph(o);
    const auto spt = build_spt(g);
    const auto mu = load_measure(o.mu_path);
    const auto nu = load_measure(o.nu_path);
    const auto params = make_ept_params(o);
    const auto phi = NFunction::parse(o.phi);
    const auto t0 = clock_type::now();
    const auto res = orlicz_ept(mu, nu, g, spt, phi, params);
    const double seconds = std::chrono::duration<double>(clock_type::now() - t0).count();
    json rec = {{"value", res.value},
                {"t_star", res.trace.final_t},
                {"t_lower", res.trace.t_lower},
                {"t_upper", res.trace.t_upper},
                {"bisection_steps", res.trace.midpoints.size()},
                {"inner_iterations", res.trace.total_inner_iterations},
                {"entropic_bracket", res.trace.used_entropic_bracket},
                {"seconds", seconds}};
    emit_record(o, rec);
    return 0;
}

int cmd_pairwise(const Options& o) {
    const Graph g = obtain_graph(o);
    const auto spt = build_spt(g);
    const auto measures = load_measure_dir(o.measures_dir);
    const auto phi = NFunction::parse(o.phi);

    PairwiseOptions popts;
    popts.threads = o.threads;
    PairSolver solver;
    if (o.method == "ost") {
        const auto params = make_params(o);
        params.validate();
        popts.symmetric = params.w1.at_root() == params.w2.at_root();
        popts.zero_diagonal = true;
        solver = [&, params](const DiscreteMeasure& a, const DiscreteMeasure& b) {
            return solve_ost(a, b, g, spt, phi, params).value;
        };
    } else if (o.method == "ept") {
        const auto params = make_ept_params(o);
        popts.symmetric = params.base.w1.same_as(params.base.w2);
        popts.zero_diagonal = false;
        solver = [&, params](const DiscreteMeasure& a, const DiscreteMeasure& b) {
            return orlicz_ept(a, b, g, spt, phi, params).value;
        };
    } else {
        throw param_error("method must be 'ost' or 'ept'");
    }

    const auto res = pairwise_matrix(measures, solver, popts);
    write_matrix(o, res.distances);
    if (!res.failures.empty()) {
        save_failures(o.out_path + ".errors.json", res.failures);
        std::cerr << res.failures.size() << " pair(s) failed; see " << o.out_path
                  << ".errors.json\n";
    }
    return 0;
}

int cmd_kernel(const Options& o) {
    const auto d = load_matrix_auto(o.dist_path);
    write_matrix(o, kernel_matrix(d, o.t_bar, o.diag_add));
    return 0;
}

int cmd_bench(const Options& o) {
    const Graph g = obtain_graph(o);
    const auto spt_start = clock_type::now();
    const auto spt = build_spt(g);
    const double spt_seconds =
        std::chrono::duration<double>(clock_type::now() - spt_start).count();

    std::vector<std::pair<DiscreteMeasure, DiscreteMeasure>> pairs;
    if (!o.measures_dir.empty()) {
        const auto measures = load_measure_dir(o.measures_dir);
        for (std::size_t i = 0; i + 1 < measures.size(); i += 2)
            pairs.emplace_back(measures[i], measures[i + 1]);
    } else if (o.random_pairs > 0) {
        std::mt19937_64 rng(o.seed);
        for (int i = 0; i < o.random_pairs; ++i)
            pairs.emplace_back(reference::random_measure(g, o.max_supports, rng),
                               reference::random_measure(g, o.max_supports, rng));
    }
    if (pairs.empty()) throw param_error("provide --measures DIR or --random-pairs N");

    const auto phi = NFunction::parse(o.phi);
    const auto ost_params = make_params(o);
    const auto ept_params = make_ept_params(o);
    PairSolver ost_solver = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return solve_ost(a, b, g, spt, phi, ost_params).value;
    };
    PairSolver ept_solver = [&](const DiscreteMeasure& a, const DiscreteMeasure& b) {
        return orlicz_ept(a, b, g, spt, phi, ept_params).value;
    };

    const auto rep = bench_pairs(pairs, ost_solver, ept_solver, spt_seconds, 0.0);
    if (!o.out_path.empty()) {
        std::ofstream out(o.out_path);
        if (!out) throw io_error("cannot write bench csv: " + o.out_path);
        out << bench_csv(rep);
    }
    json rec = {{"pairs", pairs.size()},
                {"median_ost_seconds", rep.median_ost},
                {"median_ept_seconds", rep.median_ept},
                {"speedup", rep.speedup}};
    std::cout << rec.dump(2) << "\n";
    return 0;
}

int cmd_verify(const Options& o) {
    const auto summary = reference::run_verify_suite(o.seed == 0 ? 2024 : o.seed, o.instances);
    const auto report = reference::verify_report_json(summary);
    if (o.out_path.empty()) {
        std::cout << report << "\n";
    } else {
        std::ofstream out(o.out_path);
        if (!out) throw io_error("cannot write verify report: " + o.out_path);
        out << report << "\n";
        std::cout << (summary.all_pass ? "all checks passed\n" : "CHECK FAILURES\n");
    }
    return summary.all_pass ? 0 : 1;
}

// JSON config file mirrors the long option names with '-' replaced by '_'.
// Values from the file become defaults; explicit flags override them.
void apply_config(Options& o, const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open config file: " + path);
    json cfg;
    try {
        cfg = json::parse(in, nullptr, true, true);
    } catch (const json::exception& e) {
        throw io_error("bad config json: " + std::string(e.what()));
    }
    auto get = [&](const char* key, auto& field) {
        if (cfg.contains(key)) cfg.at(key).get_to(field);
    };
    get("phi", o.phi);
    get("b", o.b);
    get("lambda", o.lambda);
    get("alpha", o.alpha);
    get("w1", o.w1);
    get("w2", o.w2);
    get("graph", o.graph_path);
    get("gen_nodes", o.gen_nodes);
    get("gen_flavor", o.gen_flavor);
    get("gen_seed", o.gen_seed);
    get("mu", o.mu_path);
    get("nu", o.nu_path);
    get("measures", o.measures_dir);
    get("out", o.out_path);
    get("format", o.format);
    get("eps", o.eps);
    get("tol_t", o.tol_t);
    get("bracket", o.bracket);
    get("inner", o.inner);
    get("sinkhorn_tol", o.sinkhorn_tol);
    get("sinkhorn_max_iter", o.sinkhorn_max_iter);
    get("method", o.method);
    get("threads", o.threads);
    get("random_pairs", o.random_pairs);
    get("max_supports", o.max_supports);
    get("seed", o.seed);
    get("dist", o.dist_path);
    get("t_bar", o.t_bar);
    get("diag_add", o.diag_add);
    get("instances", o.instances);
}

void add_transport_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--phi", o.phi, "N-function: linear, exp1, exp2, power:<p>, rawpower:<p>");
    cmd->add_option("--b", o.b, "Lipschitz scale b > 0");
    cmd->add_option("--lambda", o.lambda, "mass penalty weight, >= 0");
    cmd->add_option("--alpha", o.alpha, "root-interval offset");
    cmd->add_option("--w1", o.w1, "first weight function 'a1,a0'");
    cmd->add_option("--w2", o.w2, "second weight function 'a1,a0'");
    cmd->add_option("--graph", o.graph_path, "graph file");
    cmd->add_option("--gen-nodes", o.gen_nodes, "generate a graph with this many nodes");
    cmd->add_option("--gen-flavor", o.gen_flavor, "generator flavor: log or sqrt");
    cmd->add_option("--gen-seed", o.gen_seed, "generator seed");
}

void add_ept_options(CLI::App* cmd, Options& o) {
    cmd->add_option("--eps", o.eps, "entropic regularization");
    cmd->add_option("--tol-t", o.tol_t, "bisection width relative to the upper bracket");
    cmd->add_option("--bracket", o.bracket, "lower bracket: exact or entropic");
    cmd->add_option("--inner", o.inner, "inner solver: sinkhorn or exact");
    cmd->add_option("--sinkhorn-tol", o.sinkhorn_tol, "marginal violation tolerance");
    cmd->add_option("--sinkhorn-max-iter", o.sinkhorn_max_iter, "iteration cap");
}

}  // namespace

int main(int argc, char** argv) {
    Options o;

    // Load config defaults before the real parse so flags can override them.
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        try {
            if (arg == "--config" && i + 1 < argc) {
                apply_config(o, argv[i + 1]);
                break;
            }
            if (arg.rfind("--config=", 0) == 0) {
                apply_config(o, arg.substr(9));
                break;
            }
        } catch (const io_error& e) {
            std::cerr << "error: " << e.what() << "\n";
            return 4;
        }
    }

    CLI::App app{"transport distances for unbalanced measures on a graph"};
    app.require_subcommand(1);
    std::string config_dummy;
    app.add_option("--config", config_dummy, "JSON config file with option defaults");

    auto* gen = app.add_subcommand("gen-graph", "generate a random connected graph");
    gen->add_option("--nodes", o.gen_nodes, "node count")->required();
    gen->add_option("--flavor", o.gen_flavor, "log or sqrt");
    gen->add_option("--seed", o.gen_seed, "rng seed");
    gen->add_option("--out", o.out_path, "output file (stdout when omitted)");

    auto* ost_cmd = app.add_subcommand("ost", "dual-regularized transport distance");
    add_transport_options(ost_cmd, o);
    ost_cmd->add_option("--mu", o.mu_path, "first measure file")->required();
    ost_cmd->add_option("--nu", o.nu_path, "second measure file")->required();
    ost_cmd->add_option("--format", o.format, "record format: json or csv");

    auto* ept_cmd = app.add_subcommand("ept", "transport distance via bisection");
    add_transport_options(ept_cmd, o);
    add_ept_options(ept_cmd, o);
    ept_cmd->add_option("--mu", o.mu_path, "first measure file")->required();
    ept_cmd->add_option("--nu", o.nu_path, "second measure file")->required();
    ept_cmd->add_option("--format", o.format, "record format: json or csv");

    auto* pw = app.add_subcommand("pairwise", "distance matrix over a measure directory");
    add_transport_options(pw, o);
    add_ept_options(pw, o);
    pw->add_option("--method", o.method, "ost or ept");
    pw->add_option("--measures", o.measures_dir, "directory of measure files")->required();
    pw->add_option("--out", o.out_path, "output matrix path")->required();
    pw->add_option("--threads", o.threads, "worker threads");
    pw->add_option("--format", o.format, "matrix format: csv or bin");

    auto* kern = app.add_subcommand("kernel", "Gram matrix exp(-t_bar * D)");
    kern->add_option("--dist", o.dist_path, "distance matrix (csv or bin)")->required();
    kern->add_option("--t-bar", o.t_bar, "kernel scale, > 0");
    kern->add_option("--diag-add", o.diag_add, "added diagonal regularization");
    kern->add_option("--out", o.out_path, "output matrix path")->required();
    kern->add_option("--format", o.format, "matrix format: csv or bin");

    auto* bench = app.add_subcommand("bench", "time both methods on the same pairs");
    add_transport_options(bench, o);
    add_ept_options(bench, o);
    bench->add_option("--measures", o.measures_dir, "directory of measure files");
    bench->add_option("--random-pairs", o.random_pairs, "sample this many random pairs");
    bench->add_option("--max-supports", o.max_supports, "supports per random measure");
    bench->add_option("--seed", o.seed, "rng seed for random pairs");
    bench->add_option("--out", o.out_path, "per-pair timing csv");

    auto* verify = app.add_subcommand("verify", "run the oracle suite on random instances");
    verify->add_option("--seed", o.seed, "rng seed");
    verify->add_option("--instances", o.instances, "instances per check");
    verify->add_option("--out", o.out_path, "json report path (stdout when omitted)");

    // Let --config appear after the subcommand name as well.
    for (auto* sub : app.get_subcommands(nullptr)) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (gen->parsed()) return cmd_gen_graph(o);
        if (ost_cmd->parsed()) return cmd_ost(o);
        if (ept_cmd->parsed()) return cmd_ept(o);
        if (pw->parsed()) return cmd_pairwise(o);
        if (kern->parsed()) return cmd_kernel(o);
        if (bench->parsed()) return cmd_bench(o);
        if (verify->parsed()) return cmd_verify(o);
    } catch (const param_error& e) {
        std::cerr << "parameter error: " << e.what() << "\n";
        return 2;
    } catch (const numeric_error& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const io_error& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    }
    return 0;
}
