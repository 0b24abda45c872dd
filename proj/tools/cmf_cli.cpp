// cmf: command-line driver for complex matrix factorization experiments.
//
//   cmf bench       run the repeated-split recognition benchmark, write CSV
//   cmf factorize   factorize one data matrix and persist the model
//   cmf occlude     apply a random occlusion patch to a PGM image
//   cmf grad-check  finite-difference check of the V gradients
//   cmf summarize   mean/std table from a results CSV

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "cmf/cmf.hpp"

namespace {

constexpr int kUsageError = 2;

struct SolverFlags {
    std::optional<double> alpha_sparse, lambda_graph, tol_rel, eps_sign;
    std::optional<int> max_outer, inner_v_steps;

    void add(CLI::App &app) {
        app.add_option("--alpha-sparse", alpha_sparse, "SpaCMF sparsity weight");
        app.add_option("--lambda", lambda_graph, "GraCMF graph weight");
        app.add_option("--max-outer", max_outer, "maximum outer BCD iterations");
        app.add_option("--inner-steps", inner_v_steps, "V gradient steps per outer iteration");
        app.add_option("--tol", tol_rel, "relative objective-change stopping tolerance");
        app.add_option("--eps-sign", eps_sign, "smoothing for the complex sign");
    }

    void apply(cmf::SolverParams &p) const {
        if (alpha_sparse) p.alpha_sparse = *alpha_sparse;
        if (lambda_graph) p.lambda_graph = *lambda_graph;
        if (max_outer) p.max_outer = *max_outer;
        if (inner_v_steps) p.inner_v_steps = *inner_v_steps;
        if (tol_rel) p.tol_rel = *tol_rel;
        if (eps_sign) p.eps_sign = *eps_sign;
    }
};

std::vector<cmf::Method> parse_methods(const std::vector<std::string> &names) {
    std::vector<cmf::Method> out;
    for (const auto &n : names) out.push_back(cmf::parse_method(n));
    return out;
}

// "28x21" -> {28, 21}; "none" or "0" -> {0, 0}.
std::pair<int, int> parse_size(const std::string &s) {
    if (s == "none" || s == "0") return {0, 0};
    auto x = s.find('x');
    if (x == std::string::npos) throw std::invalid_argument("size must look like HxW: " + s);
    return {std::stoi(s.substr(0, x)), std::stoi(s.substr(x + 1))};
}

template <typename Fn> void with_output(const std::string &path, Fn &&fn) {
    if (path.empty() || path == "-") {
        fn(std::cout);
        return;
    }
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open " + path + " for writing");
    fn(os);
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"Complex matrix factorization toolkit"};
    app.require_subcommand(1);

    // bench ---------------------------------------------------------------
    auto *bench = app.add_subcommand("bench", "run the recognition benchmark");
    std::string config_path, dataset, layout, out_csv, summary_csv, resize;
    std::vector<std::string> methods;
    std::optional<int> bench_k, repeats, graph_k, fill;
    std::optional<std::uint64_t> seed;
    std::optional<double> alpha;
    std::vector<int> n_train, occlusion;
    bool no_timing = false, quiet = false;
    SolverFlags bench_solver;
    bench->add_option("--config", config_path, "JSON experiment config");
    bench->add_option("--dataset", dataset, "dataset root directory or manifest");
    bench->add_option("--layout", layout, "subdirectory | prefix | manifest");
    bench->add_option("--methods", methods, "methods to run (CMF SpaCMF GraCMF NMF)")->delimiter(',');
    bench->add_option("-K,--k", bench_k, "subspace dimension");
    bench->add_option("--n-train", n_train, "training images per subject")->delimiter(',');
    bench->add_option("--occlusion", occlusion, "occlusion patch sizes (0 = none)")->delimiter(',');
    bench->add_option("--repeats", repeats, "random splits per cell");
    bench->add_option("--seed", seed, "base seed");
    bench->add_option("--alpha", alpha, "Euler transform phase gain in (0, 2)");
    bench->add_option("--graph-k", graph_k, "neighbours per vertex for GraCMF");
    bench->add_option("--resize", resize, "resize to HxW before vectorizing, or 'none'");
    bench->add_option("--fill", fill, "occlusion fill intensity");
    bench->add_flag("--no-timing", no_timing, "write wall_time_s as 0 for reproducible CSVs");
    bench->add_option("-o,--out", out_csv, "results CSV (default stdout)");
    bench->add_option("--summary", summary_csv, "also write a summary CSV here");
    bench->add_flag("-q,--quiet", quiet, "no progress on stderr");
    bench_solver.add(*bench);

    // factorize -------------------------------------------------------------
    auto *fact = app.add_subcommand("factorize", "factorize a data matrix and save the model");
    std::string f_input, f_dataset, f_layout = "subdirectory", f_features, f_out, f_method = "CMF",
                                    f_resize = "28x21";
    int f_k = 20, f_graph_k = 5;
    std::uint64_t f_seed = 0;
    double f_alpha = 1.9;
    bool f_export_graph = false;
    SolverFlags fact_solver;
    auto *in_opt = fact->add_option("--input", f_input, "Z as a cmfmat file");
    auto *ds_opt = fact->add_option("--dataset", f_dataset, "PGM dataset (vectorized + Euler mapped)");
    in_opt->excludes(ds_opt);
    fact->add_option("--layout", f_layout, "subdirectory | prefix | manifest");
    fact->add_option("--resize", f_resize, "resize dataset images to HxW, or 'none'");
    fact->add_option("--features", f_features, "real graph features (cmfmat) for GraCMF");
    fact->add_option("--method", f_method, "CMF | SpaCMF | GraCMF | NMF");
    fact->add_option("-K,--k", f_k, "subspace dimension");
    fact->add_option("--seed", f_seed, "initialization seed");
    fact->add_option("--alpha", f_alpha, "Euler transform phase gain");
    fact->add_option("--graph-k", f_graph_k, "neighbours per vertex for GraCMF");
    fact->add_flag("--export-graph", f_export_graph, "also write T.cmfmat and L.cmfmat");
    fact->add_option("-o,--out", f_out, "model output directory")->required();
    fact_solver.add(*fact);

    // occlude ---------------------------------------------------------------
    auto *occ = app.add_subcommand("occlude", "apply a random square occlusion to a PGM");
    std::string o_in, o_out;
    int o_patch = 15, o_fill = 0;
    std::uint64_t o_seed = 0;
    occ->add_option("--input", o_in, "input PGM")->required();
    occ->add_option("--output", o_out, "output PGM")->required();
    occ->add_option("--patch", o_patch, "patch side length");
    occ->add_option("--fill", o_fill, "fill intensity");
    occ->add_option("--seed", o_seed, "placement seed");

    // grad-check ------------------------------------------------------------
    auto *gc = app.add_subcommand("grad-check", "finite-difference check of the V gradients");
    std::uint64_t g_seed = 0;
    int g_trials = 20;
    gc->add_option("--seed", g_seed, "instance seed");
    gc->add_option("--trials", g_trials, "random instances per method");

    // summarize -------------------------------------------------------------
    auto *sum = app.add_subcommand("summarize", "mean/std table from a results CSV");
    std::string s_in, s_out;
    sum->add_option("--input", s_in, "results CSV")->required();
    sum->add_option("-o,--out", s_out, "summary CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    try {
        if (*bench) {
            cmf::ExperimentConfig cfg;
            if (!config_path.empty()) cfg = cmf::load_config(config_path);
            if (!dataset.empty()) cfg.dataset_path = dataset;
            if (!layout.empty()) cfg.dataset_layout = layout;
            if (!methods.empty()) cfg.methods = parse_methods(methods);
            if (bench_k) cfg.K = *bench_k;
            if (!n_train.empty()) cfg.n_train_list = n_train;
            if (!occlusion.empty()) cfg.occlusion_sizes = occlusion;
            if (repeats) cfg.repeats = *repeats;
            if (seed) cfg.base_seed = *seed;
            if (alpha) cfg.transform.alpha = *alpha;
            if (graph_k) cfg.graph_k = *graph_k;
            if (fill) cfg.occlusion_fill = *fill;
            if (!resize.empty())
                std::tie(cfg.resize_height, cfg.resize_width) = parse_size(resize);
            if (no_timing) cfg.record_timing = false;
            bench_solver.apply(cfg.solver);
            try {
                cfg.validate();
            } catch (const std::invalid_argument &e) {
                std::cerr << "cmf bench: " << e.what() << '\n';
                return kUsageError;
            }

            cmf::ProgressFn progress;
            if (!quiet)
                progress = [](const cmf::ResultRecord &r) {
                    std::fprintf(stderr, "%-6s n_train=%d occl=%d rep=%d acc=%.4f t=%.2fs\n",
                                 std::string(cmf::method_name(r.method)).c_str(), r.n_train,
                                 r.occlusion, r.repeat, r.accuracy, r.wall_time_s);
                };
            auto records = cmf::run_bench(cfg, progress);
            with_output(out_csv, [&](std::ostream &os) { cmf::write_results_csv(os, records); });
            if (!summary_csv.empty())
                with_output(summary_csv, [&](std::ostream &os) {
                    cmf::write_summary_csv(os, cmf::summarize(records));
                });
            return 0;
        }

        if (*fact) {
            cmf::SolverParams p;
            p.method = cmf::parse_method(f_method);
            p.K = f_k;
            p.seed = f_seed;
            fact_solver.apply(p);
            cmf::EulerParams ep{f_alpha};

            cmf::ComplexMatrix z;
            cmf::RealMatrix features;
            if (!f_dataset.empty()) {
                cmf::ExperimentConfig c;
                c.dataset_path = f_dataset;
                c.dataset_layout = f_layout;
                auto set = cmf::load_dataset(c);
                auto [h, w] = parse_size(f_resize);
                if (h > 0) set = cmf::resize_all(set, h, w);
                features = cmf::vectorize(set);
                z = cmf::is_complex_method(p.method) ? cmf::euler_map(features, ep)
                                                     : cmf::to_complex(features);
            } else if (!f_input.empty()) {
                z = cmf::load_cmfmat(f_input);
            } else {
                std::cerr << "cmf factorize: one of --input or --dataset is required\n";
                return kUsageError;
            }
            if (!f_features.empty()) features = cmf::load_cmfmat(f_features).real();

            cmf::FactorModel model;
            if (p.method == cmf::Method::GraCMF) {
                if (features.size() == 0) features = cmf::euler_invert(z, ep);
                auto g = cmf::knn_graph(features, f_graph_k);
                model = cmf::factorize(z, p, &g.L);
                if (f_export_graph) {
                    std::filesystem::create_directories(f_out);
                    cmf::save_cmfmat(std::filesystem::path(f_out) / "T.cmfmat", cmf::to_complex(g.T));
                    cmf::save_cmfmat(std::filesystem::path(f_out) / "L.cmfmat", cmf::to_complex(g.L));
                }
            } else {
                model = cmf::factorize(z, p);
            }
            cmf::save_model(f_out, model);
            const double rel = std::sqrt(cmf::frob_norm_sq(z - model.W * model.V) /
                                         std::max(cmf::frob_norm_sq(z), 1e-300));
            std::printf("%s K=%d iterations=%d converged=%s objective=%.6e rel_residual=%.6e\n",
                        f_method.c_str(), p.K, model.iterations(),
                        model.converged ? "true" : "false", model.final_objective(), rel);
            return 0;
        }

        if (*occ) {
            auto img = cmf::read_pgm(o_in);
            cmf::Rng rng(o_seed);
            auto out = cmf::occlude(img.pixels, o_patch, o_fill, rng);
            cmf::write_pgm(o_out, out, img.maxval);
            return 0;
        }

        if (*gc) {
            if (g_trials < 1) {
                std::cerr << "cmf grad-check: --trials must be >= 1\n";
                return kUsageError;
            }
            auto rep = cmf::grad_check(g_seed, g_trials);
            std::cout << rep.text;
            return rep.passed ? 0 : 1;
        }

        if (*sum) {
            std::ifstream is(s_in);
            if (!is) throw std::runtime_error("cannot open " + s_in);
            auto rows = cmf::summarize(cmf::read_results_csv(is));
            with_output(s_out, [&](std::ostream &os) { cmf::write_summary_csv(os, rows); });
            return 0;
        }
    } catch (const std::invalid_argument &e) {
        std::cerr << "cmf: " << e.what() << '\n';
        return kUsageError;
    } catch (const std::exception &e) {
        std::cerr << "cmf: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
