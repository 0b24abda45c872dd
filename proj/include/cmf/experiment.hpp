#pragma once

// Benchmark harness: repeated seeded splits of a labelled image set, one
// factorization + 1-NN evaluation per (method, n_train, occlusion, repeat),
// CSV output and mean/std summaries. Also the finite-difference gradient
// check exposed on the command line.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "cmf/dataset.hpp"
#include "cmf/factor.hpp"
#include "cmf/graph.hpp"
#include "cmf/recognition.hpp"
#include "cmf/transform.hpp"

namespace cmf {

inline constexpr std::uint64_t kRepeatSeedStride = 10007;

struct ExperimentConfig {
    std::string dataset_path;
    std::string dataset_layout = "subdirectory"; // subdirectory | prefix | manifest
    std::vector<Method> methods{Method::CMF};
    int K = 20;
    std::vector<int> n_train_list{5};
    std::vector<int> occlusion_sizes{0};
    int repeats = 10;
    std::uint64_t base_seed = 0;
    EulerParams transform;
    int graph_k = 5;
    SolverParams solver;
    int resize_height = 28; // 0 keeps the native size
    int resize_width = 21;
    int occlusion_fill = 0;
    bool record_timing = true;

    std::uint64_t repeat_seed(int r) const {
        return base_seed + static_cast<std::uint64_t>(r) * kRepeatSeedStride;
    }

    void validate() const {
        if (methods.empty()) throw std::invalid_argument("config: methods must be non-empty");
        if (repeats < 1) throw std::invalid_argument("config: repeats must be >= 1");
        if (K < 1) throw std::invalid_argument("config: K must be positive");
        if (n_train_list.empty()) throw std::invalid_argument("config: n_train_list is empty");
        for (int n : n_train_list)
            if (n < 1) throw std::invalid_argument("config: n_train values must be positive");
        if (occlusion_sizes.empty())
            throw std::invalid_argument("config: occlusion_sizes is empty (use [0])");
        for (int o : occlusion_sizes)
            if (o < 0) throw std::invalid_argument("config: occlusion sizes must be >= 0");
        if (graph_k < 1) throw std::invalid_argument("config: graph.k must be positive");
        if ((resize_height == 0) != (resize_width == 0) || resize_height < 0 || resize_width < 0)
            throw std::invalid_argument("config: resize needs both dimensions or neither");
        transform.validate();
        SolverParams p = solver;
        p.K = K;
        p.validate();
    }

    void validate_against(const ImageSet &set) const {
        validate();
        auto groups = set.by_subject();
        for (int n : n_train_list)
            for (const auto &[label, idx] : groups)
                if (idx.size() <= static_cast<std::size_t>(n))
                    throw std::invalid_argument(
                        "config: n_train = " + std::to_string(n) + " infeasible, subject '" +
                        label + "' has only " + std::to_string(idx.size()) + " images");
        for (int o : occlusion_sizes)
            if (o > std::min(set.height, set.width))
                throw std::invalid_argument("config: occlusion size " + std::to_string(o) +
                                            " exceeds image size");
    }
};

namespace detail {

// Looks up "a.b" as nested {"a": {"b": ...}} first, then as a literal key.
inline const nlohmann::json *find_key(const nlohmann::json &j, const std::string &dotted) {
    const nlohmann::json *cur = &j;
    std::size_t start = 0;
    bool nested = true;
    while (true) {
        std::size_t dot = dotted.find('.', start);
        std::string part = dotted.substr(start, dot - start);
        if (!cur->is_object() || !cur->contains(part)) {
            nested = false;
            break;
        }
        cur = &(*cur)[part];
        if (dot == std::string::npos) break;
        start = dot + 1;
    }
    if (nested) return cur;
    if (j.is_object() && j.contains(dotted)) return &j[dotted];
    return nullptr;
}

template <typename T> void read_key(const nlohmann::json &j, const std::string &key, T &out) {
    if (const auto *v = find_key(j, key)) {
        try {
            out = v->get<T>();
        } catch (const nlohmann::json::exception &e) {
            throw std::invalid_argument("config key '" + key + "': " + e.what());
        }
    }
}

} // namespace detail

inline ExperimentConfig config_from_json(const nlohmann::json &j) {
    ExperimentConfig c;
    using detail::read_key;
    read_key(j, "dataset_path", c.dataset_path);
    read_key(j, "dataset_layout", c.dataset_layout);
    if (const auto *m = detail::find_key(j, "methods")) {
        c.methods.clear();
        for (const auto &s : *m) c.methods.push_back(parse_method(s.get<std::string>()));
    }
    read_key(j, "K", c.K);
    read_key(j, "n_train_list", c.n_train_list);
    read_key(j, "occlusion_sizes", c.occlusion_sizes);
    read_key(j, "repeats", c.repeats);
    read_key(j, "base_seed", c.base_seed);
    read_key(j, "transform.alpha", c.transform.alpha);
    read_key(j, "graph.k", c.graph_k);
    read_key(j, "solver.alpha_sparse", c.solver.alpha_sparse);
    read_key(j, "solver.lambda_graph", c.solver.lambda_graph);
    read_key(j, "solver.max_outer", c.solver.max_outer);
    read_key(j, "solver.inner_v_steps", c.solver.inner_v_steps);
    read_key(j, "solver.tol_rel", c.solver.tol_rel);
    read_key(j, "solver.eps_sign", c.solver.eps_sign);
    read_key(j, "resize.height", c.resize_height);
    read_key(j, "resize.width", c.resize_width);
    read_key(j, "occlusion_fill", c.occlusion_fill);
    read_key(j, "record_timing", c.record_timing);
    return c;
}

inline ExperimentConfig load_config(const std::filesystem::path &path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config " + path.string());
    nlohmann::json j;
    try {
        is >> j;
    } catch (const nlohmann::json::exception &e) {
        throw std::invalid_argument(path.string() + ": " + e.what());
    }
    return config_from_json(j);
}

inline ImageSet load_dataset(const ExperimentConfig &c) {
    if (c.dataset_path.empty()) throw std::invalid_argument("config: dataset_path is empty");
    if (c.dataset_layout == "subdirectory") return load_pgm_dir(c.dataset_path, LabelRule::Subdirectory);
    if (c.dataset_layout == "prefix") return load_pgm_dir(c.dataset_path, LabelRule::FilenamePrefix);
    if (c.dataset_layout == "manifest") return load_manifest(c.dataset_path);
    throw std::invalid_argument("config: unknown dataset_layout '" + c.dataset_layout + "'");
}

struct ResultRecord {
    Method method = Method::CMF;
    int n_train = 0;
    int occlusion = 0;
    int repeat = 0;
    std::uint64_t seed = 0;
    double accuracy = 0.0;
    double wall_time_s = 0.0;
    double final_objective = 0.0;

    auto key() const { return std::make_tuple(method_name(method), n_train, occlusion, repeat); }
};

inline void sort_records(std::vector<ResultRecord> &records) {
    std::sort(records.begin(), records.end(),
              [](const ResultRecord &a, const ResultRecord &b) { return a.key() < b.key(); });
}

// Train/test data for one (n_train, occlusion, repeat) cell.
struct Cell {
    RealMatrix train_x;
    RealMatrix test_x;
    std::vector<Label> train_labels;
    std::vector<Label> test_labels;
};

inline Cell prepare_cell(const ExperimentConfig &c, const ImageSet &set, int n_train,
                         int occlusion, std::uint64_t seed) {
    ImageSet work = set;
    if (occlusion > 0) {
        Rng occ_rng(derive_seed(seed, 1));
        work = occlude_all(work, occlusion, c.occlusion_fill, occ_rng);
    }
    if (c.resize_height > 0) work = resize_all(work, c.resize_height, c.resize_width);
    Split s = split(work, n_train, seed);
    return {vectorize(s.train), vectorize(s.test), s.train.labels, s.test.labels};
}

inline ResultRecord run_method(const ExperimentConfig &c, const Cell &cell, Method method,
                               int n_train, int occlusion, int repeat, std::uint64_t seed) {
    SolverParams p = c.solver;
    p.method = method;
    p.K = c.K;
    p.seed = seed;

    const auto t0 = std::chrono::steady_clock::now();
    ComplexMatrix ztr, zte;
    if (is_complex_method(method)) {
        ztr = euler_map(cell.train_x, c.transform);
        zte = euler_map(cell.test_x, c.transform);
    } else {
        ztr = to_complex(cell.train_x);
        zte = to_complex(cell.test_x);
    }
    FactorModel model;
    if (method == Method::GraCMF) {
        GraphWeights g = knn_graph(cell.train_x, c.graph_k);
        model = factorize(ztr, p, &g.L);
    } else {
        model = factorize(ztr, p);
    }
    ResultRecord r;
    r.method = method;
    r.n_train = n_train;
    r.occlusion = occlusion;
    r.repeat = repeat;
    r.seed = seed;
    r.accuracy = evaluate(model, ztr, cell.train_labels, zte, cell.test_labels);
    r.final_objective = model.final_objective();
    if (c.record_timing)
        r.wall_time_s =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

using ProgressFn = std::function<void(const ResultRecord &)>;

inline std::vector<ResultRecord> run_bench(const ExperimentConfig &c, const ImageSet &set,
                                           const ProgressFn &progress = {}) {
    c.validate_against(set);
    std::vector<ResultRecord> records;
    for (int n_train : c.n_train_list)
        for (int occlusion : c.occlusion_sizes)
            for (int r = 0; r < c.repeats; ++r) {
                const std::uint64_t seed = c.repeat_seed(r);
                Cell cell = prepare_cell(c, set, n_train, occlusion, seed);
                for (Method m : c.methods) {
                    records.push_back(run_method(c, cell, m, n_train, occlusion, r, seed));
                    if (progress) progress(records.back());
                }
            }
    sort_records(records);
    return records;
}

inline std::vector<ResultRecord> run_bench(const ExperimentConfig &c,
                                           const ProgressFn &progress = {}) {
    ImageSet set;
    try {
        set = load_dataset(c);
    } catch (const std::exception &e) {
        throw std::runtime_error(std::string("bench: cannot load dataset: ") + e.what());
    }
    return run_bench(c, set, progress);
}

inline constexpr const char *kResultsHeader =
    "method,n_train,occlusion,repeat,seed,accuracy,wall_time_s,final_objective";
inline constexpr const char *kSummaryHeader = "method,n_train,occlusion,mean_pct,std_pct";

namespace detail {
inline std::string fixed6(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", x);
    return buf;
}

inline std::vector<std::string> split_csv_line(const std::string &line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    std::string tok;
    while (std::getline(ss, tok, ',')) out.push_back(tok);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}
} // namespace detail

inline void write_results_csv(std::ostream &os, std::vector<ResultRecord> records) {
    sort_records(records);
    os << kResultsHeader << '\n';
    for (const auto &r : records)
        os << method_name(r.method) << ',' << r.n_train << ',' << r.occlusion << ',' << r.repeat
           << ',' << r.seed << ',' << detail::fixed6(r.accuracy) << ','
           << detail::fixed6(r.wall_time_s) << ',' << detail::fixed6(r.final_objective) << '\n';
}

inline std::vector<ResultRecord> read_results_csv(std::istream &is) {
    std::string line;
    if (!std::getline(is, line) || line != kResultsHeader)
        throw std::invalid_argument("results csv: expected header '" +
                                    std::string(kResultsHeader) + "'");
    std::vector<ResultRecord> out;
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto f = detail::split_csv_line(line);
        if (f.size() != 8)
            throw std::invalid_argument("results csv line " + std::to_string(lineno) +
                                        ": expected 8 fields");
        try {
            ResultRecord r;
            r.method = parse_method(f[0]);
            r.n_train = std::stoi(f[1]);
            r.occlusion = std::stoi(f[2]);
            r.repeat = std::stoi(f[3]);
            r.seed = std::stoull(f[4]);
            r.accuracy = std::stod(f[5]);
            r.wall_time_s = std::stod(f[6]);
            r.final_objective = std::stod(f[7]);
            out.push_back(r);
        } catch (const std::exception &e) {
            throw std::invalid_argument("results csv line " + std::to_string(lineno) + ": " +
                                        e.what());
        }
    }
    return out;
}

struct SummaryRow {
    Method method = Method::CMF;
    int n_train = 0;
    int occlusion = 0;
    double mean_pct = 0.0;
    double std_pct = 0.0; // sample standard deviation, 0 for a single record
    std::size_t count = 0;
};

inline std::vector<SummaryRow> summarize(const std::vector<ResultRecord> &records) {
    if (records.empty()) throw std::invalid_argument("summarize: no records");
    using Key = std::tuple<std::string_view, int, int>;
    std::map<Key, std::pair<Method, std::vector<double>>> cells;
    for (const auto &r : records) {
        auto &cell = cells[Key{method_name(r.method), r.n_train, r.occlusion}];
        cell.first = r.method;
        cell.second.push_back(r.accuracy * 100.0);
    }
    std::vector<SummaryRow> rows;
    for (auto &[key, cell] : cells) {
        auto &acc = cell.second;
        // sorted before summation so the result does not depend on record order
        std::sort(acc.begin(), acc.end());
        const double n = static_cast<double>(acc.size());
        double mean = 0.0;
        for (double a : acc) mean += a;
        mean /= n;
        double ss = 0.0;
        for (double a : acc) ss += (a - mean) * (a - mean);
        SummaryRow row;
        row.method = cell.first;
        row.n_train = std::get<1>(key);
        row.occlusion = std::get<2>(key);
        row.mean_pct = mean;
        row.std_pct = acc.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
        row.count = acc.size();
        rows.push_back(row);
    }
    return rows;
}

inline void write_summary_csv(std::ostream &os, const std::vector<SummaryRow> &rows) {
    os << kSummaryHeader << '\n';
    for (const auto &r : rows)
        os << method_name(r.method) << ',' << r.n_train << ',' << r.occlusion << ','
           << detail::fixed6(r.mean_pct) << ',' << detail::fixed6(r.std_pct) << '\n';
}

// ---------------------------------------------------------------------------
// Finite-difference check of grad_V.

struct GradCheckInstance {
    ComplexMatrix Z, W, V;
    SolverParams params;
    RealMatrix L; // empty unless GraCMF
};

inline constexpr double kGradCheckStep = 1e-6;
inline constexpr double kGradCheckTolerance = 1e-6;
inline constexpr int kGradCheckDirections = 10;

// Random L = D - T over a complete graph with uniform [0, 1] weights.
inline RealMatrix random_laplacian(int m, Rng &rng) {
    RealMatrix t = RealMatrix::Zero(m, m);
    for (int i = 0; i < m; ++i)
        for (int j = i + 1; j < m; ++j) t(i, j) = t(j, i) = rng.uniform();
    return laplacian(t);
}

// N, M in [2, 10] and K in [1, min(4, N, M)]; GraCMF instances use M = 5.
inline GradCheckInstance random_grad_instance(Method method, Rng &rng) {
    GradCheckInstance inst;
    const int n = 2 + static_cast<int>(rng.below(9));
    const int m = method == Method::GraCMF ? 5 : 2 + static_cast<int>(rng.below(9));
    const int k = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min({4, n, m}))));
    inst.params.method = method;
    inst.params.K = k;
    inst.params.alpha_sparse = 0.3;
    inst.params.lambda_graph = 0.5;
    inst.Z = random_complex(n, m, rng);
    inst.W = random_complex(n, k, rng);
    inst.V = random_complex(k, m, rng);
    if (method == Method::GraCMF) inst.L = random_laplacian(m, rng);
    return inst;
}

// Worst relative mismatch |fd - Re Trace(G^H P)| / max(|fd|, |Re Trace(G^H P)|)
// over random directions P, with central differences at kGradCheckStep.
inline double directional_gradient_error(const GradCheckInstance &inst, int directions,
                                         Rng &rng) {
    const RealMatrix *l = inst.params.method == Method::GraCMF ? &inst.L : nullptr;
    const ComplexMatrix g = grad_V(inst.Z, inst.W, inst.V, inst.params, l);
    double worst = 0.0;
    for (int d = 0; d < directions; ++d) {
        const ComplexMatrix p = random_complex(inst.V.rows(), inst.V.cols(), rng);
        const double fp = objective(inst.Z, inst.W, inst.V + kGradCheckStep * p, inst.params, l);
        const double fm = objective(inst.Z, inst.W, inst.V - kGradCheckStep * p, inst.params, l);
        const double fd = (fp - fm) / (2.0 * kGradCheckStep);
        const double an = (g.conjugate().array() * p.array()).sum().real();
        const double denom = std::max({std::abs(fd), std::abs(an), 1e-300});
        worst = std::max(worst, std::abs(fd - an) / denom);
    }
    return worst;
}

struct GradCheckReport {
    std::vector<std::pair<Method, double>> worst_by_method;
    double worst = 0.0;
    bool passed = false;
    std::string text;
};

inline GradCheckReport grad_check(std::uint64_t seed, int trials) {
    if (trials < 1) throw std::invalid_argument("grad-check: trials must be >= 1");
    GradCheckReport rep;
    std::ostringstream os;
    os << "grad-check seed=" << seed << " trials=" << trials
       << " directions=" << kGradCheckDirections << " h=1e-06\n";
    Rng rng(seed);
    for (Method m : {Method::CMF, Method::SpaCMF, Method::GraCMF}) {
        double worst = 0.0;
        for (int t = 0; t < trials; ++t) {
            auto inst = random_grad_instance(m, rng);
            worst = std::max(worst, directional_gradient_error(inst, kGradCheckDirections, rng));
        }
        rep.worst_by_method.emplace_back(m, worst);
        rep.worst = std::max(rep.worst, worst);
        char buf[96];
        std::snprintf(buf, sizeof buf, "%-7s worst_rel_err=%.3e\n",
                      std::string(method_name(m)).c_str(), worst);
        os << buf;
    }
    rep.passed = rep.worst <= kGradCheckTolerance;
    char buf[96];
    std::snprintf(buf, sizeof buf, "overall worst_rel_err=%.3e tolerance=%.0e: %s\n", rep.worst,
                  kGradCheckTolerance, rep.passed ? "PASS" : "FAIL");
    os << buf;
    rep.text = os.str();
    return rep;
}

} // namespace cmf
