#pragma once

// A FactorModel on disk is a directory holding W.cmfmat, V.cmfmat and
// meta.json (method, K, alpha, lambda, seed, converged, trace, solver knobs).

#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "cmf/factor.hpp"
#include "cmf/matrix_io.hpp"

namespace cmf {

inline nlohmann::json model_meta(const FactorModel &m) {
    const auto &p = m.params;
    return {
        {"method", std::string(method_name(p.method))},
        {"K", p.K},
        {"alpha", p.alpha_sparse},
        {"lambda", p.lambda_graph},
        {"seed", p.seed},
        {"converged", m.converged},
        {"trace", m.objective_trace},
        {"max_outer", p.max_outer},
        {"inner_v_steps", p.inner_v_steps},
        {"tol_rel", p.tol_rel},
        {"eps_sign", p.eps_sign},
    };
}

inline void save_model(const std::filesystem::path &dir, const FactorModel &m) {
    std::filesystem::create_directories(dir);
    save_cmfmat(dir / "W.cmfmat", m.W);
    save_cmfmat(dir / "V.cmfmat", m.V);
    std::ofstream os(dir / "meta.json");
    if (!os) throw std::runtime_error("cannot write " + (dir / "meta.json").string());
    os << model_meta(m).dump(2) << '\n';
}

inline FactorModel load_model(const std::filesystem::path &dir) {
    std::ifstream is(dir / "meta.json");
    if (!is) throw std::runtime_error("cannot open " + (dir / "meta.json").string());
    nlohmann::json meta;
    try {
        is >> meta;
    } catch (const nlohmann::json::exception &e) {
        throw FormatError((dir / "meta.json").string() + ": " + e.what());
    }
    FactorModel m;
    auto &p = m.params;
    try {
        p.method = parse_method(meta.at("method").get<std::string>());
        p.K = meta.at("K").get<int>();
        p.alpha_sparse = meta.at("alpha").get<double>();
        p.lambda_graph = meta.at("lambda").get<double>();
        p.seed = meta.at("seed").get<std::uint64_t>();
        m.converged = meta.at("converged").get<bool>();
        m.objective_trace = meta.at("trace").get<std::vector<double>>();
        p.max_outer = meta.value("max_outer", p.max_outer);
        p.inner_v_steps = meta.value("inner_v_steps", p.inner_v_steps);
        p.tol_rel = meta.value("tol_rel", p.tol_rel);
        p.eps_sign = meta.value("eps_sign", p.eps_sign);
    } catch (const nlohmann::json::exception &e) {
        throw FormatError((dir / "meta.json").string() + ": " + e.what());
    }
    m.W = load_cmfmat(dir / "W.cmfmat");
    m.V = load_cmfmat(dir / "V.cmfmat");
    if (m.W.cols() != p.K || m.V.rows() != p.K)
        throw FormatError(dir.string() + ": W/V shapes disagree with K = " + std::to_string(p.K));
    return m;
}

} // namespace cmf
