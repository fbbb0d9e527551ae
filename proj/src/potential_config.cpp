#include "weylspec/potential_config.hpp"

#include <fstream>

namespace weylspec {

using nlohmann::json;

namespace {

cplx parse_complex(const json& v, const std::string& key) {
    if (v.is_number()) return {v.get<double>(), 0.0};
    if (v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number())
        return {v[0].get<double>(), v[1].get<double>()};
    throw ConfigError(key, "expected a number or a [re, im] pair");
}

const json& require(const json& obj, const char* key) {
    auto it = obj.find(key);
    if (it == obj.end()) throw ConfigError(key, "missing");
    return *it;
}

}  // namespace

double parse_real(const json& value, const std::string& key) {
    if (value.is_number()) return value.get<double>();
    if (value.is_string()) {
        try {
            return parse_number_expr(value.get<std::string>());
        } catch (const PreconditionError& e) {
            throw ConfigError(key, e.what());
        }
    }
    throw ConfigError(key, "expected a number or numeric expression");
}

CMatrix parse_complex_matrix(const json& value, const std::string& key) {
    if (!value.is_array() || value.empty() || !value[0].is_array())
        throw ConfigError(key, "expected a nonempty array of rows");
    const auto rows = static_cast<Eigen::Index>(value.size());
    const auto cols = static_cast<Eigen::Index>(value[0].size());
    CMatrix M(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = value[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw ConfigError(key, "row " + std::to_string(r) + " has the wrong length");
        for (Eigen::Index c = 0; c < cols; ++c)
            M(r, c) = parse_complex(row[static_cast<std::size_t>(c)],
                                    key + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
    }
    return M;
}

PotentialSpec build_potential(const json& config) {
    if (!config.is_object()) throw ConfigError("potential", "expected an object");
    const json& mj = require(config, "m");
    if (!mj.is_number_integer() || mj.get<int>() <= 0) throw ConfigError("m", "must be a positive integer");
    const int m = mj.get<int>();

    const json& kj = require(config, "kind");
    if (!kj.is_string()) throw ConfigError("kind", "must be a string");
    const std::string kind = kj.get<std::string>();

    std::optional<double> period;
    if (auto it = config.find("period"); it != config.end() && !it->is_null()) {
        period = parse_real(*it, "period");
        if (!(*period > 0)) throw ConfigError("period", "must be positive");
    }

    auto check_dim = [m](const CMatrix& M, const std::string& key) {
        if (M.rows() != m || M.cols() != m)
            throw ConfigError(key, "expected a " + std::to_string(m) + "x" + std::to_string(m) + " matrix");
    };

    try {
        if (kind == "constant") {
            const json& cj = require(config, "C");
            if (cj.is_number()) return PotentialSpec::constant(m, cj.get<double>(), period);
            CMatrix C = parse_complex_matrix(cj, "C");
            check_dim(C, "C");
            if (hermitian_defect(C) > 1e-12 * std::max(1.0, C.norm()))
                throw ConfigError("C", "matrix is not Hermitian");
            return PotentialSpec::constant(C, period);
        }
        if (kind == "diagonal") {
            const json& ej = require(config, "entries");
            if (!ej.is_array() || static_cast<int>(ej.size()) != m)
                throw ConfigError("entries", "expected " + std::to_string(m) + " scalar expressions");
            std::vector<ScalarExpr> entries;
            for (std::size_t i = 0; i < ej.size(); ++i) {
                const std::string key = "entries[" + std::to_string(i) + "]";
                if (ej[i].is_number()) {
                    entries.emplace_back(ej[i].get<double>());
                } else if (ej[i].is_string()) {
                    try {
                        entries.push_back(ScalarExpr::parse(ej[i].get<std::string>()));
                    } catch (const PreconditionError& e) {
                        throw ConfigError(key, e.what());
                    }
                } else {
                    throw ConfigError(key, "expected a number or expression string");
                }
            }
            try {
                return PotentialSpec::diagonal(std::move(entries), period);
            } catch (const PreconditionError& e) {
                throw ConfigError("period", e.what());
            }
        }
        if (kind == "fourier-hermitian") {
            std::optional<double> kappa;
            if (auto it = config.find("kappa"); it != config.end()) {
                kappa = parse_real(*it, "kappa");
                if (!(*kappa > 0)) throw ConfigError("kappa", "must be positive");
            }
            const json& cj = require(config, "coefficients");
            if (!cj.is_array() || cj.empty()) throw ConfigError("coefficients", "expected a nonempty array");
            std::map<int, CMatrix> coeffs;
            for (std::size_t i = 0; i < cj.size(); ++i) {
                const std::string key = "coefficients[" + std::to_string(i) + "]";
                if (!cj[i].is_object()) throw ConfigError(key, "expected {k, matrix}");
                auto kit = cj[i].find("k");
                if (kit == cj[i].end() || !kit->is_number_integer()) throw ConfigError(key + ".k", "expected an integer");
                auto mit = cj[i].find("matrix");
                if (mit == cj[i].end()) throw ConfigError(key + ".matrix", "missing");
                CMatrix M = parse_complex_matrix(*mit, key + ".matrix");
                check_dim(M, key + ".matrix");
                if (!coeffs.emplace(kit->get<int>(), M).second) throw ConfigError(key + ".k", "duplicate index");
            }
            try {
                return PotentialSpec::fourier_hermitian(coeffs, period, kappa);
            } catch (const PreconditionError& e) {
                throw ConfigError("coefficients", e.what());
            }
        }
        if (kind == "sampled") {
            const double x0 = parse_real(require(config, "x0"), "x0");
            const double dx = parse_real(require(config, "dx"), "dx");
            if (!(dx > 0)) throw ConfigError("dx", "must be positive");
            const json& vj = require(config, "values");
            if (!vj.is_array()) throw ConfigError("values", "expected an array of matrices");
            std::vector<CMatrix> values;
            for (std::size_t i = 0; i < vj.size(); ++i) {
                const std::string key = "values[" + std::to_string(i) + "]";
                CMatrix M = vj[i].is_number() ? CMatrix(CMatrix::Identity(m, m) * vj[i].get<double>())
                                              : parse_complex_matrix(vj[i], key);
                check_dim(M, key);
                values.push_back(std::move(M));
            }
            try {
                return PotentialSpec::sampled(x0, dx, std::move(values), period);
            } catch (const PreconditionError& e) {
                throw ConfigError("values", e.what());
            }
        }
    } catch (const PreconditionError& e) {
        throw ConfigError("potential", e.what());
    }
    throw ConfigError("kind", "unknown kind '" + kind + "'");
}

PotentialSpec load_potential(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("potential", "cannot open '" + path + "'");
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("potential", std::string("invalid JSON: ") + e.what());
    }
    if (j.is_object() && j.contains("potential")) return build_potential(j["potential"]);
    return build_potential(j);
}

}  // namespace weylspec
