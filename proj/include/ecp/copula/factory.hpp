#pragma once

#include <fstream>
#include <map>
#include <memory>
#include <sstream>
#include <string>

#include "ecp/copula/archimedean.hpp"
#include "ecp/copula/counterexamples.hpp"
#include "ecp/copula/extreme_value.hpp"
#include "ecp/copula/gaussian.hpp"
#include "ecp/copula/independence.hpp"

namespace ecp {

// Model specification grammar: comma- or whitespace-separated key=value
// tokens, e.g. "family=gaussian,dim=2,rho=0.5". Keys: family, dim, rho,
// theta, corr=<path to whitespace-separated d x d matrix>.
inline std::map<std::string, std::string> parse_kv_spec(const std::string& spec) {
    std::map<std::string, std::string> kv;
    std::string token;
    std::istringstream in(spec);
    while (std::getline(in, token, ',')) {
        std::istringstream ws(token);
        std::string item;
        while (ws >> item) {
            const auto eq = item.find('=');
            if (eq == std::string::npos || eq == 0)
                throw std::invalid_argument("model spec: expected key=value, got '" + item + "'");
            kv[item.substr(0, eq)] = item.substr(eq + 1);
        }
    }
    return kv;
}

inline CorrelationMatrix load_correlation_matrix(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open correlation matrix file: " + path);
    std::vector<double> entries;
    double v;
    while (in >> v) entries.push_back(v);
    const auto k = entries.size();
    int d = static_cast<int>(std::round(std::sqrt(static_cast<double>(k))));
    if (static_cast<std::size_t>(d) * d != k)
        throw std::runtime_error("correlation matrix file is not square: " + path);
    return CorrelationMatrix(d, std::move(entries));
}

inline std::unique_ptr<CopulaModel> make_model(const std::string& spec) {
    auto kv = parse_kv_spec(spec);
    const auto get = [&](const std::string& key) -> std::string {
        auto it = kv.find(key);
        if (it == kv.end())
            throw std::invalid_argument("model spec: missing required key '" + key + "'");
        return it->second;
    };
    const auto get_num = [&](const std::string& key) { return std::stod(get(key)); };

    const std::string family = get("family");
    int dim = 2;
    if (kv.count("dim")) dim = std::stoi(kv.at("dim"));

    if (family == "independence") return std::make_unique<IndependenceCopula>(dim);
    if (family == "gaussian") {
        if (kv.count("corr"))
            return std::make_unique<GaussianCopula>(load_correlation_matrix(kv.at("corr")), spec);
        return std::make_unique<GaussianCopula>(
            CorrelationMatrix::exchangeable(dim, get_num("rho")));
    }
    if (family == "clayton")
        return std::make_unique<ArchimedeanCopula>(
            std::make_shared<ClaytonGenerator>(get_num("theta")), dim);
    if (family == "gumbel")
        return std::make_unique<ArchimedeanCopula>(
            std::make_shared<GumbelGenerator>(get_num("theta")), dim);
    if (family == "frank")
        return std::make_unique<ArchimedeanCopula>(
            std::make_shared<FrankGenerator>(get_num("theta")), dim);
    const auto require_d2 = [&] {
        if (dim != 2)
            throw std::invalid_argument("model spec: family '" + family + "' is bivariate only");
    };
    if (family == "logistic") {
        require_d2();
        return std::make_unique<ExtremeValueCopula>(logistic_pickands(get_num("theta")));
    }
    if (family == "frechet_upper") {
        require_d2();
        return std::make_unique<FrechetUpperCopula>();
    }
    if (family == "frechet_lower") {
        require_d2();
        return std::make_unique<FrechetLowerCopula>();
    }
    if (family == "checkerboard") {
        require_d2();
        return std::make_unique<CheckerboardCopula>();
    }
    throw std::invalid_argument("model spec: unknown family '" + family + "'");
}

}  // namespace ecp
