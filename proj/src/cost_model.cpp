#include "bcd/cost_model.hpp"

#include <cstdio>
#include <stdexcept>

namespace bcd {

std::string to_string(CostMethod m) {
    switch (m) {
        case CostMethod::adam: return "adam";
        case CostMethod::lomo: return "lomo";
        case CostMethod::lora: return "lora";
        case CostMethod::badam: return "badam";
    }
    return "adam";
}

CostMethod cost_method_from_string(const std::string& s) {
    if (s == "adam") return CostMethod::adam;
    if (s == "lomo") return CostMethod::lomo;
    if (s == "lora") return CostMethod::lora;
    if (s == "badam") return CostMethod::badam;
    throw std::invalid_argument("unknown cost method '" + s + "'");
}

void CostSpec::validate() const {
    if (!(M > 0.0)) throw std::invalid_argument("M must be positive");
    if (D < 1) throw std::invalid_argument("D must be at least 1");
    if (r < 1) throw std::invalid_argument("r must be at least 1");
    if (mdim < 1) throw std::invalid_argument("mdim must be at least 1");
    if (K < 1) throw std::invalid_argument("K must be at least 1");
}

double memory_gb(CostMethod method, const CostSpec& spec) {
    spec.validate();
    const double m = spec.M;
    const double d = static_cast<double>(spec.D);
    switch (method) {
        case CostMethod::adam: return 18.0 * m;
        case CostMethod::lomo: return 2.0 * m + 2.0 * m / d;
        case CostMethod::lora:
            return 2.0 * m + 36.0 * static_cast<double>(spec.r) * m / static_cast<double>(spec.mdim);
        case CostMethod::badam: return 2.0 * m + 16.0 * m / d;
    }
    throw std::invalid_argument("unknown cost method");
}

long long unit_backward_passes(BackwardScheme scheme, long long K, long long D) {
    if (K < 1 || D < 1) throw std::invalid_argument("K and D must be at least 1");
    if (scheme == BackwardScheme::badam) return K * D * (D + 1) / 2;
    return K * D * D;
}

std::string compare_table(const CostSpec& spec, bool csv) {
    spec.validate();
    const CostMethod methods[] = {CostMethod::adam, CostMethod::lomo, CostMethod::lora,
                                  CostMethod::badam};
    const long long full_bp = unit_backward_passes(BackwardScheme::full, spec.K, spec.D);
    const long long badam_bp = unit_backward_passes(BackwardScheme::badam, spec.K, spec.D);
    std::string out;
    char line[160];
    if (csv) {
        out += "method,memory_gb,unit_backward_passes\n";
        for (CostMethod m : methods) {
            const long long bp = m == CostMethod::badam ? badam_bp : full_bp;
            std::snprintf(line, sizeof(line), "%s,%.10g,%lld\n", to_string(m).c_str(),
                          memory_gb(m, spec), bp);
            out += line;
        }
        return out;
    }
    std::snprintf(line, sizeof(line), "%-8s %14s %22s\n", "method", "memory (GB)",
                  "unit backward passes");
    out += line;
    for (CostMethod m : methods) {
        const long long bp = m == CostMethod::badam ? badam_bp : full_bp;
        std::snprintf(line, sizeof(line), "%-8s %14.6g %22lld\n", to_string(m).c_str(),
                      memory_gb(m, spec), bp);
        out += line;
    }
    return out;
}

}  // namespace bcd
