#include "bcd/param_store.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bcd {

namespace {

void validate_layout(const std::vector<MatrixSpec>& layout) {
    if (layout.empty()) throw std::invalid_argument("layout must not be empty");
    std::vector<const MatrixSpec*> by_offset;
    by_offset.reserve(layout.size());
    for (const auto& spec : layout) {
        if (spec.size() == 0) throw std::invalid_argument("layout entry '" + spec.name + "' is empty");
        if (spec.name.empty() || spec.name.find_first_of(" \t\r\n,") != std::string::npos)
            throw std::invalid_argument("layout name '" + spec.name + "' must be non-empty without whitespace or commas");
        for (const MatrixSpec* prev : by_offset)
            if (prev->name == spec.name)
                throw std::invalid_argument("duplicate layout name '" + spec.name + "'");
        by_offset.push_back(&spec);
    }
    std::sort(by_offset.begin(), by_offset.end(),
              [](const MatrixSpec* a, const MatrixSpec* b) { return a->offset < b->offset; });
    std::size_t expected = 0;
    for (const MatrixSpec* spec : by_offset) {
        if (spec->offset != expected)
            throw std::invalid_argument("layout offsets overlap or leave a gap at '" + spec->name + "'");
        expected += spec->size();
    }
}

}  // namespace

ParamStore::ParamStore(std::vector<MatrixSpec> layout) : layout_(std::move(layout)) {
    validate_layout(layout_);
    std::size_t d = 0;
    for (const auto& spec : layout_) d += spec.size();
    values_.assign(d, 0.0);
}

ParamStore ParamStore::flat(std::string name, std::size_t d) {
    return ParamStore({MatrixSpec{std::move(name), d, 1, 0}});
}

const MatrixSpec* ParamStore::find(std::string_view name) const {
    for (const auto& spec : layout_)
        if (spec.name == name) return &spec;
    return nullptr;
}

bool ParamStore::same_layout(const ParamStore& other) const {
    if (layout_.size() != other.layout_.size()) return false;
    for (std::size_t i = 0; i < layout_.size(); ++i) {
        const auto& a = layout_[i];
        const auto& b = other.layout_[i];
        if (a.name != b.name || a.rows != b.rows || a.cols != b.cols || a.offset != b.offset)
            return false;
    }
    return true;
}

void ParamStore::check_finite() const {
    for (double v : values_)
        if (!std::isfinite(v)) throw std::runtime_error("parameter vector contains a non-finite value");
}

}  // namespace bcd
