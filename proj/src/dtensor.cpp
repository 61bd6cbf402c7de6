#include "mth/dtensor.hpp"

#include <cassert>
#include <cmath>
#include <stdexcept>

namespace mth {

DTensor::DTensor(std::string name, Dims dims, std::vector<IndexSlot> signature)
    : name_(std::move(name)), dims_(dims), sig_(std::move(signature)) {
    std::size_t total = 1;
    for (std::size_t s = 0; s < sig_.size(); ++s) total *= static_cast<std::size_t>(extent(static_cast<int>(s)));
    comps_.assign(total, constant(0.0));
}

DTensor DTensor::scalar(std::string name, Dims dims, Expr value) {
    DTensor t(std::move(name), dims, {});
    t.comps_[0] = std::move(value);
    return t;
}

int DTensor::extent(int slot) const {
    return sig_[static_cast<std::size_t>(slot)].kind == IndexSlot::Kind::Temporal ? dims_.m : dims_.n;
}

std::size_t DTensor::offset(std::span<const int> idx) const {
    assert(idx.size() == sig_.size());
    std::size_t off = 0;
    for (std::size_t s = 0; s < sig_.size(); ++s) {
        int ext = extent(static_cast<int>(s));
        assert(idx[s] >= 0 && idx[s] < ext);
        off = off * static_cast<std::size_t>(ext) + static_cast<std::size_t>(idx[s]);
    }
    return off;
}

std::vector<int> DTensor::unflatten(std::size_t k) const {
    std::vector<int> idx(sig_.size(), 0);
    for (std::size_t s = sig_.size(); s-- > 0;) {
        int ext = extent(static_cast<int>(s));
        idx[s] = static_cast<int>(k % static_cast<std::size_t>(ext));
        k /= static_cast<std::size_t>(ext);
    }
    return idx;
}

const Expr& DTensor::at(std::span<const int> idx) const { return comps_[offset(idx)]; }
Expr& DTensor::at(std::span<const int> idx) { return comps_[offset(idx)]; }

void DTensor::bump(std::vector<int>& idx) const {
    for (std::size_t s = idx.size(); s-- > 0;) {
        if (++idx[s] < extent(static_cast<int>(s))) return;
        idx[s] = 0;
    }
}

DTensor DTensor::simplified() const {
    DTensor out(name_, dims_, sig_);
    for (std::size_t k = 0; k < comps_.size(); ++k) out.comps_[k] = simplify(comps_[k]);
    return out;
}

std::vector<double> DTensor::eval_all(const Point& pt) const {
    std::vector<double> out(comps_.size());
    for (std::size_t k = 0; k < comps_.size(); ++k) out[k] = eval(comps_[k], pt);
    return out;
}

double DTensor::max_abs(const Point& pt) const {
    double worst = 0.0;
    for (const auto& c : comps_) worst = std::max(worst, std::abs(eval(c, pt)));
    return worst;
}

std::string DTensor::print() const {
    std::string out;
    std::vector<int> idx(sig_.size(), 0);
    for (std::size_t k = 0; k < comps_.size(); ++k) {
        out += name_;
        out += '[';
        for (std::size_t s = 0; s < idx.size(); ++s) {
            if (s) out += ',';
            out += std::to_string(idx[s] + 1);
        }
        out += "] = ";
        out += to_string(comps_[k]);
        out += '\n';
        bump(idx);
    }
    return out;
}

namespace {

void check_same_shape(const DTensor& a, const DTensor& b) {
    if (a.signature().size() != b.signature().size())
        throw std::invalid_argument("tensor rank mismatch: " + a.name() + " vs " + b.name());
    for (int s = 0; s < a.rank(); ++s)
        if (a.extent(s) != b.extent(s))
            throw std::invalid_argument("tensor extent mismatch: " + a.name() + " vs " + b.name());
}

} // namespace

DTensor tensor_add(const DTensor& a, const DTensor& b, std::string name) {
    check_same_shape(a, b);
    DTensor out(name.empty() ? a.name() : std::move(name), a.dims(), a.signature());
    for (std::size_t k = 0; k < a.size(); ++k) out.flat(k) = a.flat(k) + b.flat(k);
    return out;
}

DTensor tensor_sub(const DTensor& a, const DTensor& b, std::string name) {
    check_same_shape(a, b);
    DTensor out(name.empty() ? a.name() : std::move(name), a.dims(), a.signature());
    for (std::size_t k = 0; k < a.size(); ++k) out.flat(k) = a.flat(k) - b.flat(k);
    return out;
}

DTensor tensor_scale(const Expr& c, const DTensor& a, std::string name) {
    DTensor out(name.empty() ? a.name() : std::move(name), a.dims(), a.signature());
    for (std::size_t k = 0; k < a.size(); ++k) out.flat(k) = c * a.flat(k);
    return out;
}

DTensor contract(const DTensor& a, const DTensor& b,
                 const std::vector<std::pair<int, int>>& pairs, std::string name) {
    std::vector<bool> ca(a.rank(), false), cb(b.rank(), false);
    for (auto [sa, sb] : pairs) {
        if (a.extent(sa) != b.extent(sb))
            throw std::invalid_argument("contraction extent mismatch: " + a.name() + "/" + b.name());
        ca[static_cast<std::size_t>(sa)] = true;
        cb[static_cast<std::size_t>(sb)] = true;
    }
    std::vector<IndexSlot> sig;
    std::vector<int> free_a, free_b;
    for (int s = 0; s < a.rank(); ++s)
        if (!ca[static_cast<std::size_t>(s)]) {
            sig.push_back(a.signature()[static_cast<std::size_t>(s)]);
            free_a.push_back(s);
        }
    for (int s = 0; s < b.rank(); ++s)
        if (!cb[static_cast<std::size_t>(s)]) {
            sig.push_back(b.signature()[static_cast<std::size_t>(s)]);
            free_b.push_back(s);
        }

    DTensor out(std::move(name), a.dims(), sig);
    std::vector<int> ia(a.rank(), 0), ib(b.rank(), 0);
    out.fill([&](std::span<const int> idx) {
        for (std::size_t s = 0; s < free_a.size(); ++s) ia[static_cast<std::size_t>(free_a[s])] = idx[s];
        for (std::size_t s = 0; s < free_b.size(); ++s)
            ib[static_cast<std::size_t>(free_b[s])] = idx[free_a.size() + s];

        // iterate the contracted multi-index
        std::vector<Expr> terms;
        std::vector<int> cidx(pairs.size(), 0);
        while (true) {
            for (std::size_t q = 0; q < pairs.size(); ++q) {
                ia[static_cast<std::size_t>(pairs[q].first)] = cidx[q];
                ib[static_cast<std::size_t>(pairs[q].second)] = cidx[q];
            }
            terms.push_back(a.at(std::span<const int>(ia)) * b.at(std::span<const int>(ib)));
            std::size_t q = pairs.size();
            bool done = true;
            while (q-- > 0) {
                if (++cidx[q] < a.extent(pairs[q].first)) {
                    done = false;
                    break;
                }
                cidx[q] = 0;
            }
            if (done) break;
        }
        return sum(std::move(terms));
    });
    return out;
}

DTensor self_contract(const DTensor& a, int s1, int s2, std::string name) {
    if (a.extent(s1) != a.extent(s2))
        throw std::invalid_argument("trace extent mismatch on " + a.name());
    std::vector<IndexSlot> sig;
    std::vector<int> free_slots;
    for (int s = 0; s < a.rank(); ++s)
        if (s != s1 && s != s2) {
            sig.push_back(a.signature()[static_cast<std::size_t>(s)]);
            free_slots.push_back(s);
        }
    DTensor out(std::move(name), a.dims(), sig);
    std::vector<int> ia(a.rank(), 0);
    out.fill([&](std::span<const int> idx) {
        for (std::size_t s = 0; s < free_slots.size(); ++s)
            ia[static_cast<std::size_t>(free_slots[s])] = idx[s];
        std::vector<Expr> terms;
        for (int r = 0; r < a.extent(s1); ++r) {
            ia[static_cast<std::size_t>(s1)] = r;
            ia[static_cast<std::size_t>(s2)] = r;
            terms.push_back(a.at(std::span<const int>(ia)));
        }
        return sum(std::move(terms));
    });
    return out;
}

DTensor permute(const DTensor& a, const std::vector<int>& perm, std::string name) {
    // perm[s] = slot of `a` that becomes slot s of the result
    std::vector<IndexSlot> sig;
    for (int s : perm) sig.push_back(a.signature()[static_cast<std::size_t>(s)]);
    DTensor out(name.empty() ? a.name() : std::move(name), a.dims(), sig);
    std::vector<int> ia(a.rank(), 0);
    out.fill([&](std::span<const int> idx) {
        for (std::size_t s = 0; s < perm.size(); ++s) ia[static_cast<std::size_t>(perm[s])] = idx[s];
        return a.at(std::span<const int>(ia));
    });
    return out;
}

DTensor zero_tensor(std::string name, Dims dims, std::vector<IndexSlot> sig) {
    return DTensor(std::move(name), dims, std::move(sig));
}

} // namespace mth
