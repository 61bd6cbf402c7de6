#ifndef MTH_DTENSOR_HPP
#define MTH_DTENSOR_HPP

#include "mth/expr.hpp"

#include <span>
#include <string>
#include <vector>

namespace mth {

/// One slot of a d-tensor signature. Temporal slots run 1..m, spatial 1..n.
/// A momentum-type index pair (as on p_i^a) is represented by two adjacent
/// slots, one temporal and one spatial, handled independently.
struct IndexSlot {
    enum class Kind : std::uint8_t { Temporal, Spatial };
    enum class Variance : std::uint8_t { Up, Down };
    Kind kind = Kind::Spatial;
    Variance variance = Variance::Down;

    static IndexSlot t_up() { return {Kind::Temporal, Variance::Up}; }
    static IndexSlot t_down() { return {Kind::Temporal, Variance::Down}; }
    static IndexSlot s_up() { return {Kind::Spatial, Variance::Up}; }
    static IndexSlot s_down() { return {Kind::Spatial, Variance::Down}; }

    bool operator==(const IndexSlot&) const = default;
};

/// Dense array of expressions with a typed index signature, row-major over
/// the signature. Internal indices are 0-based; printed output is 1-based.
class DTensor {
  public:
    DTensor() = default;
    DTensor(std::string name, Dims dims, std::vector<IndexSlot> signature);

    static DTensor scalar(std::string name, Dims dims, Expr value);

    const std::string& name() const { return name_; }
    void set_name(std::string n) { name_ = std::move(n); }
    const Dims& dims() const { return dims_; }
    const std::vector<IndexSlot>& signature() const { return sig_; }
    int rank() const { return static_cast<int>(sig_.size()); }
    int extent(int slot) const;
    std::size_t size() const { return comps_.size(); }

    const Expr& at(std::span<const int> idx) const;
    Expr& at(std::span<const int> idx);
    const Expr& at(std::initializer_list<int> idx) const { return at(std::span<const int>(idx.begin(), idx.size())); }
    Expr& at(std::initializer_list<int> idx) { return at(std::span<const int>(idx.begin(), idx.size())); }
    const Expr& flat(std::size_t k) const { return comps_[k]; }
    Expr& flat(std::size_t k) { return comps_[k]; }

    std::size_t offset(std::span<const int> idx) const;
    std::vector<int> unflatten(std::size_t k) const;

    /// Visit every component with its multi-index.
    template <class F>
    void for_each(F&& f) const {
        std::vector<int> idx(sig_.size(), 0);
        for (std::size_t k = 0; k < comps_.size(); ++k) {
            f(std::span<const int>(idx), comps_[k]);
            bump(idx);
        }
    }
    template <class F>
    void fill(F&& f) {
        std::vector<int> idx(sig_.size(), 0);
        for (std::size_t k = 0; k < comps_.size(); ++k) {
            comps_[k] = f(std::span<const int>(idx));
            bump(idx);
        }
    }

    DTensor simplified() const;
    /// Numeric evaluation of every component.
    std::vector<double> eval_all(const Point& pt) const;

    /// Largest |component| at pt.
    double max_abs(const Point& pt) const;

    /// Stable text form: one `name[i,j,...] = expr` line per component,
    /// lexicographic over 1-based indices.
    std::string print() const;

  private:
    void bump(std::vector<int>& idx) const;
    std::string name_;
    Dims dims_{};
    std::vector<IndexSlot> sig_;
    std::vector<Expr> comps_;
};

// Pointwise algebra. Signatures must agree elementwise in extent.
DTensor tensor_add(const DTensor& a, const DTensor& b, std::string name = "");
DTensor tensor_sub(const DTensor& a, const DTensor& b, std::string name = "");
DTensor tensor_scale(const Expr& c, const DTensor& a, std::string name = "");

/// General product with contractions: the result signature is the
/// concatenation of the uncontracted slots of `a` then of `b`; `pairs`
/// lists (slot of a, slot of b) to sum over.
DTensor contract(const DTensor& a, const DTensor& b,
                 const std::vector<std::pair<int, int>>& pairs, std::string name = "");

/// Trace over two slots of one tensor.
DTensor self_contract(const DTensor& a, int s1, int s2, std::string name = "");

DTensor permute(const DTensor& a, const std::vector<int>& perm, std::string name = "");

DTensor zero_tensor(std::string name, Dims dims, std::vector<IndexSlot> sig);

} // namespace mth

#endif
