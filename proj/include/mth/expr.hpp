#ifndef MTH_EXPR_HPP
#define MTH_EXPR_HPP

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mth {

/// Coordinates on the dual 1-jet space: t^a (temporal), x^i (spatial),
/// p_i^a (polymomenta, one spatial and one temporal index). Indices are
/// 1-based, matching the ranges a = 1..m, i = 1..n.
enum class VarKind : std::uint8_t { Temporal, Spatial, Momentum };

struct Dims {
    int m = 1;
    int n = 1;
};

struct VarRef {
    VarKind kind = VarKind::Temporal;
    int a = 0; // temporal index (Temporal, Momentum)
    int i = 0; // spatial index (Spatial, Momentum)

    static VarRef temporal(int a) { return {VarKind::Temporal, a, 0}; }
    static VarRef spatial(int i) { return {VarKind::Spatial, 0, i}; }
    static VarRef momentum(int i, int a) { return {VarKind::Momentum, a, i}; }

    bool operator==(const VarRef& o) const { return kind == o.kind && a == o.a && i == o.i; }
    bool operator<(const VarRef& o) const {
        if (kind != o.kind) return kind < o.kind;
        if (a != o.a) return a < o.a;
        return i < o.i;
    }
    std::string name() const;
    bool in_range(const Dims& d) const;
};

/// Numeric value of every coordinate; shapes follow the active dims.
/// p[i-1][a-1] holds p_i^a.
struct Point {
    std::vector<double> t;
    std::vector<double> x;
    std::vector<std::vector<double>> p;

    static Point zero(const Dims& d);
    double value(const VarRef& v) const;
    double& slot(const VarRef& v);
};

/// Exact rational exponent. Kept normalized (den > 0, gcd = 1).
struct Rational {
    long long num = 0;
    long long den = 1;

    Rational() = default;
    Rational(long long n) : num(n), den(1) {}
    Rational(long long n, long long d);
    bool is_integer() const { return den == 1; }
    bool is_zero() const { return num == 0; }
    bool is_one() const { return num == 1 && den == 1; }
    double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
    Rational operator+(const Rational& o) const { return {num * o.den + o.num * den, den * o.den}; }
    Rational operator-(const Rational& o) const { return {num * o.den - o.num * den, den * o.den}; }
    Rational operator*(const Rational& o) const { return {num * o.num, den * o.den}; }
    bool operator==(const Rational& o) const { return num == o.num && den == o.den; }
    std::string str() const;
};

enum class Fn : std::uint8_t { Sin, Cos, Tan, Exp, Ln, Sqrt, Sinh, Cosh };

const char* fn_name(Fn f);

class Expr;
struct ExprNode;

/// Immutable symbolic scalar expression over jet-space coordinates.
/// Trees are shared; all operations return new trees.
class Expr {
  public:
    enum class Kind : std::uint8_t {
        Constant,   // decimal literal
        NamedConst, // pi, e
        Var,
        Sum,      // n-ary, non-empty
        Product,  // n-ary, non-empty
        Power,    // base ^ rational
        Quotient, // num / den
        Neg,
        Call
    };

    Expr(); // constant 0

    Kind kind() const;
    double constant_value() const;
    const std::string& named() const;
    const VarRef& var() const;
    const std::vector<Expr>& terms() const; // Sum/Product
    const Expr& base() const;
    const Rational& exponent() const;
    const Expr& num() const;
    const Expr& den() const;
    const Expr& arg() const; // Neg/Call
    Fn fn() const;

    bool is_constant(double v) const;
    bool is_zero() const { return is_constant(0.0); }
    bool is_one() const { return is_constant(1.0); }

    const ExprNode* node() const { return node_.get(); }

  private:
    explicit Expr(std::shared_ptr<const ExprNode> n) : node_(std::move(n)) {}
    std::shared_ptr<const ExprNode> node_;
    friend Expr make_expr(ExprNode&&);
};

// Building blocks. Constructors fold constants and absorb 0/1 locally so
// that tensor assembly does not accumulate dead branches.
Expr constant(double v);
Expr named_constant(const std::string& name); // "pi" or "e"
Expr variable(const VarRef& v);
Expr sum(std::vector<Expr> terms);
Expr product(std::vector<Expr> factors);
Expr pow_expr(Expr base, Rational exp);
Expr quotient(Expr num, Expr den);
Expr negate(Expr e);
Expr call(Fn f, Expr arg);

Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);

/// Exact partial derivative; no numeric approximation.
Expr diff(const Expr& e, const VarRef& v);

/// Normalization pass: constant folding, 0/1 absorption, flattening,
/// like-term collection, canonical ordering. Idempotent, and preserves
/// the value of eval at every point. Not a zero-decision procedure.
Expr simplify(const Expr& e);

struct EvalError : std::runtime_error {
    std::string subtree;
    EvalError(const std::string& msg, std::string sub)
        : std::runtime_error(msg + " in `" + sub + "`"), subtree(std::move(sub)) {}
};

/// Double-precision evaluation. Throws EvalError on domain faults
/// (division by zero, ln of non-positive, sqrt of negative, ...),
/// naming the offending subtree.
double eval(const Expr& e, const Point& pt);

std::string to_string(const Expr& e);

/// Structural equality (same shape, same payloads).
bool identical(const Expr& a, const Expr& b);

/// Replace variables; `repl` returns the substitute or nullopt to keep.
Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const VarRef&)>& repl);

void collect_vars(const Expr& e, std::vector<VarRef>& out);
bool depends_on(const Expr& e, VarKind kind);
bool depends_on(const Expr& e, const VarRef& v);

struct ParseError : std::runtime_error {
    std::size_t position;
    ParseError(const std::string& msg, std::size_t pos)
        : std::runtime_error(msg + " (at position " + std::to_string(pos) + ")"), position(pos) {}
};

/// Parse the infix grammar: precedence ^ > unary - > *,/ > +,-;
/// right-associative ^; variables t<D>, x<D>, p<D>_<D>; constants pi, e;
/// exponents restricted to integers and rational literals.
/// `consts` optionally binds extra identifiers to decimal values.
Expr parse_expr(std::string_view src, const Dims& dims,
                const std::map<std::string, double>* consts = nullptr);

} // namespace mth

#endif
