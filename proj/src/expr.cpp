#include "mth/expr.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <numeric>
#include <sstream>

namespace mth {

std::string VarRef::name() const {
    switch (kind) {
        case VarKind::Temporal: return "t" + std::to_string(a);
        case VarKind::Spatial: return "x" + std::to_string(i);
        case VarKind::Momentum: return "p" + std::to_string(i) + "_" + std::to_string(a);
    }
    return "?";
}

bool VarRef::in_range(const Dims& d) const {
    switch (kind) {
        case VarKind::Temporal: return a >= 1 && a <= d.m;
        case VarKind::Spatial: return i >= 1 && i <= d.n;
        case VarKind::Momentum: return a >= 1 && a <= d.m && i >= 1 && i <= d.n;
    }
    return false;
}

Point Point::zero(const Dims& d) {
    Point pt;
    pt.t.assign(d.m, 0.0);
    pt.x.assign(d.n, 0.0);
    pt.p.assign(d.n, std::vector<double>(d.m, 0.0));
    return pt;
}

double Point::value(const VarRef& v) const {
    switch (v.kind) {
        case VarKind::Temporal: return t.at(v.a - 1);
        case VarKind::Spatial: return x.at(v.i - 1);
        case VarKind::Momentum: return p.at(v.i - 1).at(v.a - 1);
    }
    return 0.0;
}

double& Point::slot(const VarRef& v) {
    switch (v.kind) {
        case VarKind::Temporal: return t.at(v.a - 1);
        case VarKind::Spatial: return x.at(v.i - 1);
        default: return p.at(v.i - 1).at(v.a - 1);
    }
}

Rational::Rational(long long n, long long d) : num(n), den(d) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    if (den < 0) {
        num = -num;
        den = -den;
    }
    long long g = std::gcd(num < 0 ? -num : num, den);
    if (g > 1) {
        num /= g;
        den /= g;
    }
}

std::string Rational::str() const {
    if (den == 1) return std::to_string(num);
    return "(" + std::to_string(num) + "/" + std::to_string(den) + ")";
}

const char* fn_name(Fn f) {
    switch (f) {
        case Fn::Sin: return "sin";
        case Fn::Cos: return "cos";
        case Fn::Tan: return "tan";
        case Fn::Exp: return "exp";
        case Fn::Ln: return "ln";
        case Fn::Sqrt: return "sqrt";
        case Fn::Sinh: return "sinh";
        case Fn::Cosh: return "cosh";
    }
    return "?";
}

struct ExprNode {
    Expr::Kind kind = Expr::Kind::Constant;
    double value = 0.0;       // Constant
    std::string name;         // NamedConst
    VarRef var;               // Var
    std::vector<Expr> kids;   // Sum/Product terms; [base] for Power; [num,den]; [arg]
    Rational exp;             // Power
    Fn fn = Fn::Sin;          // Call
};

Expr make_expr(ExprNode&& n) { return Expr(std::make_shared<const ExprNode>(std::move(n))); }

Expr::Expr() : node_(std::make_shared<const ExprNode>()) {}

Expr::Kind Expr::kind() const { return node_->kind; }
double Expr::constant_value() const { return node_->value; }
const std::string& Expr::named() const { return node_->name; }
const VarRef& Expr::var() const { return node_->var; }
const std::vector<Expr>& Expr::terms() const { return node_->kids; }
const Expr& Expr::base() const { return node_->kids[0]; }
const Rational& Expr::exponent() const { return node_->exp; }
const Expr& Expr::num() const { return node_->kids[0]; }
const Expr& Expr::den() const { return node_->kids[1]; }
const Expr& Expr::arg() const { return node_->kids[0]; }
Fn Expr::fn() const { return node_->fn; }

bool Expr::is_constant(double v) const {
    return node_->kind == Kind::Constant && node_->value == v;
}

Expr constant(double v) {
    ExprNode n;
    n.kind = Expr::Kind::Constant;
    n.value = v;
    return make_expr(std::move(n));
}

Expr named_constant(const std::string& name) {
    if (name != "pi" && name != "e") throw std::invalid_argument("unknown named constant: " + name);
    ExprNode n;
    n.kind = Expr::Kind::NamedConst;
    n.name = name;
    return make_expr(std::move(n));
}

Expr variable(const VarRef& v) {
    ExprNode n;
    n.kind = Expr::Kind::Var;
    n.var = v;
    return make_expr(std::move(n));
}

Expr sum(std::vector<Expr> terms) {
    std::vector<Expr> flat;
    double c = 0.0;
    bool has_const = false;
    for (auto& t : terms) {
        if (t.kind() == Expr::Kind::Sum) {
            for (const auto& s : t.terms()) {
                if (s.kind() == Expr::Kind::Constant) {
                    c += s.constant_value();
                    has_const = true;
                } else {
                    flat.push_back(s);
                }
            }
        } else if (t.kind() == Expr::Kind::Constant) {
            c += t.constant_value();
            has_const = true;
        } else {
            flat.push_back(std::move(t));
        }
    }
    if (has_const && c != 0.0) flat.insert(flat.begin(), constant(c));
    if (flat.empty()) return constant(0.0);
    if (flat.size() == 1) return flat[0];
    ExprNode n;
    n.kind = Expr::Kind::Sum;
    n.kids = std::move(flat);
    return make_expr(std::move(n));
}

Expr product(std::vector<Expr> factors) {
    std::vector<Expr> flat;
    double c = 1.0;
    bool neg = false;
    for (auto& f : factors) {
        Expr cur = f;
        while (cur.kind() == Expr::Kind::Neg) {
            neg = !neg;
            cur = cur.arg();
        }
        if (cur.kind() == Expr::Kind::Product) {
            for (const auto& s : cur.terms()) {
                if (s.kind() == Expr::Kind::Constant)
                    c *= s.constant_value();
                else
                    flat.push_back(s);
            }
        } else if (cur.kind() == Expr::Kind::Constant) {
            c *= cur.constant_value();
        } else {
            flat.push_back(std::move(cur));
        }
    }
    if (neg) c = -c;
    if (c == 0.0) return constant(0.0);
    if (flat.empty()) return constant(c);
    if (c != 1.0) flat.insert(flat.begin(), constant(c));
    if (flat.size() == 1) return flat[0];
    ExprNode n;
    n.kind = Expr::Kind::Product;
    n.kids = std::move(flat);
    return make_expr(std::move(n));
}

Expr pow_expr(Expr base, Rational exp) {
    if (exp.is_zero()) return constant(1.0);
    if (exp.is_one()) return base;
    if (base.is_zero()) return constant(0.0);
    if (base.is_one()) return constant(1.0);
    if (base.kind() == Expr::Kind::Constant && exp.is_integer()) {
        return constant(std::pow(base.constant_value(), static_cast<double>(exp.num)));
    }
    // (b^p)^q -> b^(pq) is only safe for integer p.
    if (base.kind() == Expr::Kind::Power && base.exponent().is_integer()) {
        Rational merged = base.exponent() * exp;
        return pow_expr(base.base(), merged);
    }
    ExprNode n;
    n.kind = Expr::Kind::Power;
    n.kids.push_back(std::move(base));
    n.exp = exp;
    return make_expr(std::move(n));
}

Expr quotient(Expr num, Expr den) {
    if (num.is_zero()) return constant(0.0);
    if (den.is_one()) return num;
    if (den.kind() == Expr::Kind::Constant && num.kind() == Expr::Kind::Constant &&
        den.constant_value() != 0.0) {
        return constant(num.constant_value() / den.constant_value());
    }
    if (den.kind() == Expr::Kind::Constant && den.constant_value() != 0.0) {
        return product({constant(1.0 / den.constant_value()), std::move(num)});
    }
    ExprNode n;
    n.kind = Expr::Kind::Quotient;
    n.kids.push_back(std::move(num));
    n.kids.push_back(std::move(den));
    return make_expr(std::move(n));
}

Expr negate(Expr e) {
    if (e.kind() == Expr::Kind::Constant) return constant(-e.constant_value());
    if (e.kind() == Expr::Kind::Neg) return e.arg();
    ExprNode n;
    n.kind = Expr::Kind::Neg;
    n.kids.push_back(std::move(e));
    return make_expr(std::move(n));
}

Expr call(Fn f, Expr arg) {
    if (arg.kind() == Expr::Kind::Constant) {
        double v = arg.constant_value();
        double r = 0.0;
        bool ok = true;
        switch (f) {
            case Fn::Sin: r = std::sin(v); break;
            case Fn::Cos: r = std::cos(v); break;
            case Fn::Tan: r = std::tan(v); break;
            case Fn::Exp: r = std::exp(v); break;
            case Fn::Ln: ok = v > 0.0; r = ok ? std::log(v) : 0.0; break;
            case Fn::Sqrt: ok = v >= 0.0; r = ok ? std::sqrt(v) : 0.0; break;
            case Fn::Sinh: r = std::sinh(v); break;
            case Fn::Cosh: r = std::cosh(v); break;
        }
        if (ok && std::isfinite(r)) return constant(r);
    }
    ExprNode n;
    n.kind = Expr::Kind::Call;
    n.fn = f;
    n.kids.push_back(std::move(arg));
    return make_expr(std::move(n));
}

Expr operator+(const Expr& a, const Expr& b) { return sum({a, b}); }
Expr operator-(const Expr& a, const Expr& b) { return sum({a, negate(b)}); }
Expr operator*(const Expr& a, const Expr& b) { return product({a, b}); }
Expr operator/(const Expr& a, const Expr& b) { return quotient(a, b); }
Expr operator-(const Expr& a) { return negate(a); }

// ---------------------------------------------------------------------------
// differentiation

Expr diff(const Expr& e, const VarRef& v) {
    switch (e.kind()) {
        case Expr::Kind::Constant:
        case Expr::Kind::NamedConst:
            return constant(0.0);
        case Expr::Kind::Var:
            return constant(e.var() == v ? 1.0 : 0.0);
        case Expr::Kind::Sum: {
            std::vector<Expr> parts;
            parts.reserve(e.terms().size());
            for (const auto& t : e.terms()) parts.push_back(diff(t, v));
            return sum(std::move(parts));
        }
        case Expr::Kind::Product: {
            const auto& fs = e.terms();
            std::vector<Expr> parts;
            for (std::size_t i = 0; i < fs.size(); ++i) {
                Expr d = diff(fs[i], v);
                if (d.is_zero()) continue;
                std::vector<Expr> term;
                term.reserve(fs.size());
                for (std::size_t j = 0; j < fs.size(); ++j) term.push_back(j == i ? d : fs[j]);
                parts.push_back(product(std::move(term)));
            }
            return sum(std::move(parts));
        }
        case Expr::Kind::Power: {
            Expr db = diff(e.base(), v);
            if (db.is_zero()) return constant(0.0);
            Rational q = e.exponent();
            return product({constant(q.to_double()), pow_expr(e.base(), q - Rational(1)), db});
        }
        case Expr::Kind::Quotient: {
            const Expr& n = e.num();
            const Expr& d = e.den();
            Expr dn = diff(n, v);
            Expr dd = diff(d, v);
            if (dd.is_zero()) return quotient(dn, d);
            return quotient(sum({product({dn, d}), negate(product({n, dd}))}),
                            pow_expr(d, Rational(2)));
        }
        case Expr::Kind::Neg:
            return negate(diff(e.arg(), v));
        case Expr::Kind::Call: {
            const Expr& u = e.arg();
            Expr du = diff(u, v);
            if (du.is_zero()) return constant(0.0);
            Expr outer;
            switch (e.fn()) {
                case Fn::Sin: outer = call(Fn::Cos, u); break;
                case Fn::Cos: outer = negate(call(Fn::Sin, u)); break;
                case Fn::Tan: outer = quotient(constant(1.0), pow_expr(call(Fn::Cos, u), Rational(2))); break;
                case Fn::Exp: outer = call(Fn::Exp, u); break;
                case Fn::Ln: outer = quotient(constant(1.0), u); break;
                case Fn::Sqrt: outer = quotient(constant(0.5), call(Fn::Sqrt, u)); break;
                case Fn::Sinh: outer = call(Fn::Cosh, u); break;
                case Fn::Cosh: outer = call(Fn::Sinh, u); break;
            }
            return product({outer, du});
        }
    }
    return constant(0.0);
}

// ---------------------------------------------------------------------------
// evaluation

double eval(const Expr& e, const Point& pt) {
    switch (e.kind()) {
        case Expr::Kind::Constant:
            return e.constant_value();
        case Expr::Kind::NamedConst:
            return e.named() == "pi" ? std::numbers::pi : std::numbers::e;
        case Expr::Kind::Var:
            return pt.value(e.var());
        case Expr::Kind::Sum: {
            double s = 0.0;
            for (const auto& t : e.terms()) s += eval(t, pt);
            return s;
        }
        case Expr::Kind::Product: {
            double s = 1.0;
            for (const auto& t : e.terms()) s *= eval(t, pt);
            return s;
        }
        case Expr::Kind::Power: {
            double b = eval(e.base(), pt);
            const Rational& q = e.exponent();
            double r;
            if (q.is_integer()) {
                if (b == 0.0 && q.num < 0) throw EvalError("zero base with negative exponent", to_string(e));
                r = std::pow(b, static_cast<double>(q.num));
            } else {
                if (b < 0.0) throw EvalError("negative base with fractional exponent", to_string(e));
                if (b == 0.0 && q.num < 0) throw EvalError("zero base with negative exponent", to_string(e));
                r = std::pow(b, q.to_double());
            }
            if (!std::isfinite(r)) throw EvalError("non-finite power", to_string(e));
            return r;
        }
        case Expr::Kind::Quotient: {
            double d = eval(e.den(), pt);
            if (d == 0.0) throw EvalError("division by zero", to_string(e));
            double r = eval(e.num(), pt) / d;
            if (!std::isfinite(r)) throw EvalError("non-finite quotient", to_string(e));
            return r;
        }
        case Expr::Kind::Neg:
            return -eval(e.arg(), pt);
        case Expr::Kind::Call: {
            double u = eval(e.arg(), pt);
            switch (e.fn()) {
                case Fn::Sin: return std::sin(u);
                case Fn::Cos: return std::cos(u);
                case Fn::Tan: {
                    double r = std::tan(u);
                    if (!std::isfinite(r)) throw EvalError("tan at pole", to_string(e));
                    return r;
                }
                case Fn::Exp: {
                    double r = std::exp(u);
                    if (!std::isfinite(r)) throw EvalError("exp overflow", to_string(e));
                    return r;
                }
                case Fn::Ln:
                    if (u <= 0.0) throw EvalError("ln of non-positive value", to_string(e));
                    return std::log(u);
                case Fn::Sqrt:
                    if (u < 0.0) throw EvalError("sqrt of negative value", to_string(e));
                    return std::sqrt(u);
                case Fn::Sinh: return std::sinh(u);
                case Fn::Cosh: return std::cosh(u);
            }
            return 0.0;
        }
    }
    return 0.0;
}

// ---------------------------------------------------------------------------
// printing

namespace {

// Grammar precedence: ^ (4) > unary - (3) > * / (2) > + - (1).
int precedence(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Sum: return 1;
        case Expr::Kind::Product:
        case Expr::Kind::Quotient: return 2;
        case Expr::Kind::Neg: return 3;
        case Expr::Kind::Power: return 4;
        default: return 5;
    }
}

std::string format_double(double v) {
    if (v == static_cast<long long>(v) && std::abs(v) < 1e15) {
        return std::to_string(static_cast<long long>(v));
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_rec(const Expr& e, std::string& out, int parent_prec);

void print_wrapped(const Expr& e, std::string& out, int min_prec) {
    bool need = precedence(e) < min_prec ||
                (e.kind() == Expr::Kind::Constant && e.constant_value() < 0.0 && min_prec > 1);
    if (need) {
        out += '(';
        print_rec(e, out, 0);
        out += ')';
    } else {
        print_rec(e, out, 0);
    }
}

void print_rec(const Expr& e, std::string& out, int) {
    switch (e.kind()) {
        case Expr::Kind::Constant:
            out += format_double(e.constant_value());
            return;
        case Expr::Kind::NamedConst:
            out += e.named();
            return;
        case Expr::Kind::Var:
            out += e.var().name();
            return;
        case Expr::Kind::Sum: {
            bool first = true;
            for (const auto& t : e.terms()) {
                if (t.kind() == Expr::Kind::Neg) {
                    out += first ? "-" : " - ";
                    print_wrapped(t.arg(), out, 2);
                } else if (t.kind() == Expr::Kind::Constant && t.constant_value() < 0.0 && !first) {
                    out += " - ";
                    out += format_double(-t.constant_value());
                } else {
                    if (!first) out += " + ";
                    print_wrapped(t, out, 1);
                }
                first = false;
            }
            return;
        }
        case Expr::Kind::Product: {
            bool first = true;
            for (const auto& t : e.terms()) {
                if (!first) out += '*';
                print_wrapped(t, out, first ? 2 : 3);
                first = false;
            }
            return;
        }
        case Expr::Kind::Power:
            print_wrapped(e.base(), out, 5);
            out += '^';
            out += e.exponent().str();
            return;
        case Expr::Kind::Quotient:
            print_wrapped(e.num(), out, 2);
            out += '/';
            print_wrapped(e.den(), out, 3);
            return;
        case Expr::Kind::Neg:
            out += '-';
            print_wrapped(e.arg(), out, 3);
            return;
        case Expr::Kind::Call:
            out += fn_name(e.fn());
            out += '(';
            print_rec(e.arg(), out, 0);
            out += ')';
            return;
    }
}

} // namespace

std::string to_string(const Expr& e) {
    std::string out;
    print_rec(e, out, 0);
    return out;
}

// ---------------------------------------------------------------------------
// structural equality and traversal

bool identical(const Expr& a, const Expr& b) {
    if (a.node() == b.node()) return true;
    if (a.kind() != b.kind()) return false;
    switch (a.kind()) {
        case Expr::Kind::Constant: return a.constant_value() == b.constant_value();
        case Expr::Kind::NamedConst: return a.named() == b.named();
        case Expr::Kind::Var: return a.var() == b.var();
        case Expr::Kind::Sum:
        case Expr::Kind::Product: {
            if (a.terms().size() != b.terms().size()) return false;
            for (std::size_t i = 0; i < a.terms().size(); ++i)
                if (!identical(a.terms()[i], b.terms()[i])) return false;
            return true;
        }
        case Expr::Kind::Power:
            return a.exponent() == b.exponent() && identical(a.base(), b.base());
        case Expr::Kind::Quotient:
            return identical(a.num(), b.num()) && identical(a.den(), b.den());
        case Expr::Kind::Neg:
            return identical(a.arg(), b.arg());
        case Expr::Kind::Call:
            return a.fn() == b.fn() && identical(a.arg(), b.arg());
    }
    return false;
}

Expr substitute(const Expr& e, const std::function<std::optional<Expr>(const VarRef&)>& repl) {
    switch (e.kind()) {
        case Expr::Kind::Constant:
        case Expr::Kind::NamedConst:
            return e;
        case Expr::Kind::Var: {
            auto r = repl(e.var());
            return r ? *r : e;
        }
        case Expr::Kind::Sum:
        case Expr::Kind::Product: {
            std::vector<Expr> kids;
            kids.reserve(e.terms().size());
            for (const auto& t : e.terms()) kids.push_back(substitute(t, repl));
            return e.kind() == Expr::Kind::Sum ? sum(std::move(kids)) : product(std::move(kids));
        }
        case Expr::Kind::Power:
            return pow_expr(substitute(e.base(), repl), e.exponent());
        case Expr::Kind::Quotient:
            return quotient(substitute(e.num(), repl), substitute(e.den(), repl));
        case Expr::Kind::Neg:
            return negate(substitute(e.arg(), repl));
        case Expr::Kind::Call:
            return call(e.fn(), substitute(e.arg(), repl));
    }
    return e;
}

void collect_vars(const Expr& e, std::vector<VarRef>& out) {
    switch (e.kind()) {
        case Expr::Kind::Var:
            if (std::find(out.begin(), out.end(), e.var()) == out.end()) out.push_back(e.var());
            return;
        case Expr::Kind::Constant:
        case Expr::Kind::NamedConst:
            return;
        default:
            for (const auto& t : e.node()->kids) collect_vars(t, out);
    }
}

bool depends_on(const Expr& e, VarKind kind) {
    std::vector<VarRef> vs;
    collect_vars(e, vs);
    for (const auto& v : vs)
        if (v.kind == kind) return true;
    return false;
}

bool depends_on(const Expr& e, const VarRef& v) {
    std::vector<VarRef> vs;
    collect_vars(e, vs);
    return std::find(vs.begin(), vs.end(), v) != vs.end();
}

// ---------------------------------------------------------------------------
// simplification

namespace {

// Split a (simplified) expression into coefficient and key part: 3*x*y ->
// (3, x*y). Used for like-term collection.
void split_coeff(const Expr& e, double& coeff, Expr& rest) {
    if (e.kind() == Expr::Kind::Constant) {
        coeff = e.constant_value();
        rest = constant(1.0);
        return;
    }
    if (e.kind() == Expr::Kind::Neg) {
        split_coeff(e.arg(), coeff, rest);
        coeff = -coeff;
        return;
    }
    if (e.kind() == Expr::Kind::Product) {
        double c = 1.0;
        std::vector<Expr> rem;
        for (const auto& f : e.terms()) {
            if (f.kind() == Expr::Kind::Constant)
                c *= f.constant_value();
            else
                rem.push_back(f);
        }
        coeff = c;
        rest = product(std::move(rem));
        return;
    }
    coeff = 1.0;
    rest = e;
}

Expr simplify_rec(const Expr& e);

Expr simplify_sum(const Expr& e) {
    std::vector<Expr> flat;
    double cst = 0.0;
    std::function<void(const Expr&, bool)> push = [&](const Expr& t, bool negated) {
        Expr s = simplify_rec(t);
        if (s.kind() == Expr::Kind::Neg) {
            push(s.arg(), !negated);
            return;
        }
        if (s.kind() == Expr::Kind::Sum) {
            for (const auto& k : s.terms()) push(k, negated);
            return;
        }
        if (s.kind() == Expr::Kind::Constant) {
            cst += negated ? -s.constant_value() : s.constant_value();
            return;
        }
        flat.push_back(negated ? negate(s) : s);
    };
    for (const auto& t : e.terms()) push(t, false);

    // collect like terms by canonical key
    struct Bucket {
        double coeff = 0.0;
        Expr rest;
    };
    std::map<std::string, Bucket> buckets;
    for (const auto& t : flat) {
        double c;
        Expr rest;
        split_coeff(t, c, rest);
        std::string key = to_string(rest);
        auto it = buckets.find(key);
        if (it == buckets.end())
            buckets[key] = {c, rest};
        else
            it->second.coeff += c;
    }
    std::vector<Expr> out;
    if (cst != 0.0) out.push_back(constant(cst));
    for (auto& [key, b] : buckets) {
        if (b.coeff == 0.0) continue;
        if (b.coeff == 1.0)
            out.push_back(b.rest);
        else if (b.coeff == -1.0)
            out.push_back(negate(b.rest));
        else
            out.push_back(product({constant(b.coeff), b.rest}));
    }
    return sum(std::move(out));
}

Expr simplify_product(const Expr& e) {
    std::vector<Expr> flat;
    double cst = 1.0;
    std::function<void(const Expr&)> push = [&](const Expr& t) {
        Expr s = simplify_rec(t);
        if (s.kind() == Expr::Kind::Neg) {
            cst = -cst;
            push(s.arg());
            return;
        }
        if (s.kind() == Expr::Kind::Product) {
            for (const auto& k : s.terms()) push(k);
            return;
        }
        if (s.kind() == Expr::Kind::Constant) {
            cst *= s.constant_value();
            return;
        }
        flat.push_back(s);
    };
    for (const auto& t : e.terms()) push(t);
    if (cst == 0.0) return constant(0.0);

    // merge powers of identical bases
    struct Bucket {
        Rational exp{0};
        Expr base;
    };
    std::map<std::string, Bucket> buckets;
    for (const auto& f : flat) {
        Expr base = f;
        Rational q(1);
        if (f.kind() == Expr::Kind::Power) {
            base = f.base();
            q = f.exponent();
        }
        std::string key = to_string(base);
        auto it = buckets.find(key);
        if (it == buckets.end())
            buckets[key] = {q, base};
        else
            it->second.exp = it->second.exp + q;
    }
    std::vector<Expr> out;
    if (cst != 1.0) out.push_back(constant(cst));
    for (auto& [key, b] : buckets) {
        if (b.exp.is_zero()) continue;
        out.push_back(b.exp.is_one() ? b.base : pow_expr(b.base, b.exp));
    }
    return product(std::move(out));
}

Expr simplify_rec(const Expr& e) {
    switch (e.kind()) {
        case Expr::Kind::Constant:
        case Expr::Kind::NamedConst:
        case Expr::Kind::Var:
            return e;
        case Expr::Kind::Sum:
            return simplify_sum(e);
        case Expr::Kind::Product:
            return simplify_product(e);
        case Expr::Kind::Power: {
            Expr b = simplify_rec(e.base());
            Rational q = e.exponent();
            if (q.is_integer()) {
                // distribute integer powers over products and quotients so
                // that like factors can merge
                if (b.kind() == Expr::Kind::Product) {
                    std::vector<Expr> fs;
                    for (const auto& f : b.terms()) fs.push_back(pow_expr(f, q));
                    return simplify_rec(product(std::move(fs)));
                }
                if (b.kind() == Expr::Kind::Quotient) {
                    return simplify_rec(quotient(pow_expr(b.num(), q), pow_expr(b.den(), q)));
                }
                if (b.kind() == Expr::Kind::Neg) {
                    Expr core = pow_expr(b.arg(), q);
                    return (q.num % 2 == 0) ? simplify_rec(core) : negate(simplify_rec(core));
                }
            }
            return pow_expr(std::move(b), q);
        }
        case Expr::Kind::Quotient: {
            Expr n = simplify_rec(e.num());
            Expr d = simplify_rec(e.den());
            if (n.kind() == Expr::Kind::Quotient)
                return simplify_rec(quotient(n.num(), product({n.den(), d})));
            if (d.kind() == Expr::Kind::Quotient)
                return simplify_rec(quotient(product({n, d.den()}), d.num()));
            if (identical(n, d) && !n.is_zero()) return constant(1.0);
            return quotient(std::move(n), std::move(d));
        }
        case Expr::Kind::Neg: {
            Expr a = simplify_rec(e.arg());
            if (a.kind() == Expr::Kind::Sum) {
                std::vector<Expr> kids;
                for (const auto& t : a.terms()) kids.push_back(negate(t));
                return simplify_sum(sum(std::move(kids)));
            }
            return negate(std::move(a));
        }
        case Expr::Kind::Call:
            return call(e.fn(), simplify_rec(e.arg()));
    }
    return e;
}

} // namespace

Expr simplify(const Expr& e) { return simplify_rec(e); }

} // namespace mth
