#include "mth/expr.hpp"

#include <cctype>
#include <cstdlib>

namespace mth {

namespace {

enum class Tok { Number, Ident, Plus, Minus, Star, Slash, Caret, LParen, RParen, End };

struct Lexer {
    std::string_view src;
    std::size_t pos = 0;

    Tok tok = Tok::End;
    std::size_t tok_pos = 0;
    double number = 0.0;
    std::string ident;

    explicit Lexer(std::string_view s) : src(s) { next(); }

    [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
        throw ParseError(msg, at);
    }

    void next() {
        while (pos < src.size() && std::isspace(static_cast<unsigned char>(src[pos]))) ++pos;
        tok_pos = pos;
        if (pos >= src.size()) {
            tok = Tok::End;
            return;
        }
        char c = src[pos];
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            if (pos < src.size() && src[pos] == '.') {
                ++pos;
                if (pos >= src.size() || !std::isdigit(static_cast<unsigned char>(src[pos])))
                    fail("digit expected after decimal point", pos);
                while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
            }
            if (pos < src.size() && (src[pos] == 'e' || src[pos] == 'E')) {
                std::size_t mark = pos;
                ++pos;
                if (pos < src.size() && (src[pos] == '+' || src[pos] == '-')) ++pos;
                if (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) {
                    while (pos < src.size() && std::isdigit(static_cast<unsigned char>(src[pos]))) ++pos;
                } else {
                    pos = mark; // the 'e' belongs to the next token
                }
            }
            number = std::strtod(std::string(src.substr(start, pos - start)).c_str(), nullptr);
            tok = Tok::Number;
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t start = pos;
            while (pos < src.size() &&
                   (std::isalnum(static_cast<unsigned char>(src[pos])) || src[pos] == '_'))
                ++pos;
            ident = std::string(src.substr(start, pos - start));
            tok = Tok::Ident;
            return;
        }
        ++pos;
        switch (c) {
            case '+': tok = Tok::Plus; return;
            case '-': tok = Tok::Minus; return;
            case '*': tok = Tok::Star; return;
            case '/': tok = Tok::Slash; return;
            case '^': tok = Tok::Caret; return;
            case '(': tok = Tok::LParen; return;
            case ')': tok = Tok::RParen; return;
            default: fail(std::string("unexpected character '") + c + "'", tok_pos);
        }
    }
};

struct Parser {
    Lexer lex;
    Dims dims;
    const std::map<std::string, double>* consts;

    Parser(std::string_view src, const Dims& d, const std::map<std::string, double>* c)
        : lex(src), dims(d), consts(c) {}

    Expr parse() {
        Expr e = parse_sum();
        if (lex.tok != Tok::End) lex.fail("unexpected trailing input", lex.tok_pos);
        return e;
    }

    Expr parse_sum() {
        Expr e = parse_term();
        while (lex.tok == Tok::Plus || lex.tok == Tok::Minus) {
            bool minus = lex.tok == Tok::Minus;
            lex.next();
            Expr rhs = parse_term();
            e = minus ? e - rhs : e + rhs;
        }
        return e;
    }

    Expr parse_term() {
        Expr e = parse_unary();
        while (lex.tok == Tok::Star || lex.tok == Tok::Slash) {
            bool div = lex.tok == Tok::Slash;
            lex.next();
            Expr rhs = parse_unary();
            e = div ? e / rhs : e * rhs;
        }
        return e;
    }

    Expr parse_unary() {
        if (lex.tok == Tok::Minus) {
            lex.next();
            return negate(parse_unary());
        }
        return parse_power();
    }

    Expr parse_power() {
        Expr base = parse_atom();
        if (lex.tok == Tok::Caret) {
            lex.next();
            Rational q = parse_exponent();
            return pow_expr(base, q);
        }
        return base;
    }

    // Exponents must be exact rationals: an optionally negated integer, or a
    // parenthesized ratio of integers. Right-associative chains of integer
    // exponents fold (2^3 in exponent position is 8).
    Rational parse_exponent() {
        bool neg = false;
        while (lex.tok == Tok::Minus) {
            neg = !neg;
            lex.next();
        }
        Rational q;
        if (lex.tok == Tok::Number) {
            q = rational_from_number(lex.number, lex.tok_pos);
            lex.next();
        } else if (lex.tok == Tok::LParen) {
            lex.next();
            bool n1 = false;
            while (lex.tok == Tok::Minus) {
                n1 = !n1;
                lex.next();
            }
            if (lex.tok != Tok::Number) lex.fail("integer expected in exponent", lex.tok_pos);
            Rational a = rational_from_number(lex.number, lex.tok_pos);
            if (n1) a = Rational(-a.num, a.den);
            lex.next();
            if (lex.tok == Tok::Slash) {
                lex.next();
                bool n2 = false;
                while (lex.tok == Tok::Minus) {
                    n2 = !n2;
                    lex.next();
                }
                if (lex.tok != Tok::Number || lex.number != static_cast<long long>(lex.number))
                    lex.fail("integer expected in exponent denominator", lex.tok_pos);
                long long d = static_cast<long long>(lex.number);
                if (d == 0) lex.fail("zero denominator in exponent", lex.tok_pos);
                if (n2) d = -d;
                lex.next();
                if (!a.is_integer()) lex.fail("exponent numerator must be integer", lex.tok_pos);
                a = Rational(a.num, d);
            }
            if (lex.tok != Tok::RParen) lex.fail("')' expected in exponent", lex.tok_pos);
            lex.next();
            q = a;
        } else {
            lex.fail("integer or rational exponent expected", lex.tok_pos);
        }
        if (lex.tok == Tok::Caret) {
            lex.next();
            Rational r = parse_exponent();
            if (!r.is_integer() || r.num < 0)
                lex.fail("chained exponent must be a non-negative integer", lex.tok_pos);
            Rational acc(1);
            for (long long k = 0; k < r.num; ++k) acc = acc * q;
            q = acc;
        }
        return neg ? Rational(-q.num, q.den) : q;
    }

    Rational rational_from_number(double v, std::size_t at) {
        if (v != static_cast<long long>(v))
            lex.fail("exponent must be an integer or rational literal", at);
        return Rational(static_cast<long long>(v));
    }

    Expr parse_atom() {
        switch (lex.tok) {
            case Tok::Number: {
                double v = lex.number;
                lex.next();
                return constant(v);
            }
            case Tok::LParen: {
                lex.next();
                Expr e = parse_sum();
                if (lex.tok != Tok::RParen) lex.fail("')' expected", lex.tok_pos);
                lex.next();
                return e;
            }
            case Tok::Ident:
                return parse_ident();
            default:
                lex.fail("expression expected", lex.tok_pos);
        }
    }

    Expr parse_ident() {
        std::string id = lex.ident;
        std::size_t at = lex.tok_pos;
        lex.next();

        if (lex.tok == Tok::LParen) {
            static const std::map<std::string, Fn> fns = {
                {"sin", Fn::Sin}, {"cos", Fn::Cos},   {"tan", Fn::Tan},   {"exp", Fn::Exp},
                {"ln", Fn::Ln},   {"sqrt", Fn::Sqrt}, {"sinh", Fn::Sinh}, {"cosh", Fn::Cosh}};
            auto it = fns.find(id);
            if (it == fns.end()) lex.fail("unknown function '" + id + "'", at);
            lex.next();
            Expr a = parse_sum();
            if (lex.tok != Tok::RParen) lex.fail("')' expected after function argument", lex.tok_pos);
            lex.next();
            return call(it->second, a);
        }

        if (id == "pi" || id == "e") return named_constant(id);
        if (consts) {
            auto it = consts->find(id);
            if (it != consts->end()) return constant(it->second);
        }

        auto v = classify_var(id);
        if (!v) lex.fail("unknown identifier '" + id + "'", at);
        if (!v->in_range(dims))
            lex.fail("variable '" + id + "' out of range for dims (m=" + std::to_string(dims.m) +
                         ", n=" + std::to_string(dims.n) + ")",
                     at);
        return variable(*v);
    }

    static std::optional<VarRef> classify_var(const std::string& id) {
        if (id.size() < 2) return std::nullopt;
        char head = id[0];
        if (head != 't' && head != 'x' && head != 'p') return std::nullopt;
        std::size_t k = 1;
        while (k < id.size() && std::isdigit(static_cast<unsigned char>(id[k]))) ++k;
        if (k == 1) return std::nullopt;
        int first = std::atoi(id.substr(1, k - 1).c_str());
        if (head == 't' && k == id.size()) return VarRef::temporal(first);
        if (head == 'x' && k == id.size()) return VarRef::spatial(first);
        if (head == 'p' && k < id.size() && id[k] == '_') {
            std::size_t j = k + 1;
            if (j >= id.size()) return std::nullopt;
            for (std::size_t q = j; q < id.size(); ++q)
                if (!std::isdigit(static_cast<unsigned char>(id[q]))) return std::nullopt;
            int second = std::atoi(id.substr(j).c_str());
            return VarRef::momentum(first, second);
        }
        return std::nullopt;
    }
};

} // namespace

Expr parse_expr(std::string_view src, const Dims& dims, const std::map<std::string, double>* consts) {
    Parser p(src, dims, consts);
    return p.parse();
}

} // namespace mth
