#include "finsler/expr.hpp"

#include <charconv>
#include <cstdio>
#include <numbers>
#include <vector>

namespace finsler {

namespace {

struct Token {
    enum class Kind { number, ident, plus, minus, star, slash, caret, lparen, rparen, end };
    Kind kind;
    std::size_t offset;
    std::string_view text;
    double value = 0.0;
};

std::vector<Token> lex(std::string_view s) {
    std::vector<Token> out;
    std::size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
            ++i;
            continue;
        }
        if (c >= '0' && c <= '9') {
            std::size_t start = i;
            while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && s[i] >= '0' && s[i] <= '9') ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                // scientific exponent only when a digit (or signed digit) follows
                std::size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && s[j] >= '0' && s[j] <= '9') {
                    ++j;
                    while (j < s.size() && s[j] >= '0' && s[j] <= '9') ++j;
                    i = j;
                }
            }
            std::string_view text = s.substr(start, i - start);
            double v = 0.0;
            auto res = std::from_chars(text.data(), text.data() + text.size(), v);
            if (res.ec != std::errc()) throw SyntaxError("malformed number '" + std::string(text) + "'", start);
            out.push_back({Token::Kind::number, start, text, v});
            continue;
        }
        if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_') {
            std::size_t start = i;
            while (i < s.size() &&
                   ((s[i] >= 'a' && s[i] <= 'z') || (s[i] >= 'A' && s[i] <= 'Z') ||
                    (s[i] >= '0' && s[i] <= '9') || s[i] == '_'))
                ++i;
            out.push_back({Token::Kind::ident, start, s.substr(start, i - start)});
            continue;
        }
        Token::Kind k;
        switch (c) {
            case '+': k = Token::Kind::plus; break;
            case '-': k = Token::Kind::minus; break;
            case '*': k = Token::Kind::star; break;
            case '/': k = Token::Kind::slash; break;
            case '^': k = Token::Kind::caret; break;
            case '(': k = Token::Kind::lparen; break;
            case ')': k = Token::Kind::rparen; break;
            default:
                throw SyntaxError(std::string("unexpected character '") + c + "'", i);
        }
        out.push_back({k, i, s.substr(i, 1)});
        ++i;
    }
    out.push_back({Token::Kind::end, s.size(), {}});
    return out;
}

bool subtree_has_variable(const ScalarField::Node& n) {
    if (n.op == ScalarField::Node::Op::variable) return true;
    if (n.a && subtree_has_variable(*n.a)) return true;
    if (n.b && subtree_has_variable(*n.b)) return true;
    return false;
}

}  // namespace

struct ExprParser {
    using Node = ScalarField::Node;
    using NodePtr = ScalarField::NodePtr;
    using Op = Node::Op;

    const std::vector<Token>& toks;
    std::size_t pos = 0;
    int max_var = 0;

    const Token& peek() const { return toks[pos]; }
    const Token& next() { return toks[pos++]; }

    static std::shared_ptr<Node> make(Op op, NodePtr a = nullptr, NodePtr b = nullptr) {
        auto n = std::make_shared<Node>();
        n->op = op;
        n->a = std::move(a);
        n->b = std::move(b);
        return n;
    }

    NodePtr parse_expr() {
        NodePtr lhs = parse_term();
        while (peek().kind == Token::Kind::plus || peek().kind == Token::Kind::minus) {
            bool plus = next().kind == Token::Kind::plus;
            NodePtr rhs = parse_term();
            lhs = make(plus ? Op::add : Op::sub, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    NodePtr parse_term() {
        NodePtr lhs = parse_unary();
        while (peek().kind == Token::Kind::star || peek().kind == Token::Kind::slash) {
            bool mul = next().kind == Token::Kind::star;
            NodePtr rhs = parse_unary();
            lhs = make(mul ? Op::mul : Op::div, std::move(lhs), std::move(rhs));
        }
        return lhs;
    }

    NodePtr parse_unary() {
        if (peek().kind == Token::Kind::minus) {
            next();
            return make(Op::neg, parse_unary());
        }
        return parse_power();
    }

    NodePtr parse_power() {
        NodePtr base = parse_atom();
        if (peek().kind == Token::Kind::caret) {
            next();
            NodePtr ex = parse_unary();  // right-assoc, exponent may carry a sign
            auto n = make(Op::pow, std::move(base), std::move(ex));
            classify_exponent(*n);
            return n;
        }
        return base;
    }

    static void classify_exponent(Node& n) {
        if (subtree_has_variable(*n.b)) return;
        double v;
        try {
            v = ScalarField::eval_node<double>(*n.b, nullptr);
        } catch (const Error&) {
            return;
        }
        if (std::isfinite(v) && std::nearbyint(v) == v && std::abs(v) <= 1e9) {
            n.int_pow = true;
            n.exponent = static_cast<long long>(v);
        }
    }

    NodePtr parse_atom() {
        const Token& t = peek();
        switch (t.kind) {
            case Token::Kind::number: {
                next();
                auto n = make(Op::literal);
                n->value = t.value;
                return n;
            }
            case Token::Kind::lparen: {
                next();
                NodePtr inner = parse_expr();
                expect_rparen();
                return inner;
            }
            case Token::Kind::ident:
                return parse_ident();
            case Token::Kind::rparen:
                throw SyntaxError("unbalanced parenthesis", t.offset);
            case Token::Kind::end:
                throw SyntaxError("unexpected end of input, expected expression", t.offset);
            default:
                throw SyntaxError("expected expression", t.offset);
        }
    }

    void expect_rparen() {
        if (peek().kind != Token::Kind::rparen) {
            if (peek().kind == Token::Kind::end)
                throw SyntaxError("unbalanced parenthesis, expected ')'", peek().offset);
            throw SyntaxError("expected ')'", peek().offset);
        }
        next();
    }

    NodePtr parse_ident() {
        const Token t = next();
        std::string_view name = t.text;
        if (name == "pi" || name == "e") {
            auto n = make(Op::constant);
            n->value = (name == "pi") ? std::numbers::pi : std::numbers::e;
            n->cname = (name == "pi") ? "pi" : "e";
            return n;
        }
        Op fn;
        bool is_fn = true;
        if (name == "sin") fn = Op::sin;
        else if (name == "cos") fn = Op::cos;
        else if (name == "exp") fn = Op::exp;
        else if (name == "log") fn = Op::log;
        else if (name == "sqrt") fn = Op::sqrt;
        else if (name == "tanh") fn = Op::tanh;
        else is_fn = false;
        if (is_fn) {
            if (peek().kind != Token::Kind::lparen)
                throw SyntaxError("expected '(' after function name '" + std::string(name) + "'", peek().offset);
            next();
            if (peek().kind == Token::Kind::rparen)
                throw SyntaxError("empty argument list", peek().offset);
            NodePtr arg = parse_expr();
            expect_rparen();
            return make(fn, std::move(arg));
        }
        if (name.size() >= 2 && name[0] == 'x') {
            bool digits = true;
            for (std::size_t i = 1; i < name.size(); ++i)
                if (name[i] < '0' || name[i] > '9') digits = false;
            if (digits) {
                int idx = 0;
                auto res = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
                if (res.ec == std::errc() && idx >= 1) {
                    auto n = make(Op::variable);
                    n->var = idx - 1;
                    max_var = std::max(max_var, idx);
                    return n;
                }
            }
        }
        throw SyntaxError("unknown identifier '" + std::string(name) + "'", t.offset);
    }
};

ScalarField ScalarField::parse(std::string_view text) {
    if (text.empty()) throw SyntaxError("empty expression", 0);
    std::vector<Token> toks = lex(text);
    ExprParser p{toks};
    NodePtr root = p.parse_expr();
    const Token& t = p.peek();
    if (t.kind != Token::Kind::end) {
        if (t.kind == Token::Kind::rparen) throw SyntaxError("unbalanced parenthesis", t.offset);
        throw SyntaxError("unexpected trailing input", t.offset);
    }
    return ScalarField(std::move(root), p.max_var);
}

double ScalarField::derivative(const Vector& x, int i) const {
    if (i < 0 || i >= x.size()) throw DomainError("derivative index out of range");
    VectorT<Dual1> xd(x.size());
    for (int k = 0; k < x.size(); ++k) xd[k] = Dual1(x[k], k == i ? 1.0 : 0.0);
    return eval(xd).d;
}

double ScalarField::derivative(const Vector& x, int i, int j) const {
    if (i < 0 || i >= x.size() || j < 0 || j >= x.size())
        throw DomainError("derivative index out of range");
    VectorT<Dual2> xd(x.size());
    for (int k = 0; k < x.size(); ++k)
        xd[k] = Dual2(Dual1(x[k], k == i ? 1.0 : 0.0), Dual1(k == j ? 1.0 : 0.0, 0.0));
    return eval(xd).d.d;
}

namespace {

// precedence levels: add/sub 1, mul/div 2, neg 3, pow 4, atom 5
int node_prec(const ScalarField::Node& n) {
    using Op = ScalarField::Node::Op;
    switch (n.op) {
        case Op::add:
        case Op::sub: return 1;
        case Op::mul:
        case Op::div: return 2;
        case Op::neg: return 3;
        case Op::pow: return 4;
        default: return 5;
    }
}

std::string format_literal(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

void print_node(const ScalarField::Node& n, int min_prec, std::string& out) {
    using Op = ScalarField::Node::Op;
    int prec = node_prec(n);
    bool parens = prec < min_prec;
    if (parens) out += '(';
    switch (n.op) {
        case Op::literal: out += format_literal(n.value); break;
        case Op::constant: out += n.cname; break;
        case Op::variable: out += "x" + std::to_string(n.var + 1); break;
        case Op::neg:
            out += '-';
            print_node(*n.a, 3, out);
            break;
        case Op::add:
        case Op::sub:
            print_node(*n.a, 1, out);
            out += (n.op == Op::add) ? '+' : '-';
            print_node(*n.b, 2, out);
            break;
        case Op::mul:
        case Op::div:
            print_node(*n.a, 2, out);
            out += (n.op == Op::mul) ? '*' : '/';
            print_node(*n.b, 3, out);
            break;
        case Op::pow:
            print_node(*n.a, 5, out);
            out += '^';
            print_node(*n.b, 3, out);
            break;
        case Op::sin: out += "sin("; print_node(*n.a, 0, out); out += ')'; break;
        case Op::cos: out += "cos("; print_node(*n.a, 0, out); out += ')'; break;
        case Op::exp: out += "exp("; print_node(*n.a, 0, out); out += ')'; break;
        case Op::log: out += "log("; print_node(*n.a, 0, out); out += ')'; break;
        case Op::sqrt: out += "sqrt("; print_node(*n.a, 0, out); out += ')'; break;
        case Op::tanh: out += "tanh("; print_node(*n.a, 0, out); out += ')'; break;
    }
    if (parens) out += ')';
}

bool nodes_equal(const ScalarField::Node* a, const ScalarField::Node* b) {
    if (!a || !b) return a == b;
    if (a->op != b->op) return false;
    if (a->value != b->value) return false;
    if (a->var != b->var) return false;
    if (a->int_pow != b->int_pow || a->exponent != b->exponent) return false;
    return nodes_equal(a->a.get(), b->a.get()) && nodes_equal(a->b.get(), b->b.get());
}

}  // namespace

std::string ScalarField::to_string() const {
    if (!root_) return "";
    std::string out;
    print_node(*root_, 0, out);
    return out;
}

bool same_structure(const ScalarField& a, const ScalarField& b) {
    return nodes_equal(a.root_.get(), b.root_.get());
}

}  // namespace finsler
