#include "tmbumps/expr.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <memory>
#include <vector>

#include "tmbumps/errors.hpp"

namespace tmbumps::expr {

namespace {

struct Node {
    virtual ~Node() = default;
    virtual double eval(double x, double y) const = 0;
};
using NodePtr = std::shared_ptr<const Node>;

struct Const : Node {
    double v;
    explicit Const(double v_) : v(v_) {}
    double eval(double, double) const override { return v; }
};

struct Var : Node {
    bool is_x;
    explicit Var(bool x_) : is_x(x_) {}
    double eval(double x, double y) const override { return is_x ? x : y; }
};

struct Unary : Node {
    double (*fn)(double);
    NodePtr arg;
    Unary(double (*f)(double), NodePtr a) : fn(f), arg(std::move(a)) {}
    double eval(double x, double y) const override { return fn(arg->eval(x, y)); }
};

struct Binary : Node {
    char op;
    NodePtr lhs, rhs;
    Binary(char o, NodePtr l, NodePtr r) : op(o), lhs(std::move(l)), rhs(std::move(r)) {}
    double eval(double x, double y) const override {
        const double a = lhs->eval(x, y), b = rhs->eval(x, y);
        switch (op) {
            case '+': return a + b;
            case '-': return a - b;
            case '*': return a * b;
            case '/': return a / b;
            default: return std::pow(a, b);
        }
    }
};

struct Parser {
    const std::string& s;
    std::size_t pos = 0;

    explicit Parser(const std::string& src) : s(src) {}

    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }

    bool accept(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw Error("expression: " + msg + " at position " + std::to_string(pos));
    }

    NodePtr parse() {
        NodePtr e = sum();
        skip();
        if (pos != s.size()) fail("trailing input");
        return e;
    }

    NodePtr sum() {
        NodePtr lhs = product();
        for (;;) {
            if (accept('+')) lhs = std::make_shared<Binary>('+', lhs, product());
            else if (accept('-')) lhs = std::make_shared<Binary>('-', lhs, product());
            else return lhs;
        }
    }

    NodePtr product() {
        NodePtr lhs = power();
        for (;;) {
            if (accept('*')) lhs = std::make_shared<Binary>('*', lhs, power());
            else if (accept('/')) lhs = std::make_shared<Binary>('/', lhs, power());
            else return lhs;
        }
    }

    NodePtr power() {  // right associative
        NodePtr base = unary();
        if (accept('^')) return std::make_shared<Binary>('^', base, power());
        return base;
    }

    NodePtr unary() {
        if (accept('-')) return std::make_shared<Binary>('-', std::make_shared<Const>(0.0), unary());
        if (accept('+')) return unary();
        return atom();
    }

    NodePtr atom() {
        skip();
        if (pos >= s.size()) fail("unexpected end of input");
        const char c = s[pos];
        if (c == '(') {
            ++pos;
            NodePtr e = sum();
            if (!accept(')')) fail("expected ')'");
            return e;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            char* end = nullptr;
            const double v = std::strtod(s.c_str() + pos, &end);
            if (end == s.c_str() + pos) fail("bad number");
            pos = static_cast<std::size_t>(end - s.c_str());
            return std::make_shared<Const>(v);
        }
        if (std::isalpha(static_cast<unsigned char>(c))) {
            std::size_t start = pos;
            while (pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos]))) ++pos;
            const std::string name = s.substr(start, pos - start);
            if (name == "x") return std::make_shared<Var>(true);
            if (name == "y") return std::make_shared<Var>(false);
            if (name == "pi") return std::make_shared<Const>(M_PI);
            if (name == "e") return std::make_shared<Const>(M_E);
            double (*fn)(double) = nullptr;
            if (name == "exp") fn = std::exp;
            else if (name == "log") fn = std::log;
            else if (name == "sin") fn = std::sin;
            else if (name == "cos") fn = std::cos;
            else if (name == "sqrt") fn = std::sqrt;
            else if (name == "tanh") fn = std::tanh;
            else if (name == "abs") fn = std::fabs;
            if (!fn) fail("unknown identifier '" + name + "'");
            if (!accept('(')) fail("expected '(' after function name");
            NodePtr arg = sum();
            if (!accept(')')) fail("expected ')'");
            return std::make_shared<Unary>(fn, arg);
        }
        fail(std::string("unexpected character '") + c + "'");
    }
};

}  // namespace

std::function<double(double, double)> compile(const std::string& source) {
    Parser p(source);
    NodePtr root = p.parse();
    return [root](double x, double y) { return root->eval(x, y); };
}

}  // namespace tmbumps::expr
