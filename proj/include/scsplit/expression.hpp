#pragma once

#include "error.hpp"
#include "numeric.hpp"

#include <array>
#include <cctype>
#include <cmath>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <vector>

namespace scsplit
{

/// Real arithmetic over x1, x2, x3 and pi: + - * / ^, unary minus,
/// parentheses, exp cos sin abs. `^` binds tighter than unary minus and
/// associates to the right.
class Expression
{
public:
	static Expression parse(std::string_view text)
	{
		Parser p{text, 0};
		Expression e;
		e.root_ = p.expr();
		p.skip_space();
		if(p.pos != text.size())
		{
			throw ParseError("unexpected '" + std::string(text.substr(p.pos, 1)) + "' at position " +
				std::to_string(p.pos) + " in '" + std::string(text) + "'");
		}
		e.text_ = std::string(text);
		return e;
	}

	[[nodiscard]] double operator()(const std::array<double, 3>& x) const { return eval(*root_, x); }
	[[nodiscard]] const std::string& text() const { return text_; }

private:
	struct Node
	{
		char op = 0; // '#' number, 'x' variable, 'f' function, '~' negate, or a binary operator
		double value = 0.0;
		int index = 0;
		std::string func;
		std::shared_ptr<const Node> lhs;
		std::shared_ptr<const Node> rhs;
	};
	using NodePtr = std::shared_ptr<const Node>;

	struct Parser
	{
		std::string_view s;
		std::size_t pos;

		void skip_space()
		{
			while(pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
			{
				++pos;
			}
		}

		bool accept(char c)
		{
			skip_space();
			if(pos < s.size() && s[pos] == c)
			{
				++pos;
				return true;
			}
			return false;
		}

		static NodePtr binary(char op, NodePtr l, NodePtr r)
		{
			auto n = std::make_shared<Node>();
			n->op = op;
			n->lhs = std::move(l);
			n->rhs = std::move(r);
			return n;
		}

		NodePtr expr()
		{
			auto lhs = term();
			for(;;)
			{
				if(accept('+'))
				{
					lhs = binary('+', lhs, term());
				}
				else if(accept('-'))
				{
					lhs = binary('-', lhs, term());
				}
				else
				{
					return lhs;
				}
			}
		}

		NodePtr term()
		{
			auto lhs = unary();
			for(;;)
			{
				if(accept('*'))
				{
					lhs = binary('*', lhs, unary());
				}
				else if(accept('/'))
				{
					lhs = binary('/', lhs, unary());
				}
				else
				{
					return lhs;
				}
			}
		}

		NodePtr unary()
		{
			if(accept('-'))
			{
				return binary('~', unary(), nullptr);
			}
			if(accept('+'))
			{
				return unary();
			}
			return power();
		}

		NodePtr power()
		{
			auto base = primary();
			if(accept('^'))
			{
				return binary('^', base, unary());
			}
			return base;
		}

		NodePtr primary()
		{
			skip_space();
			if(pos >= s.size())
			{
				throw ParseError("unexpected end of expression '" + std::string(s) + "'");
			}
			if(accept('('))
			{
				auto inner = expr();
				if(!accept(')'))
				{
					throw ParseError("missing ')' in '" + std::string(s) + "'");
				}
				return inner;
			}
			const char c = s[pos];
			if(std::isdigit(static_cast<unsigned char>(c)) || c == '.')
			{
				const std::string rest(s.substr(pos));
				char* end = nullptr;
				const double v = std::strtod(rest.c_str(), &end);
				if(end == rest.c_str())
				{
					throw ParseError("bad number in '" + std::string(s) + "'");
				}
				pos += static_cast<std::size_t>(end - rest.c_str());
				auto n = std::make_shared<Node>();
				n->op = '#';
				n->value = v;
				return n;
			}
			if(std::isalpha(static_cast<unsigned char>(c)))
			{
				std::size_t start = pos;
				while(pos < s.size() && std::isalnum(static_cast<unsigned char>(s[pos])))
				{
					++pos;
				}
				const std::string name(s.substr(start, pos - start));
				auto n = std::make_shared<Node>();
				if(name == "pi")
				{
					n->op = '#';
					n->value = std::numbers::pi;
					return n;
				}
				if(name == "x1" || name == "x2" || name == "x3")
				{
					n->op = 'x';
					n->index = name[1] - '1';
					return n;
				}
				if(name == "exp" || name == "cos" || name == "sin" || name == "abs")
				{
					if(!accept('('))
					{
						throw ParseError("expected '(' after " + name);
					}
					n->op = 'f';
					n->func = name;
					n->lhs = expr();
					if(!accept(')'))
					{
						throw ParseError("missing ')' after argument of " + name);
					}
					return n;
				}
				throw ParseError("unknown name '" + name + "' in '" + std::string(s) + "'");
			}
			throw ParseError("unexpected '" + std::string(1, c) + "' in '" + std::string(s) + "'");
		}
	};

	static double eval(const Node& n, const std::array<double, 3>& x)
	{
		switch(n.op)
		{
		case '#': return n.value;
		case 'x': return x[n.index];
		case '~': return -eval(*n.lhs, x);
		case '+': return eval(*n.lhs, x) + eval(*n.rhs, x);
		case '-': return eval(*n.lhs, x) - eval(*n.rhs, x);
		case '*': return eval(*n.lhs, x) * eval(*n.rhs, x);
		case '/': return eval(*n.lhs, x) / eval(*n.rhs, x);
		case '^': return std::pow(eval(*n.lhs, x), eval(*n.rhs, x));
		case 'f':
		{
			const double v = eval(*n.lhs, x);
			if(n.func == "exp")
			{
				return std::exp(v);
			}
			if(n.func == "cos")
			{
				return std::cos(v);
			}
			if(n.func == "sin")
			{
				return std::sin(v);
			}
			return std::abs(v);
		}
		}
		return 0.0;
	}

	NodePtr root_;
	std::string text_;
};

} // namespace scsplit
