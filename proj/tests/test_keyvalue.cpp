#include "scsplit/expression.hpp"
#include "scsplit/keyvalue.hpp"
#include "scsplit/numeric.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace scsplit;

TEST(KeyValue, SectionsCommentsAndData)
{
	const auto doc = KeyValueDocument::parse("# header\nname = x\n\n[run]\nT = 1\n  h=0.1  \n[output]\n1 2 3 4\n");
	EXPECT_EQ(doc.get("", "name"), "x");
	EXPECT_EQ(doc.get("run", "T"), "1");
	EXPECT_EQ(doc.get("run", "h"), "0.1");
	EXPECT_FALSE(doc.get("run", "name"));
	ASSERT_EQ(doc.data_lines().size(), 1u);
	EXPECT_EQ(doc.data_lines()[0].section, "output");
	EXPECT_EQ(doc.data_lines()[0].text, "1 2 3 4");
	EXPECT_EQ(doc.data_lines()[0].line, 8);
	ASSERT_EQ(doc.keys().size(), 3u);
	EXPECT_EQ(doc.keys()[1], std::make_pair(std::string("run"), std::string("T")));
	EXPECT_EQ(doc.sections(), (std::vector<std::string>{"run", "output"}));
}

TEST(KeyValue, ValueMayContainEquals)
{
	const auto doc = KeyValueDocument::parse("potential = x1^2 + 0*(1=1)\n");
	EXPECT_EQ(doc.get("", "potential"), "x1^2 + 0*(1=1)");
}

TEST(KeyValue, Errors)
{
	EXPECT_THROW(KeyValueDocument::parse("a=1\na=2\n"), ParseError);
	EXPECT_NO_THROW(KeyValueDocument::parse("a=1\n[s]\na=2\n"));
	EXPECT_THROW(KeyValueDocument::parse("[run\n"), ParseError);
	EXPECT_THROW(KeyValueDocument::parse("=3\n"), ParseError);
	EXPECT_THROW(KeyValueDocument::parse("a=1\n").require("run", "T"), ValidationError);
	EXPECT_THROW(KeyValueDocument::load("/nonexistent/file.cfg"), ValidationError);
}

TEST(Numbers, ParseReal)
{
	EXPECT_EQ(parse_real(" 0.25 "), 0.25);
	EXPECT_EQ(parse_real("-1e-3"), -1e-3);
	EXPECT_THROW(parse_real("1.0x"), ParseError);
	EXPECT_THROW(parse_real(""), ParseError);
}

TEST(Numbers, ParseComplex)
{
	EXPECT_EQ(parse_complex("0.5"), cplx(0.5, 0.0));
	EXPECT_EQ(parse_complex("i"), cplx(0.0, 1.0));
	EXPECT_EQ(parse_complex("-i"), cplx(0.0, -1.0));
	EXPECT_EQ(parse_complex("0.5i"), cplx(0.0, 0.5));
	EXPECT_EQ(parse_complex("0.5+0.25i"), cplx(0.5, 0.25));
	EXPECT_EQ(parse_complex("1e-3-2e-1i"), cplx(1e-3, -0.2));
	EXPECT_EQ(parse_complex("1e+2+i"), cplx(100.0, 1.0));
	EXPECT_EQ(parse_complex("2 - 3j"), cplx(2.0, -3.0));
	EXPECT_THROW(parse_complex("1+xi"), ParseError);
	EXPECT_THROW(parse_complex(""), ParseError);
}

TEST(Numbers, FormatRoundTrips)
{
	for(double v : {0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23})
	{
		EXPECT_EQ(parse_real(format_real(v)), v);
	}
	const cplx z(0.1, -1.0 / 7.0);
	EXPECT_EQ(parse_complex(format_complex(z)), z);
}

TEST(Expression, PrecedenceAndAssociativity)
{
	const std::array<double, 3> x{2.0, 3.0, 5.0};
	EXPECT_DOUBLE_EQ(Expression::parse("1 + 2 * 3")(x), 7.0);
	EXPECT_DOUBLE_EQ(Expression::parse("2^3^2")(x), 512.0);
	EXPECT_DOUBLE_EQ(Expression::parse("-x1^2")(x), -4.0);
	EXPECT_DOUBLE_EQ(Expression::parse("(1 - 2) - 3")(x), -4.0);
	EXPECT_DOUBLE_EQ(Expression::parse("8 / 4 / 2")(x), 1.0);
	EXPECT_DOUBLE_EQ(Expression::parse("x1*x2 + x3")(x), 11.0);
}

TEST(Expression, FunctionsAndConstants)
{
	const std::array<double, 3> x{0.5, 0.0, 0.0};
	EXPECT_DOUBLE_EQ(Expression::parse("exp(-x1^2)")(x), std::exp(-0.25));
	EXPECT_DOUBLE_EQ(Expression::parse("cos(pi*x1) + sin(pi*x1)")(x), std::cos(std::numbers::pi / 2) + 1.0);
	EXPECT_DOUBLE_EQ(Expression::parse("abs(-3)")(x), 3.0);
	EXPECT_DOUBLE_EQ(Expression::parse("5 - x1^2/2 + x1^4/80")(x), 5.0 - 0.125 + 0.0625 / 80.0);
	EXPECT_DOUBLE_EQ(Expression::parse("1.5e1")(x), 15.0);
}

TEST(Expression, Errors)
{
	EXPECT_THROW(Expression::parse("1 +"), ParseError);
	EXPECT_THROW(Expression::parse("(1"), ParseError);
	EXPECT_THROW(Expression::parse("x4"), ParseError);
	EXPECT_THROW(Expression::parse("tan(1)"), ParseError);
	EXPECT_THROW(Expression::parse("y"), ParseError);
	EXPECT_THROW(Expression::parse("1 2"), ParseError);
}
