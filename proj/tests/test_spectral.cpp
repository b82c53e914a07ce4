#include "common.hpp"

#include "scsplit/spectral.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

using namespace scsplit;
using testutil::Gen;

namespace
{

constexpr double pi = std::numbers::pi;

ProblemSpec make_spec(const GridPtr& g, cplx alpha, cplx beta, std::vector<double> v)
{
	return ProblemSpec(g, alpha, beta, std::move(v));
}

std::vector<double> constant(const GridPtr& g, double c)
{
	return std::vector<double>(g->size(), c);
}

} // namespace

TEST(Grid, GeometryAndValidation)
{
	const auto g = make_grid(10.0, 1, 8);
	EXPECT_EQ(g->size(), 8u);
	EXPECT_DOUBLE_EQ(g->spacing(), 2.5);
	EXPECT_DOUBLE_EQ(g->axis_coordinates()[0], -10.0);
	EXPECT_DOUBLE_EQ(g->axis_coordinates()[4], 0.0);
	EXPECT_EQ(make_grid(1.0, 3, 4)->size(), 64u);
	EXPECT_THROW(make_grid(10.0, 1, 7), ValidationError);
	EXPECT_THROW(make_grid(10.0, 4, 8), ValidationError);
	EXPECT_THROW(make_grid(0.0, 1, 8), ValidationError);
}

TEST(Grid, ModeOrdering)
{
	const auto g = make_grid(10.0, 1, 8);
	const std::vector<int> want = {0, 1, 2, 3, -4, -3, -2, -1};
	for(std::size_t k = 0; k < 8; ++k)
	{
		EXPECT_EQ(g->mode_index(k, 0), want[k]);
	}
}

TEST(Grid, LaplacianSymbol)
{
	const auto g = make_grid(10.0, 1, 16);
	const auto& l = laplacian_symbol(*g);
	EXPECT_EQ(l[0], 0.0);
	EXPECT_NEAR(l[1], -0.09869604401089358, 1e-15);
	EXPECT_DOUBLE_EQ(l[15], l[1]);
	for(double v : l)
	{
		EXPECT_LE(v, 0.0);
	}
	const auto g3 = make_grid(10.0, 3, 4);
	// flat index of m = (1, 1, 1) is 1*16 + 1*4 + 1
	EXPECT_NEAR(g3->laplacian_symbol()[21], -3.0 * pi * pi / 100.0, 1e-15);
}

TEST(Field, TransformRoundTripRandom)
{
	Gen gen(11);
	for(int d = 1; d <= 3; ++d)
	{
		const auto g = make_grid(gen.uniform(1, 10), d, d == 3 ? 8 : 32);
		for(int rep = 0; rep < 5; ++rep)
		{
			const Field u = gen.field(g);
			const Field back = u.spectral().nodal();
			EXPECT_LE(relative_distance(back, u), 1e-13);
			EXPECT_NEAR(u.spectral().norm(), u.norm(), 1e-13 * u.norm());
		}
	}
}

TEST(Field, SpectralCoefficientsOfACosine)
{
	const auto g = make_grid(10.0, 1, 16);
	Field u(g);
	for(std::size_t k = 0; k < u.size(); ++k)
	{
		u[k] = std::cos(pi * g->node(k)[0] / 10.0);
	}
	const Field s = u.spectral();
	// x_j = -a + ..., so the m = +-1 coefficients carry the factor exp(-+i pi) = -1
	EXPECT_NEAR(std::abs(s[1] + 0.5), 0.0, 1e-15);
	EXPECT_NEAR(std::abs(s[15] + 0.5), 0.0, 1e-15);
	EXPECT_NEAR(std::abs(s[0]), 0.0, 1e-15);
}

TEST(Field, NormsAndInnerProduct)
{
	const auto g = make_grid(10.0, 1, 256);
	const Field u = sample_gaussian(g, std::pow(pi, -0.25), 0.5);
	EXPECT_NEAR(u.l2_norm(), 1.0, 1e-12);
	EXPECT_NEAR(inner_product(u, u).real(), 1.0, 1e-12);
	EXPECT_NEAR(u.max_norm(), std::pow(pi, -0.25), 1e-15);
	EXPECT_EQ(u.imag_norm(), 0.0);
	Field v = cplx(0.0, 2.0) * u;
	EXPECT_NEAR(v.imag_norm(), 2.0 * u.norm(), 1e-13);
	EXPECT_NEAR(v.real_part().norm(), 0.0, 1e-15);
	EXPECT_THROW(u + Field(make_grid(10.0, 1, 128)), ValidationError);
}

TEST(Field, DumpRoundTrip)
{
	Gen gen(5);
	const auto g = make_grid(3.5, 2, 8);
	const Field u = gen.field(g);
	const auto path = std::filesystem::temp_directory_path() / "scsplit_field_dump.bin";
	write_field(u, path);
	EXPECT_EQ(std::filesystem::file_size(path), 8u * (3 + 2 * 64));
	const Field r = read_field(path);
	EXPECT_EQ(r.grid().dim(), 2);
	EXPECT_EQ(r.grid().modes(), 8);
	EXPECT_EQ(r.grid().half_width(), 3.5);
	for(std::size_t k = 0; k < u.size(); ++k)
	{
		EXPECT_EQ(r[k], u[k]);
	}
	// header is little-endian float64
	std::ifstream in(path, std::ios::binary);
	unsigned char b[8];
	in.read(reinterpret_cast<char*>(b), 8);
	EXPECT_EQ(b[7], 0x40); // 2.0 = 0x4000000000000000
	std::filesystem::remove(path);
}

TEST(FlowA, ZeroCoefficientIsIdentity)
{
	Gen gen(1);
	const auto g = make_grid(10.0, 1, 64);
	const auto spec = make_spec(g, 1.0, -1.0, sample_potential(*g, "quadratic"));
	const Field u = gen.field(g);
	EXPECT_LE(relative_distance(flow_A(u, 0.0, 0.3, spec), u), 1e-15);
	EXPECT_LE(relative_distance(flow_B(u, 0.0, 0.3, spec), u), 0.0);
}

TEST(FlowA, ConstantFieldUnchanged)
{
	const auto g = make_grid(10.0, 2, 16);
	const auto spec = make_spec(g, 1.0, 0.0, constant(g, 0.0));
	Field u(g);
	for(auto& v : u.values())
	{
		v = 3.0;
	}
	const Field w = flow_A(u, cplx(0.7, 0.3), 0.5, spec);
	EXPECT_LE(relative_distance(w, u), 1e-15);
}

TEST(FlowA, HeatFlowGaussian)
{
	// u_t = u_xx from exp(-x^2/2): u = exp(-x^2 / (2(1+2t))) / sqrt(1+2t)
	const auto g = make_grid(10.0, 1, 256);
	const auto spec = make_spec(g, 1.0, 0.0, constant(g, 0.0));
	const Field u0 = sample_gaussian(g, 1.0, 0.5);
	const double t = 0.1;
	const Field u = flow_A(u0, 1.0, t, spec);
	Field want(g);
	for(std::size_t k = 0; k < want.size(); ++k)
	{
		const double x = g->node(k)[0];
		want[k] = std::exp(-x * x / (2 * (1 + 2 * t))) / std::sqrt(1 + 2 * t);
	}
	EXPECT_LE(relative_distance(u, want), 1e-8);
	EXPECT_EQ(u.representation(), Representation::Nodal);
	EXPECT_EQ(flow_A(u0.spectral(), 1.0, t, spec).representation(), Representation::Spectral);
}

TEST(FlowA, SemigroupInTheCoefficient)
{
	Gen gen(3);
	const auto g = make_grid(5.0, 1, 64);
	const auto spec = make_spec(g, cplx(0.5, 0.2), -1.0, constant(g, 0.0));
	for(int rep = 0; rep < 10; ++rep)
	{
		const Field u = gen.field(g);
		const cplx c1(gen.uniform(0, 1), gen.uniform(-1, 1));
		const cplx c2(gen.uniform(0, 1), gen.uniform(-1, 1));
		const double h = gen.uniform(0.01, 0.2);
		const Field lhs = flow_A(flow_A(u, c2, h, spec), c1, h, spec);
		EXPECT_LE(relative_distance(lhs, flow_A(u, c1 + c2, h, spec)), 1e-13);
	}
}

TEST(FlowA, ContractiveForNonnegativeRealPart)
{
	Gen gen(4);
	const auto g = make_grid(10.0, 1, 128);
	for(int rep = 0; rep < 20; ++rep)
	{
		const cplx alpha = rep % 2 ? cplx(gen.uniform(0, 1), 0) : cplx(0, gen.uniform(-1, 1));
		const auto spec = make_spec(g, alpha, 0.0, constant(g, 0.0));
		const cplx c(gen.uniform(0, 1), gen.uniform(-1, 1));
		if((c * alpha).real() < 0)
		{
			continue;
		}
		const Field u = gen.field(g);
		EXPECT_LE(flow_A(u, c, gen.uniform(0.01, 1), spec).norm(), u.norm() * (1 + 1e-14));
	}
}

TEST(Flows, PreserveRealFields)
{
	Gen gen(8);
	const auto g = make_grid(10.0, 1, 64);
	const auto spec = make_spec(g, 0.5, -1.0, sample_potential(*g, "quartic"));
	const Field u = gen.field(g, true);
	EXPECT_LE(flow_A(u, 0.3, 0.1, spec).imag_norm(), 1e-15 * u.norm());
	EXPECT_EQ(flow_B(u, 0.3, 0.1, spec).imag_norm(), 0.0);
}

TEST(FlowB, ConstantPotentialScalesUniformly)
{
	Gen gen(2);
	const auto g = make_grid(10.0, 1, 32);
	const auto spec = make_spec(g, 1.0, -1.0, constant(g, 1.0));
	const Field u = gen.field(g);
	const double h = std::log(2.0);
	const Field w = flow_B(u, 1.0, h, spec);
	EXPECT_NEAR(w.norm(), 0.5 * u.norm(), 1e-15 * u.norm());
}

TEST(FlowB, QuarticCentreFactor)
{
	const auto g = make_grid(10.0, 1, 256);
	const auto v = sample_potential(*g, "quartic");
	EXPECT_EQ(v[128], 5.0);
	const auto spec = make_spec(g, 0.5, -1.0, v);
	Field u(g);
	for(auto& x : u.values())
	{
		x = 1.0;
	}
	const double h = 0.1;
	EXPECT_NEAR(flow_B(u, 1.0, h, spec)[128].real(), std::exp(-5 * h), 1e-16);
}

TEST(FlowB, OverflowNamesNodeAndExponent)
{
	const auto g = make_grid(10.0, 1, 16);
	const auto spec = make_spec(g, 1.0, 1.0, sample_potential(*g, "quadratic"));
	Field u(g);
	u[0] = 1.0;
	try
	{
		(void)flow_B(u, 1.0, 10.0, spec);
		FAIL();
	}
	catch(const OverflowError& e)
	{
		const std::string msg = e.what();
		EXPECT_NE(msg.find("node 0"), std::string::npos) << msg;
		EXPECT_NE(msg.find("exponent 1000"), std::string::npos) << msg;
	}
}

TEST(Potential, CatalogueExpressionAndFile)
{
	const auto g = make_grid(10.0, 2, 8);
	const auto q = sample_potential(*g, "quadratic");
	const auto h = sample_potential(*g, "harmonic");
	const auto e = sample_potential(*g, Expression::parse("x1^2 + x2^2"));
	for(std::size_t k = 0; k < q.size(); ++k)
	{
		EXPECT_DOUBLE_EQ(q[k], e[k]);
		EXPECT_DOUBLE_EQ(h[k], 0.5 * q[k]);
	}
	EXPECT_THROW(sample_potential(*g, "cubic"), ValidationError);
	const auto path = std::filesystem::temp_directory_path() / "scsplit_potential.txt";
	{
		std::ofstream out(path);
		out << "# double well\npotential = 5 - (x1^2 + x2^2)/2 + (x1^2 + x2^2)^2/80\n";
	}
	const auto f = sample_potential(*g, load_potential_file(path));
	const auto quartic = sample_potential(*g, "quartic");
	for(std::size_t k = 0; k < q.size(); ++k)
	{
		EXPECT_NEAR(f[k], quartic[k], 1e-12);
	}
	std::filesystem::remove(path);
}

TEST(Problem, RejectsNonFinitePotential)
{
	const auto g = make_grid(10.0, 1, 8);
	auto v = constant(g, 0.0);
	v[3] = std::nan("");
	EXPECT_THROW(make_spec(g, 1.0, 1.0, v), ValidationError);
	EXPECT_THROW(make_spec(g, 1.0, 1.0, std::vector<double>(4, 0.0)), ValidationError);
}

TEST(Gaussian, Examples)
{
	const auto g = make_grid(10.0, 1, 256);
	const Field u = sample_gaussian(g, std::pow(pi, -0.25), 0.5, {1.0, 0.0, 0.0});
	// node 141 sits at x = 1.015625
	const double x = g->node(141)[0];
	EXPECT_NEAR(u[141].real(), std::pow(pi, -0.25) * std::exp(-0.5 * (x - 1) * (x - 1)), 1e-16);
	EXPECT_EQ(sample_gaussian(g, 0.0, 0.5).norm(), 0.0);
	EXPECT_EQ(sample_gaussian(g, 1.0, 0.5)[128], 1.0);
	EXPECT_THROW(sample_gaussian(g, 1.0, 0.0), ValidationError);
}

TEST(Rayleigh, HarmonicGroundState)
{
	const auto g = make_grid(10.0, 1, 256);
	const auto spec = make_spec(g, 0.5, -1.0, sample_potential(*g, "harmonic"));
	const Field u = sample_gaussian(g, std::pow(pi, -0.25), 0.5);
	const cplx e = rayleigh_quotient(u, spec);
	EXPECT_NEAR(e.real(), -0.5, 1e-12);
	EXPECT_EQ(e.imag(), 0.0);
	// scale invariant
	EXPECT_NEAR(rayleigh_quotient(cplx(7.0) * u, spec).real(), e.real(), 1e-14);
}

TEST(Rayleigh, ConstantFieldGivesBetaV0)
{
	const auto g = make_grid(4.0, 2, 8);
	const auto spec = make_spec(g, cplx(0.3, 0.7), cplx(-2.0, 0.5), constant(g, 1.5));
	Field u(g);
	for(auto& v : u.values())
	{
		v = cplx(0.2, -0.1);
	}
	const cplx e = rayleigh_quotient(u, spec);
	EXPECT_NEAR(std::abs(e - cplx(-2.0, 0.5) * 1.5), 0.0, 1e-14);
	EXPECT_THROW(rayleigh_quotient(Field(g), spec), ValidationError);
}

TEST(Rayleigh, RealFieldsGiveRealValues)
{
	Gen gen(21);
	const auto g = make_grid(10.0, 1, 64);
	const auto spec = make_spec(g, 0.5, -1.0, sample_potential(*g, "quartic"));
	for(int rep = 0; rep < 10; ++rep)
	{
		const cplx e = rayleigh_quotient(gen.field(g, true), spec);
		EXPECT_LE(std::abs(e.imag()), 1e-12 * std::abs(e));
	}
}
