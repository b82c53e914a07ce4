#include "common.hpp"

#include "scsplit/matrix_lab.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

using namespace scsplit;
using testutil::Gen;

namespace
{

DenseModel random_model(std::uint64_t seed, int n, bool unit_norm = true)
{
	std::mt19937_64 rng(seed);
	const RealMatrix a = random_symmetric(n, rng, unit_norm);
	const RealMatrix b = random_symmetric(n, rng, unit_norm);
	return DenseModel(a, b);
}

double propagator_error(const DenseModel& m, const SplittingScheme& s, double h)
{
	return (scheme_propagator(m, s, h).matrix - exact_propagator(m, h).matrix).norm();
}

} // namespace

TEST(DenseModel, FromSpectralMatchesTheFlows)
{
	Gen gen(1);
	const auto g = make_grid(10.0, 1, 32);
	const ProblemSpec spec(g, 0.5, -1.0, sample_potential(*g, "quartic"));
	const auto m = from_spectral_1d(spec);
	EXPECT_EQ(m.dimension(), 32);
	EXPECT_LE((m.A() - m.A().transpose()).norm(), 1e-15);
	// constant vectors are in the kernel of the Laplacian
	EXPECT_LE((m.A() * RealVector::Ones(32)).norm(), 1e-12);
	for(int j = 0; j < 32; ++j)
	{
		EXPECT_EQ(m.B()(j, j), -spec.potential()[j]);
	}
	const Field u = gen.field(g);
	ComplexVector v(32);
	for(int j = 0; j < 32; ++j)
	{
		v[j] = u[j];
	}
	const double h = 0.1;
	const ComplexVector wa = m.eig_a().exp(h) * v;
	const ComplexVector wb = m.eig_b().exp(h) * v;
	const Field fa = flow_A(u, 1.0, h, spec);
	const Field fb = flow_B(u, 1.0, h, spec);
	for(int j = 0; j < 32; ++j)
	{
		EXPECT_NEAR(std::abs(wa[j] - fa[j]), 0.0, 1e-13);
		EXPECT_NEAR(std::abs(wb[j] - fb[j]), 0.0, 1e-13);
	}
}

TEST(DenseModel, Validation)
{
	EXPECT_THROW(DenseModel(RealMatrix::Identity(3, 3), RealMatrix::Identity(4, 4)), ValidationError);
	EXPECT_THROW(DenseModel(RealMatrix(0, 0), RealMatrix(0, 0)), ValidationError);
	const auto g2 = make_grid(10.0, 2, 8);
	EXPECT_THROW(from_spectral_1d(ProblemSpec(g2, 1.0, -1.0, std::vector<double>(64, 0.0))), ValidationError);
	const auto g = make_grid(10.0, 1, 8);
	EXPECT_THROW(from_spectral_1d(ProblemSpec(g, cplx(0, 1), -1.0, std::vector<double>(8, 0.0))), ValidationError);
}

TEST(Propagators, ExactMatchesTaylorOracle)
{
	for(std::uint64_t seed = 1; seed <= 5; ++seed)
	{
		const auto m = random_model(seed, 8, false);
		for(double t : {0.1, 1.0, 3.0})
		{
			const ComplexMatrix want = testutil::expm_taylor(t * m.sum().cast<cplx>());
			const ComplexMatrix got = exact_propagator(m, t).matrix;
			EXPECT_LE((got - want).norm() / want.norm(), 1e-11) << seed << " " << t;
		}
	}
}

TEST(Propagators, SchemeProductMatchesTaylorFactors)
{
	const auto m = random_model(9, 6);
	const auto s = builtin("sc-3-3");
	const double h = 0.3;
	ComplexMatrix want = ComplexMatrix::Identity(6, 6);
	for(const auto& f : s.flows())
	{
		const RealMatrix& x = f.kind == FlowKind::A ? m.A() : m.B();
		want = testutil::expm_taylor(f.coeff * h * x.cast<cplx>()) * want;
	}
	EXPECT_LE((scheme_propagator(m, s, h).matrix - want).norm(), 1e-12);
}

TEST(Propagators, CommutingPairIsExact)
{
	RealMatrix a = RealMatrix::Zero(5, 5);
	RealMatrix b = RealMatrix::Zero(5, 5);
	for(int i = 0; i < 5; ++i)
	{
		a(i, i) = -i;
		b(i, i) = 0.5 * i - 1;
	}
	const DenseModel m(a, b);
	for(const auto& name : builtin_names())
	{
		EXPECT_LE(propagator_error(m, builtin(name), 0.5), 1e-13) << name;
	}
}

TEST(Propagators, StrangLocalErrorIsThirdOrder)
{
	const auto m = random_model(3, 10);
	std::vector<double> h = {0.2, 0.1, 0.05, 0.025};
	std::vector<double> e;
	for(double x : h)
	{
		e.push_back(propagator_error(m, builtin("strang"), x));
	}
	EXPECT_NEAR(testutil::loglog_slope(h, e), 3.0, 0.1);
}

TEST(Defect, SymmetricConjugateSchemesAreSelfAdjoint)
{
	for(std::uint64_t seed = 1; seed <= 10; ++seed)
	{
		const auto m = random_model(seed, 12);
		for(const char* name : {"strang", "sc-3-3", "sc-4-4", "sc-6"})
		{
			EXPECT_LE(selfadjointness_defect(scheme_propagator(m, builtin(name), 0.2)), 1e-12) << name << " " << seed;
		}
		EXPECT_LE(selfadjointness_defect(exact_propagator(m, 0.2)), 1e-13);
	}
}

TEST(Defect, ComplexSymmetricDefectIsFifthOrder)
{
	const auto m = random_model(4, 12, false);
	std::vector<double> h = {0.2, 0.1, 0.05};
	std::vector<double> e;
	for(double x : h)
	{
		e.push_back(selfadjointness_defect(scheme_propagator(m, builtin("cs-4-4"), x)));
	}
	EXPECT_GT(e[0], 1e-6);
	EXPECT_NEAR(testutil::loglog_slope(h, e), 5.0, 0.4);
}

TEST(EffectiveHamiltonian, ExactPropagatorRecoversTheGenerator)
{
	const auto m = random_model(5, 8);
	const double h = 0.5;
	const ComplexMatrix hh = effective_hamiltonian(exact_propagator(m, h), h);
	EXPECT_LE((hh - m.sum().cast<cplx>()).norm(), 1e-12);
	const auto parts = decompose_defect(hh, m);
	EXPECT_LE(parts.defect_norm, 1e-12);
}

TEST(EffectiveHamiltonian, SymmetricConjugateDefectStructure)
{
	const auto m = random_model(6, 8);
	for(const char* name : {"sc-3-3", "sc-4-4"})
	{
		const auto s = builtin(name);
		const ComplexMatrix hh = effective_hamiltonian(scheme_propagator(m, s, 0.1), 0.1);
		EXPECT_LE((hh - hh.adjoint()).norm(), 1e-10) << name;
		const auto parts = decompose_defect(hh, m);
		EXPECT_LE(parts.cross_residual, 1e-10) << name;
		EXPECT_GT(parts.defect_norm, 0.0);
		// order p: defect of size h^p
		EXPECT_LE(parts.defect_norm, 10 * std::pow(0.1, s.order())) << name;
	}
}

TEST(EffectiveHamiltonian, LogarithmFailures)
{
	ComplexMatrix p = ComplexMatrix::Identity(2, 2);
	p(0, 0) = -1.0;
	EXPECT_THROW(effective_hamiltonian(p, 1.0), LogarithmError);
	EXPECT_THROW(effective_hamiltonian(ComplexMatrix::Identity(2, 2), 0.0), ValidationError);
}

TEST(Dominant, DiagonalExample)
{
	RealMatrix a = RealMatrix::Zero(3, 3);
	a(0, 0) = -1;
	a(1, 1) = -2;
	a(2, 2) = -3;
	const auto d = dominant_eigenpair(DenseModel(a, RealMatrix::Zero(3, 3)));
	EXPECT_DOUBLE_EQ(d.e0, -1.0);
	EXPECT_DOUBLE_EQ(d.gap, 1.0);
	EXPECT_FALSE(d.near_degenerate);
	EXPECT_NEAR(d.v0[0], 1.0, 1e-15);
	EXPECT_NEAR(d.v0.tail(2).norm(), 0.0, 1e-15);
}

TEST(Dominant, HarmonicOscillator)
{
	const auto g = make_grid(10.0, 1, 128);
	const ProblemSpec spec(g, 0.5, -1.0, sample_potential(*g, "harmonic"));
	const auto d = dominant_eigenpair(from_spectral_1d(spec));
	EXPECT_NEAR(d.e0, -0.5, 1e-10);
	EXPECT_NEAR(d.gap, 1.0, 1e-8);
	// ground state is a positive Gaussian
	Eigen::Index imax = 0;
	d.v0.maxCoeff(&imax);
	EXPECT_EQ(imax, 64);
	EXPECT_GT(d.v0.minCoeff(), -1e-12);
}

TEST(ImaginaryDynamics, StrangHasNoImaginaryPart)
{
	const auto m = random_model(7, 16);
	const RealVector u0 = RealVector::Ones(16).normalized();
	const auto s = imaginary_dynamics(m, builtin("strang"), 0.25, u0, 40);
	ASSERT_EQ(s.relimag.size(), 41u);
	for(double r : s.relimag)
	{
		EXPECT_EQ(r, 0.0);
	}
	EXPECT_FALSE(s.truncated);
}

TEST(ImaginaryDynamics, SymmetricConjugateStaysBounded)
{
	const auto m = random_model(7, 16);
	const RealVector u0 = RealVector::Ones(16).normalized();
	const double h = 0.25;
	for(const char* name : {"sc-3-3", "sc-4-4"})
	{
		const auto a = imaginary_dynamics(m, builtin(name), h, u0, 200);
		const auto b = imaginary_dynamics(m, builtin(name), h, u0, 400);
		const double ma = *std::max_element(a.relimag.begin(), a.relimag.end());
		const double mb = *std::max_element(b.relimag.begin(), b.relimag.end());
		EXPECT_GT(ma, 0.0) << name;
		EXPECT_LE(mb, 1.1 * ma) << name;
	}
}

TEST(RandomSymmetric, UnitSpectralNorm)
{
	std::mt19937_64 rng(1);
	const RealMatrix s = random_symmetric(20, rng);
	EXPECT_LE((s - s.transpose()).norm(), 0.0);
	const auto e = SymmetricEigen::of(s);
	EXPECT_NEAR(e.values.cwiseAbs().maxCoeff(), 1.0, 1e-14);
}

TEST(WriteMatrix, DumpLayout)
{
	const auto path = std::filesystem::temp_directory_path() / "scsplit_matrix.bin";
	ComplexMatrix p(3, 3);
	for(int i = 0; i < 3; ++i)
	{
		for(int j = 0; j < 3; ++j)
		{
			p(i, j) = cplx(i, j);
		}
	}
	write_matrix(p, path);
	EXPECT_EQ(std::filesystem::file_size(path), 8u * (3 + 18));
	std::ifstream in(path, std::ios::binary);
	EXPECT_EQ(detail::read_le_double(in), 2.0);
	EXPECT_EQ(detail::read_le_double(in), 3.0);
	EXPECT_EQ(detail::read_le_double(in), 0.0);
	in.seekg(8 * (3 + 2 * (1 * 3 + 2)));
	EXPECT_EQ(detail::read_le_double(in), 1.0);
	EXPECT_EQ(detail::read_le_double(in), 2.0);
	in.close();
	std::filesystem::remove(path);
}
