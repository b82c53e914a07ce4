#pragma once

#include "error.hpp"
#include "field.hpp"
#include "numeric.hpp"
#include "scheme.hpp"
#include "spectral.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace scsplit
{

using RealMatrix = Eigen::MatrixXd;
using ComplexMatrix = Eigen::MatrixXcd;
using RealVector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;

/// Orthogonal eigendecomposition S = Q diag(lambda) Q^T.
struct SymmetricEigen
{
	RealMatrix vectors;
	RealVector values;

	static SymmetricEigen of(const RealMatrix& s)
	{
		Eigen::SelfAdjointEigenSolver<RealMatrix> es(s);
		if(es.info() != Eigen::Success)
		{
			throw NumericalError("symmetric eigensolver did not converge");
		}
		return {es.eigenvectors(), es.eigenvalues()};
	}

	/// Q diag(exp(c lambda)) Q^T
	[[nodiscard]] ComplexMatrix exp(cplx c) const
	{
		ComplexVector e(values.size());
		for(Eigen::Index k = 0; k < values.size(); ++k)
		{
			e[k] = std::exp(c * values[k]);
		}
		const ComplexMatrix q = vectors.cast<cplx>();
		return q * e.asDiagonal() * q.transpose();
	}
};

/// Pair of real symmetric matrices with cached eigendecompositions of A, B and A + B.
class DenseModel
{
public:
	DenseModel(const RealMatrix& a, const RealMatrix& b)
	{
		if(a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows() || a.rows() == 0)
		{
			throw ValidationError("dense model needs two square matrices of the same nonzero size");
		}
		if(!a.allFinite() || !b.allFinite())
		{
			throw ValidationError("dense model matrices must be finite");
		}
		a_ = 0.5 * (a + a.transpose());
		b_ = 0.5 * (b + b.transpose());
		eig_a_ = SymmetricEigen::of(a_);
		eig_b_ = SymmetricEigen::of(b_);
		eig_sum_ = SymmetricEigen::of(a_ + b_);
	}

	[[nodiscard]] Eigen::Index dimension() const { return a_.rows(); }
	[[nodiscard]] const RealMatrix& A() const { return a_; }
	[[nodiscard]] const RealMatrix& B() const { return b_; }
	[[nodiscard]] RealMatrix sum() const { return a_ + b_; }
	[[nodiscard]] const SymmetricEigen& eig_a() const { return eig_a_; }
	[[nodiscard]] const SymmetricEigen& eig_b() const { return eig_b_; }
	[[nodiscard]] const SymmetricEigen& eig_sum() const { return eig_sum_; }

private:
	RealMatrix a_;
	RealMatrix b_;
	SymmetricEigen eig_a_;
	SymmetricEigen eig_b_;
	SymmetricEigen eig_sum_;
};

/// Dense matrix of the pseudospectral operators: A = alpha F^-1 diag(lambda) F
/// in node space, B = diag(beta V). Real alpha and beta, d = 1 only.
inline DenseModel from_spectral_1d(const ProblemSpec& spec)
{
	const auto& g = spec.grid();
	if(g.dim() != 1)
	{
		throw ValidationError("dense model needs a one-dimensional grid");
	}
	if(g.modes() > 512)
	{
		throw ValidationError("dense model is limited to M <= 512");
	}
	if(!spec.is_real())
	{
		throw ValidationError("dense model needs real alpha and beta");
	}
	const int m = g.modes();
	const double alpha = spec.alpha().real();
	const double beta = spec.beta().real();
	const auto& lambda = g.laplacian_symbol();
	// A_jk depends on (j - k) mod M only
	std::vector<double> column(m, 0.0);
	for(int r = 0; r < m; ++r)
	{
		double s = 0.0;
		for(int k = 0; k < m; ++k)
		{
			s += lambda[k] * std::cos(2.0 * std::numbers::pi * static_cast<double>(k) * r / m);
		}
		column[r] = alpha * s / m;
	}
	RealMatrix a(m, m);
	RealMatrix b = RealMatrix::Zero(m, m);
	for(int j = 0; j < m; ++j)
	{
		for(int k = 0; k < m; ++k)
		{
			a(j, k) = column[((j - k) % m + m) % m];
		}
		b(j, j) = beta * spec.potential()[j];
	}
	return DenseModel(a, b);
}

enum class PropagatorKind
{
	Exact,
	Scheme
};

struct Propagator
{
	ComplexMatrix matrix;
	PropagatorKind kind = PropagatorKind::Exact;
	std::string scheme; // empty for exact propagators
	double h = 0.0;
};

inline Propagator exact_propagator(const DenseModel& model, double t)
{
	return {model.eig_sum().exp(t), PropagatorKind::Exact, {}, t};
}

/// e^{b_s h B} e^{a_s h A} ... e^{b_1 h B} e^{a_1 h A}
inline Propagator scheme_propagator(const DenseModel& model, const SplittingScheme& scheme, double h)
{
	if(!(h > 0.0))
	{
		throw ValidationError("scheme propagator needs h > 0");
	}
	const auto n = model.dimension();
	ComplexMatrix p = ComplexMatrix::Identity(n, n);
	std::size_t pair = 0;
	for(const auto& f : scheme.flows())
	{
		if(f.kind == FlowKind::A || pair == 0)
		{
			++pair;
		}
		const auto& eig = f.kind == FlowKind::A ? model.eig_a() : model.eig_b();
		const ComplexMatrix factor = eig.exp(f.coeff * h);
		if(!factor.allFinite())
		{
			throw InstabilityError("factor exp(" + format_complex(f.coeff) + " h " + (f.kind == FlowKind::A ? "A" : "B") +
				") of stage " + std::to_string(pair) + " overflows", pair);
		}
		p = factor * p;
	}
	if(!p.allFinite())
	{
		throw InstabilityError("scheme propagator overflows", pair);
	}
	return {std::move(p), PropagatorKind::Scheme, scheme.name(), h};
}

/// ||P - P^*||_F / ||P||_F
inline double selfadjointness_defect(const ComplexMatrix& p)
{
	return (p - p.adjoint()).norm() / p.norm();
}

inline double selfadjointness_defect(const Propagator& p)
{
	return selfadjointness_defect(p.matrix);
}

/// H = log(P)/h on the principal branch.
inline ComplexMatrix effective_hamiltonian(const ComplexMatrix& p, double h)
{
	if(!(h > 0.0))
	{
		throw ValidationError("effective Hamiltonian needs h > 0");
	}
	if(selfadjointness_defect(p) <= 1e-10)
	{
		const ComplexMatrix herm = 0.5 * (p + p.adjoint());
		Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(herm);
		if(es.info() != Eigen::Success)
		{
			throw LogarithmError("Hermitian eigensolver did not converge");
		}
		const RealVector& ev = es.eigenvalues();
		if(ev.minCoeff() <= 0.0)
		{
			throw LogarithmError("propagator has a nonpositive eigenvalue " + format_real(ev.minCoeff()));
		}
		ComplexVector l(ev.size());
		for(Eigen::Index k = 0; k < ev.size(); ++k)
		{
			l[k] = std::log(ev[k]) / h;
		}
		return es.eigenvectors() * l.asDiagonal() * es.eigenvectors().adjoint();
	}
	Eigen::ComplexEigenSolver<ComplexMatrix> es(p);
	if(es.info() != Eigen::Success)
	{
		throw LogarithmError("eigensolver did not converge");
	}
	const ComplexMatrix& v = es.eigenvectors();
	const Eigen::JacobiSVD<ComplexMatrix> svd(v);
	const auto& sv = svd.singularValues();
	const double cond = sv[0] / sv[sv.size() - 1];
	if(!(cond <= 1e8))
	{
		throw LogarithmError("eigenvector matrix is ill conditioned (" + format_real(cond) + ")");
	}
	ComplexVector l(es.eigenvalues().size());
	for(Eigen::Index k = 0; k < l.size(); ++k)
	{
		const cplx z = es.eigenvalues()[k];
		if(z.real() <= 0.0 && std::abs(z.imag()) <= 1e-14 * std::abs(z))
		{
			throw LogarithmError("eigenvalue " + format_complex(z) + " lies on the branch cut");
		}
		l[k] = std::log(z) / h;
	}
	return v * l.asDiagonal() * v.inverse();
}

inline ComplexMatrix effective_hamiltonian(const Propagator& p, double h)
{
	return effective_hamiltonian(p.matrix, h);
}

/// D = H - (A + B) split into the parts that the symmetric-conjugate structure allows.
struct DefectParts
{
	RealMatrix sym_part;  // (Re D + Re D^T)/2
	RealMatrix skew_part; // (Im D - Im D^T)/2
	double cross_residual = 0.0; // ||(Re D - Re D^T)/2|| + ||(Im D + Im D^T)/2||
	double defect_norm = 0.0;    // ||D||
};

inline DefectParts decompose_defect(const ComplexMatrix& h, const DenseModel& model)
{
	const ComplexMatrix d = h - model.sum().cast<cplx>();
	const RealMatrix re = d.real();
	const RealMatrix im = d.imag();
	DefectParts out;
	out.sym_part = 0.5 * (re + re.transpose());
	out.skew_part = 0.5 * (im - im.transpose());
	out.cross_residual = (0.5 * (re - re.transpose())).norm() + (0.5 * (im + im.transpose())).norm();
	out.defect_norm = d.norm();
	return out;
}

struct DominantEigenpair
{
	double e0 = 0.0;
	RealVector v0;
	double gap = 0.0;          // E0 - E1
	bool near_degenerate = false; // gap below 1e-10
};

/// Largest eigenvalue of A + B and its unit eigenvector, largest-magnitude entry positive.
inline DominantEigenpair dominant_eigenpair(const DenseModel& model)
{
	const auto& eig = model.eig_sum();
	const auto n = eig.values.size();
	DominantEigenpair out;
	out.e0 = eig.values[n - 1];
	out.v0 = eig.vectors.col(n - 1).normalized();
	Eigen::Index imax = 0;
	out.v0.cwiseAbs().maxCoeff(&imax);
	if(out.v0[imax] < 0.0)
	{
		out.v0 = -out.v0;
	}
	out.gap = n > 1 ? out.e0 - eig.values[n - 2] : std::numeric_limits<double>::infinity();
	out.near_degenerate = out.gap < 1e-10;
	return out;
}

struct ImaginarySeries
{
	std::vector<double> relimag;    // ||Im u_n|| / ||u_n||, n = 0..N
	std::vector<double> energy_err; // |E0 - Re(u_n)^T (A+B) Re(u_n)| / |E0| with Re(u_n) normalised
	double e0 = 0.0;
	bool truncated = false;

	void write_csv(std::ostream& out) const
	{
		out << "n,relimag,energy_err\n";
		for(std::size_t n = 0; n < relimag.size(); ++n)
		{
			out << n << "," << format_real(relimag[n]) << "," << format_real(energy_err[n]) << "\n";
		}
	}
};

/// Iterates u_n = S_h u_{n-1} with renormalisation (which does not change
/// either recorded ratio).
inline ImaginarySeries imaginary_dynamics(const DenseModel& model, const SplittingScheme& scheme, double h, const RealVector& u0,
	std::size_t steps)
{
	const auto p = scheme_propagator(model, scheme, h).matrix;
	const RealMatrix s = model.sum();
	ImaginarySeries out;
	out.e0 = dominant_eigenpair(model).e0;
	ComplexVector u = u0.cast<cplx>();
	for(std::size_t n = 0; n <= steps; ++n)
	{
		if(n > 0)
		{
			u = p * u;
			const double norm = u.norm();
			if(!std::isfinite(norm) || norm == 0.0)
			{
				out.truncated = true;
				break;
			}
			u /= norm;
		}
		const RealVector re = u.real();
		const double rn = re.norm();
		const double energy = rn > 0.0 ? re.dot(s * re) / (rn * rn) : std::numeric_limits<double>::quiet_NaN();
		out.relimag.push_back(u.imag().norm() / u.norm());
		out.energy_err.push_back(std::abs(out.e0 - energy) / std::abs(out.e0));
	}
	return out;
}

/// Entries uniform on [-1, 1], symmetrised; rescaled to unit spectral norm when asked.
inline RealMatrix random_symmetric(Eigen::Index n, std::mt19937_64& rng, bool unit_norm = true)
{
	std::uniform_real_distribution<double> dist(-1.0, 1.0);
	RealMatrix x(n, n);
	for(Eigen::Index j = 0; j < n; ++j)
	{
		for(Eigen::Index k = 0; k < n; ++k)
		{
			x(j, k) = dist(rng);
		}
	}
	RealMatrix s = 0.5 * (x + x.transpose());
	if(unit_norm)
	{
		s /= SymmetricEigen::of(s).values.cwiseAbs().maxCoeff();
	}
	return s;
}

/// Same layout as a field dump with d = 2 and a = 0: M*M complex entries row by row.
inline void write_matrix(const ComplexMatrix& m, const std::filesystem::path& path)
{
	std::vector<cplx> data;
	data.reserve(static_cast<std::size_t>(m.size()));
	for(Eigen::Index j = 0; j < m.rows(); ++j)
	{
		for(Eigen::Index k = 0; k < m.cols(); ++k)
		{
			data.push_back(m(j, k));
		}
	}
	detail::write_complex_dump(path, 2.0, static_cast<double>(m.rows()), 0.0, data);
}

/// Node-space vector of a nodal field (real part).
inline RealVector to_real_vector(const Field& f)
{
	const auto n = f.nodal();
	RealVector v(static_cast<Eigen::Index>(n.size()));
	for(std::size_t k = 0; k < n.size(); ++k)
	{
		v[static_cast<Eigen::Index>(k)] = n[k].real();
	}
	return v;
}

} // namespace scsplit
