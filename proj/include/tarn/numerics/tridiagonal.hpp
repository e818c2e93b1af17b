#pragma once

#include <Eigen/Core>

#include <stdexcept>
#include <string>

namespace tarn::numerics {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Raised by the Thomas sweep when elimination meets a zero pivot.
class SingularPivot : public std::runtime_error
{
public:
    explicit SingularPivot(Eigen::Index row)
        : std::runtime_error("tridiagonal solve: zero pivot at row " + std::to_string(row)), m_row(row)
    {
    }
    Eigen::Index row() const { return m_row; }

private:
    Eigen::Index m_row;
};

/**
 * Thomas factorisation of a tridiagonal matrix, reusable across right hand
 * sides.
 *
 * Row i reads lower(i) * x(i-1) + diag(i) * x(i) + upper(i) * x(i+1);
 * lower(0) and upper(n-1) are ignored. No pivoting: callers build
 * diagonally dominant systems.
 */
template <typename Scalar>
class TridiagonalFactorization
{
public:
    TridiagonalFactorization() = default;

    template <typename Lower, typename Diag, typename Upper>
    TridiagonalFactorization(const Eigen::MatrixBase<Lower>& lower, const Eigen::MatrixBase<Diag>& diag,
                             const Eigen::MatrixBase<Upper>& upper)
    {
        compute(lower, diag, upper);
    }

    template <typename Lower, typename Diag, typename Upper>
    void compute(const Eigen::MatrixBase<Lower>& lower, const Eigen::MatrixBase<Diag>& diag,
                 const Eigen::MatrixBase<Upper>& upper)
    {
        const Eigen::Index n = diag.size();
        if (lower.size() != n || upper.size() != n)
            throw std::invalid_argument("tridiagonal solve: band sizes differ");
        m_lower = lower;
        m_inv_pivot.resize(n);
        m_ratio.resize(n);
        if (n == 0)
            return;
        Scalar pivot = diag(0);
        for (Eigen::Index i = 0;; ++i) {
            if (pivot == Scalar(0))
                throw SingularPivot(i);
            m_inv_pivot(i) = Scalar(1) / pivot;
            if (i + 1 == n)
                break;
            m_ratio(i + 1) = upper(i) * m_inv_pivot(i);
            pivot = diag(i + 1) - lower(i + 1) * m_ratio(i + 1);
        }
    }

    Eigen::Index size() const { return m_inv_pivot.size(); }

    /// Solves in place; `x` holds the right hand side on entry.
    template <typename Derived>
    void solve_in_place(Eigen::MatrixBase<Derived>& x) const
    {
        const Eigen::Index n = size();
        if (x.size() != n)
            throw std::invalid_argument("tridiagonal solve: rhs size does not match the matrix");
        if (n == 0)
            return;
        x(0) *= m_inv_pivot(0);
        for (Eigen::Index i = 1; i < n; ++i)
            x(i) = (x(i) - m_lower(i) * x(i - 1)) * m_inv_pivot(i);
        for (Eigen::Index i = n - 2; i >= 0; --i)
            x(i) -= m_ratio(i + 1) * x(i + 1);
    }

    template <typename Rhs>
    Vector<Scalar> solve(const Eigen::MatrixBase<Rhs>& rhs) const
    {
        Vector<Scalar> x = rhs;
        solve_in_place(x);
        return x;
    }

private:
    Vector<Scalar> m_lower;
    Vector<Scalar> m_inv_pivot;
    Vector<Scalar> m_ratio;
};

template <typename Lower, typename Diag, typename Upper, typename Rhs>
Vector<typename Diag::Scalar> solve_tridiagonal(const Eigen::MatrixBase<Lower>& lower,
                                                const Eigen::MatrixBase<Diag>& diag,
                                                const Eigen::MatrixBase<Upper>& upper,
                                                const Eigen::MatrixBase<Rhs>& rhs)
{
    if (rhs.size() != diag.size())
        throw std::invalid_argument("tridiagonal solve: band and rhs sizes differ");
    return TridiagonalFactorization<typename Diag::Scalar>(lower, diag, upper).solve(rhs);
}

} // namespace tarn::numerics
