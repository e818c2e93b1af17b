#pragma once

#include "tarn/numerics/tridiagonal.hpp"

#include <algorithm>
#include <stdexcept>

namespace tarn::numerics {

/**
 * Natural cubic spline: C2 piecewise cubic through (nodes, values) with zero
 * second derivative at both end nodes. Construction costs one tridiagonal
 * solve for the interior second derivatives.
 */
template <typename Scalar>
class NaturalCubicSpline
{
public:
    template <typename Nodes, typename Values>
    NaturalCubicSpline(const Eigen::MatrixBase<Nodes>& nodes, const Eigen::MatrixBase<Values>& values)
        : m_nodes(nodes), m_values(values), m_second(Vector<Scalar>::Zero(nodes.size()))
    {
        const Eigen::Index n = m_nodes.size();
        if (n < 2 || m_values.size() != n)
            throw std::invalid_argument("cubic spline needs at least two nodes and one value per node");
        for (Eigen::Index i = 1; i < n; ++i)
            if (!(m_nodes(i) > m_nodes(i - 1)))
                throw std::invalid_argument("cubic spline nodes must be strictly increasing");
        if (n == 2)
            return;

        const Eigen::Index m = n - 2;
        Vector<Scalar> lower(m), diag(m), upper(m), rhs(m);
        for (Eigen::Index i = 1; i <= m; ++i) {
            const Scalar h0 = m_nodes(i) - m_nodes(i - 1);
            const Scalar h1 = m_nodes(i + 1) - m_nodes(i);
            lower(i - 1) = h0;
            diag(i - 1) = Scalar(2) * (h0 + h1);
            upper(i - 1) = h1;
            rhs(i - 1) = Scalar(6) * ((m_values(i + 1) - m_values(i)) / h1 - (m_values(i) - m_values(i - 1)) / h0);
        }
        m_second.segment(1, m) = solve_tridiagonal(lower, diag, upper, rhs);
    }

    Scalar operator()(Scalar x) const
    {
        const Eigen::Index n = m_nodes.size();
        if (x < m_nodes(0) || x > m_nodes(n - 1))
            throw std::out_of_range("cubic spline query outside the node range");
        const Scalar* first = m_nodes.data();
        Eigen::Index i = static_cast<Eigen::Index>(std::upper_bound(first, first + n, x) - first) - 1;
        i = std::clamp<Eigen::Index>(i, 0, n - 2);
        const Scalar h = m_nodes(i + 1) - m_nodes(i);
        const Scalar a = (m_nodes(i + 1) - x) / h;
        const Scalar b = Scalar(1) - a;
        return a * m_values(i) + b * m_values(i + 1) +
               ((a * a * a - a) * m_second(i) + (b * b * b - b) * m_second(i + 1)) * (h * h) / Scalar(6);
    }

    template <typename Queries>
    Vector<Scalar> operator()(const Eigen::MatrixBase<Queries>& queries) const
    {
        Vector<Scalar> out(queries.size());
        for (Eigen::Index q = 0; q < queries.size(); ++q)
            out(q) = (*this)(queries(q));
        return out;
    }

    const Vector<Scalar>& second_derivatives() const { return m_second; }

private:
    Vector<Scalar> m_nodes;
    Vector<Scalar> m_values;
    Vector<Scalar> m_second;
};

template <typename Nodes, typename Values, typename Queries>
Vector<typename Nodes::Scalar> natural_cubic_spline(const Eigen::MatrixBase<Nodes>& nodes,
                                                    const Eigen::MatrixBase<Values>& values,
                                                    const Eigen::MatrixBase<Queries>& queries)
{
    return NaturalCubicSpline<typename Nodes::Scalar>(nodes, values)(queries);
}

} // namespace tarn::numerics
