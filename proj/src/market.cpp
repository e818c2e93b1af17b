#include "tarn/market.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

namespace tarn {

PiecewiseConstant::PiecewiseConstant(double value) : m_ends{}, m_values{value}
{
    if (!std::isfinite(value))
        throw std::invalid_argument("curve values must be finite");
}

PiecewiseConstant::PiecewiseConstant(std::vector<double> ends, std::vector<double> values)
    : m_ends(std::move(ends)), m_values(std::move(values))
{
    // A trailing end point is allowed but redundant: the last value extends flat.
    if (m_values.empty())
        throw std::invalid_argument("curve needs at least one value");
    if (m_ends.size() == m_values.size())
        m_ends.pop_back();
    if (m_ends.size() + 1 != m_values.size())
        throw std::invalid_argument("curve knots and values have inconsistent lengths");
    double prev = 0.0;
    for (double e : m_ends) {
        if (!(e > prev))
            throw std::invalid_argument("curve knots must be positive and strictly increasing");
        prev = e;
    }
    for (double v : m_values)
        if (!std::isfinite(v))
            throw std::invalid_argument("curve values must be finite");
}

double PiecewiseConstant::operator()(double t) const
{
    const auto it = std::upper_bound(m_ends.begin(), m_ends.end(), t);
    return m_values[static_cast<std::size_t>(it - m_ends.begin())];
}

double PiecewiseConstant::integral(double t0, double t1) const { return integrate(t0, t1, false); }

double PiecewiseConstant::integral_of_square(double t0, double t1) const { return integrate(t0, t1, true); }

double PiecewiseConstant::integrate(double t0, double t1, bool squared) const
{
    double sum = 0.0;
    double lo = 0.0;
    for (std::size_t i = 0; i < m_values.size(); ++i) {
        const double hi = i < m_ends.size() ? m_ends[i] : std::max(t1, lo);
        const double a = std::max(lo, t0);
        const double b = std::min(hi, t1);
        if (b > a)
            sum += (squared ? m_values[i] * m_values[i] : m_values[i]) * (b - a);
        lo = hi;
    }
    return sum;
}

double PiecewiseConstant::max_over(double t0, double t1) const
{
    double best = (*this)(t0);
    for (std::size_t i = 0; i < m_ends.size(); ++i)
        if (m_ends[i] > t0 && m_ends[i] < t1)
            best = std::max(best, m_values[i + 1]);
    return best;
}

namespace {

template <class... Ts>
struct overloaded : Ts...
{
    using Ts::operator()...;
};

void require_positive(double sigma)
{
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("volatility values must be positive and finite");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Index i with knots[i] <= x <= knots[i+1] and the linear weight of knots[i+1].
std::pair<Eigen::Index, double> bracket(const Eigen::VectorXd& knots, double x)
{
    const Eigen::Index n = knots.size();
    if (n == 1 || x <= knots(0))
        return {0, 0.0};
    if (x >= knots(n - 1))
        return {n - 2, 1.0};
    const auto it = std::upper_bound(knots.data(), knots.data() + n, x);
    const Eigen::Index i = (it - knots.data()) - 1;
    return {i, (x - knots(i)) / (knots(i + 1) - knots(i))};
}

} // namespace

void validate(const VolatilitySpec& vol)
{
    std::visit(overloaded{
                   [](const ConstantVol& v) { require_positive(v.sigma); },
                   [](const TermStructureVol& v) {
                       for (double s : v.sigma.values())
                           require_positive(s);
                   },
                   [](const LocalVolSurface& v) {
                       if (v.spots.size() < 1 || v.times.size() < 1)
                           throw std::invalid_argument("local vol mesh must have at least one knot per axis");
                       if (v.sigma.rows() != v.times.size() || v.sigma.cols() != v.spots.size())
                           throw std::invalid_argument("local vol mesh shape does not match its knots");
                       for (Eigen::Index i = 1; i < v.spots.size(); ++i)
                           if (!(v.spots(i) > v.spots(i - 1)))
                               throw std::invalid_argument("local vol spot knots must be strictly increasing");
                       for (Eigen::Index i = 1; i < v.times.size(); ++i)
                           if (!(v.times(i) > v.times(i - 1)))
                               throw std::invalid_argument("local vol time knots must be strictly increasing");
                       for (Eigen::Index i = 0; i < v.sigma.size(); ++i)
                           require_positive(v.sigma.data()[i]);
                   },
               },
               vol);
}

bool has_exact_transition(const VolatilitySpec& vol) { return !std::holds_alternative<LocalVolSurface>(vol); }

double representative_vol(const VolatilitySpec& vol, double horizon)
{
    return std::visit(overloaded{
                          [](const ConstantVol& v) { return v.sigma; },
                          [&](const TermStructureVol& v) { return v.sigma.max_over(0.0, horizon); },
                          [](const LocalVolSurface& v) { return v.sigma.maxCoeff(); },
                      },
                      vol);
}

double discount_factor(const RateCurve& curve, double t0, double t1) { return std::exp(-curve.integral(t0, t1)); }

double integrated_variance(const VolatilitySpec& vol, double t0, double t1)
{
    return std::visit(overloaded{
                          [&](const ConstantVol& v) { return v.sigma * v.sigma * (t1 - t0); },
                          [&](const TermStructureVol& v) { return v.sigma.integral_of_square(t0, t1); },
                          [](const LocalVolSurface&) -> double { throw ExactTransitionUnavailable(); },
                      },
                      vol);
}

double local_vol_at(const VolatilitySpec& vol, double spot, double t)
{
    return std::visit(overloaded{
                          [](const ConstantVol& v) { return v.sigma; },
                          [&](const TermStructureVol& v) { return v.sigma(t); },
                          [&](const LocalVolSurface& v) {
                              const auto [it, wt] = bracket(v.times, t);
                              const auto [is, ws] = bracket(v.spots, spot);
                              const Eigen::Index it1 = std::min<Eigen::Index>(it + 1, v.times.size() - 1);
                              const Eigen::Index is1 = std::min<Eigen::Index>(is + 1, v.spots.size() - 1);
                              const double lo = (1.0 - ws) * v.sigma(it, is) + ws * v.sigma(it, is1);
                              const double hi = (1.0 - ws) * v.sigma(it1, is) + ws * v.sigma(it1, is1);
                              return (1.0 - wt) * lo + wt * hi;
                          },
                      },
                      vol);
}

double vanilla_price(double spot, double strike, Direction beta, double expiry, const MarketModel& model)
{
    const double variance = integrated_variance(model.vol, 0.0, expiry);
    const double df_d = discount_factor(model.domestic, 0.0, expiry);
    const double df_f = discount_factor(model.foreign, 0.0, expiry);
    const double forward = spot * df_f / df_d;
    const double b = sign(beta);
    if (variance <= 0.0)
        return df_d * std::max(b * (forward - strike), 0.0);
    const double sd = std::sqrt(variance);
    const double d1 = (std::log(forward / strike) + 0.5 * variance) / sd;
    const double d2 = d1 - sd;
    return df_d * b * (forward * normal_cdf(b * d1) - strike * normal_cdf(b * d2));
}

LocalVolSurface read_local_vol_matrix(std::istream& in)
{
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        for (char& c : line)
            if (c == ',' || c == ';')
                c = ' ';
        std::istringstream ls(line);
        std::vector<double> row;
        double x;
        while (ls >> x)
            row.push_back(x);
        if (!ls.eof())
            throw std::invalid_argument("local vol matrix: unparsable entry in line '" + line + "'");
        if (!row.empty())
            rows.push_back(std::move(row));
    }
    if (rows.size() < 2 || rows.front().size() < 2)
        throw std::invalid_argument("local vol matrix needs a header row and at least one time row");
    const auto n_spots = static_cast<Eigen::Index>(rows.front().size() - 1);
    const auto n_times = static_cast<Eigen::Index>(rows.size() - 1);
    LocalVolSurface surface{Eigen::VectorXd(n_spots), Eigen::VectorXd(n_times), Eigen::MatrixXd(n_times, n_spots)};
    for (Eigen::Index j = 0; j < n_spots; ++j)
        surface.spots(j) = rows.front()[static_cast<std::size_t>(j + 1)];
    for (Eigen::Index i = 0; i < n_times; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i + 1)];
        if (static_cast<Eigen::Index>(row.size()) != n_spots + 1)
            throw std::invalid_argument("local vol matrix: row " + std::to_string(i + 2) + " has the wrong length");
        surface.times(i) = row[0];
        for (Eigen::Index j = 0; j < n_spots; ++j)
            surface.sigma(i, j) = row[static_cast<std::size_t>(j + 1)];
    }
    validate(VolatilitySpec{surface});
    return surface;
}

LocalVolSurface load_local_vol_matrix(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open local vol file " + path.string());
    return read_local_vol_matrix(in);
}

} // namespace tarn
