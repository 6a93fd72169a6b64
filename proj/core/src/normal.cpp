#include "simineq/normal.hpp"

#include <cmath>

#include <boost/math/distributions/normal.hpp>

#include "simineq/error.hpp"

namespace simineq {

double normal_cdf(double x)
{
    return 0.5 * std::erfc(-x * M_SQRT1_2);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0))
        throw ParameterError("normal_quantile: probability must lie in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

}  // namespace simineq
