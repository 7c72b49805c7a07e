// Copyright 2026-present the trinity project
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <vector>

namespace trinity::test {

/// Upper-tail p-value of Pearson's chi-square statistic.
inline double
chi_square_p(const std::vector<double>& observed, const std::vector<double>& expected) {
    double stat = 0.0;
    for (size_t i = 0; i < observed.size(); ++i) {
        double d = observed[i] - expected[i];
        stat += d * d / expected[i];
    }
    boost::math::chi_squared dist(static_cast<double>(observed.size() - 1));
    return boost::math::cdf(boost::math::complement(dist, stat));
}

/// One-sided paired t-test of mean(a - b) > 0. Returns 0 when every
/// difference is the same positive number and 1 when none is positive.
inline double
paired_t_p_greater(const std::vector<double>& a, const std::vector<double>& b) {
    const size_t n = a.size();
    double mean = 0.0;
    for (size_t i = 0; i < n; ++i) {
        mean += a[i] - b[i];
    }
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (size_t i = 0; i < n; ++i) {
        double d = a[i] - b[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(n - 1);
    if (var == 0.0) {
        return mean > 0.0 ? 0.0 : 1.0;
    }
    double t = mean / std::sqrt(var / static_cast<double>(n));
    boost::math::students_t dist(static_cast<double>(n - 1));
    return boost::math::cdf(boost::math::complement(dist, t));
}

}  // namespace trinity::test
