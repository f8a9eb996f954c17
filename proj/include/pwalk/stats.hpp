#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace pwalk {

/// Kahan compensated accumulator; serial and chunked-parallel reductions of
/// the same values agree to ~1e-12 relative.
class KahanSum {
public:
    void add(double x) {
        double y = x - comp_;
        double t = sum_ + y;
        comp_ = (t - sum_) - y;
        sum_ = t;
    }
    void merge(const KahanSum& o) {
        add(o.sum_);
        add(-o.comp_);
    }
    double value() const { return sum_ - comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

struct MeanStderr {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::size_t n = 0;
};

inline MeanStderr mean_stderr(const std::vector<double>& xs) {
    MeanStderr r;
    r.n = xs.size();
    if (xs.empty()) return r;
    KahanSum s;
    for (double x : xs) s.add(x);
    r.mean = s.value() / static_cast<double>(xs.size());
    if (xs.size() < 2) return r;
    KahanSum sq;
    for (double x : xs) sq.add((x - r.mean) * (x - r.mean));
    double var = sq.value() / static_cast<double>(xs.size() - 1);
    r.stderr_of_mean = std::sqrt(std::max(var, 0.0) / static_cast<double>(xs.size()));
    return r;
}

/// Standard error of an estimator from per-batch values (batch means method).
inline double batch_stderr(const std::vector<double>& batch_values) {
    return mean_stderr(batch_values).stderr_of_mean;
}

inline double binomial_stderr(double p_hat, std::size_t n) {
    if (n == 0) return 0.0;
    return std::sqrt(std::max(p_hat * (1.0 - p_hat), 0.0) / static_cast<double>(n));
}

struct KsResult {
    double statistic = 0.0;   // sup |F_N - F|
    double threshold = 0.0;   // c(alpha) / sqrt(N)
    bool pass = false;
    std::size_t n = 0;
};

/// Asymptotic Kolmogorov critical value c(alpha); c(0.01) = 1.628.
inline double ks_critical(double alpha) {
    return std::sqrt(-0.5 * std::log(alpha / 2.0));
}

/// One-sample KS test of `samples` against a CDF, pass iff D < c(alpha)/sqrt(N).
template <class Cdf>
KsResult ks_test(std::vector<double> samples, Cdf&& cdf, double alpha = 0.01) {
    if (samples.size() < 100)
        throw std::invalid_argument("ks_test: need at least 100 samples, got " +
                                    std::to_string(samples.size()));
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    double d = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        double f = cdf(samples[i]);
        d = std::max(d, std::abs(static_cast<double>(i + 1) / n - f));
        d = std::max(d, std::abs(static_cast<double>(i) / n - f));
    }
    KsResult r;
    r.statistic = d;
    r.threshold = ks_critical(alpha) / std::sqrt(n);
    r.pass = d < r.threshold;
    r.n = samples.size();
    return r;
}

/// Two-sample KS, pass iff D < c(alpha) sqrt((n1+n2)/(n1 n2)).
inline KsResult ks_test_two_sample(std::vector<double> a, std::vector<double> b,
                                   double alpha = 0.01) {
    if (a.size() < 100 || b.size() < 100)
        throw std::invalid_argument("ks_test_two_sample: need at least 100 samples per side");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / static_cast<double>(a.size()) -
                                 static_cast<double>(j) / static_cast<double>(b.size())));
    }
    KsResult r;
    r.statistic = d;
    double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
    r.threshold = ks_critical(alpha) * std::sqrt((n1 + n2) / (n1 * n2));
    r.pass = d < r.threshold;
    r.n = a.size();
    return r;
}

} // namespace pwalk
