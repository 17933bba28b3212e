#include "distaudit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace distaudit {

double mean_of(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("mean of empty list");
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double sample_std(const std::vector<double>& v) {
    if (v.size() < 2) throw std::invalid_argument("sample std needs >= 2 values");
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

double population_std(const std::vector<double>& v) {
    if (v.empty()) throw std::invalid_argument("population std of empty list");
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size()));
}

double empirical_far(const std::vector<double>& impostor, double threshold) {
    if (impostor.empty()) throw std::invalid_argument("empty impostor score list");
    std::size_t accepted = 0;
    for (double s : impostor)
        if (s >= threshold) ++accepted;
    return static_cast<double>(accepted) / static_cast<double>(impostor.size());
}

double far_threshold(const std::vector<double>& impostor, double far) {
    if (impostor.empty()) throw std::invalid_argument("empty impostor score list");
    if (!(far > 0.0 && far < 1.0)) throw std::invalid_argument("far must be in (0, 1)");
    const std::size_t n = impostor.size();

    // Largest accept count k with k/n <= far, computed with the same double
    // division empirical_far uses so the two can never disagree.
    std::size_t k = static_cast<std::size_t>(std::floor(far * static_cast<double>(n)));
    while (k + 1 <= n && static_cast<double>(k + 1) / static_cast<double>(n) <= far) ++k;
    while (k > 0 && static_cast<double>(k) / static_cast<double>(n) > far) --k;

    std::vector<double> sorted(impostor);
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    // sorted[k] is the (k+1)-th largest score: the best score that must be
    // rejected. The smallest valid threshold sits one representable step
    // above it.
    return std::nextafter(sorted[k], std::numeric_limits<double>::infinity());
}

double verification_accuracy(const ScoreSet& scores, double threshold) {
    if (scores.genuine.empty() || scores.impostor.empty())
        throw std::invalid_argument("accuracy needs non-empty genuine and impostor scores");
    std::size_t correct = 0;
    for (double s : scores.genuine)
        if (s >= threshold) ++correct;
    for (double s : scores.impostor)
        if (s < threshold) ++correct;
    return 100.0 * static_cast<double>(correct) /
           static_cast<double>(scores.genuine.size() + scores.impostor.size());
}

double degree_of_bias(const std::vector<double>& accuracies) {
    if (accuracies.size() < 2)
        throw std::invalid_argument("degree of bias needs at least 2 subgroup accuracies");
    return sample_std(accuracies);
}

}  // namespace distaudit
