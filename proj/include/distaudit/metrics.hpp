#pragma once

#include <string>
#include <vector>

namespace distaudit {

struct ScoreSet {
    std::vector<double> genuine;
    std::vector<double> impostor;
    std::string subgroup;
};

// Smallest threshold t with empirical FAR(t) = |{s >= t}| / N <= far.
// Sorted descending, that is one representable step above the (k+1)-th
// largest score where k is the largest accept count with k/N <= far.
// Accepting is always "score >= t".
double far_threshold(const std::vector<double>& impostor, double far);

double empirical_far(const std::vector<double>& impostor, double threshold);

// 100 * (genuine accepted + impostors rejected) / total, at threshold t.
double verification_accuracy(const ScoreSet& scores, double threshold);

// Sample standard deviation (divisor n-1) of per-subgroup accuracies, in
// percentage points. Requires at least two subgroups.
double degree_of_bias(const std::vector<double>& accuracies);

struct CurvePoint {
    std::string intensity;
    std::string subgroup;
    double mean_similarity = 0;
    double std_similarity = 0;  // population spread; 0 for a single image
    long long n = 0;
};

double mean_of(const std::vector<double>& v);
double sample_std(const std::vector<double>& v);
double population_std(const std::vector<double>& v);

}  // namespace distaudit
