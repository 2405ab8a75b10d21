#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace mtb::metrics {

// Signature "case:mix|eff:y|nc:6|nw:2|sp:no".
struct ChrfParams {
    int char_order = 6;
    int word_order = 2;
    double beta = 2.0;
    bool effective_order = true;
    bool include_whitespace = false;
    bool case_fold = false;

    void validate() const;
};

// Sentence-level chrF on the 0..100 scale, compatible with sacrebleu 2.5.1.
// Two empty strings score 100.
double chrf(std::string_view hypothesis, std::string_view reference, const ChrfParams& params = {});

// 1 - mean symmetrized pairwise chrF / 100 over unordered pairs.
double pairwise_diversity_chrf(const std::vector<std::string>& texts, const ChrfParams& params = {});

// 1 - mean pairwise cosine similarity over unordered pairs.
double pairwise_diversity_embedding(const std::vector<std::vector<double>>& vectors);

double cosine(const std::vector<double>& a, const std::vector<double>& b);

// Size of the union of all strings; with fold they are trimmed and lowercased.
std::size_t unique_count(const std::vector<std::vector<std::string>>& items, bool fold);

// Distinct case-folded whitespace tokens, edge punctuation stripped.
std::size_t vocab_size(const std::vector<std::string>& texts);

struct LengthStats {
    double avg_word_count = 0;
    double avg_word_length = 0;
};

LengthStats length_stats(const std::vector<std::string>& texts);

// (v - mean) / sigma with population sigma; all zeros when sigma is 0.
std::vector<double> z_normalize(const std::vector<double>& values);

struct Interval {
    double mean = 0;
    double lower = 0;
    double upper = 0;
    double half_width() const { return upper - mean; }
};

// Two-sided Student-t interval for the mean at the given level.
Interval mean_ci_t(const std::vector<double>& values, double level = 0.90);

// Quantile of Student's t distribution with df degrees of freedom.
double t_quantile(double p, double df);

// MetricX error (0 best .. 25 worst) onto 0 (worst) .. 100 (perfect).
// Out-of-range input is clamped with a warning on stderr.
double scale_metricx(double raw);

struct DiversityReport {
    double embd = 0;
    double chrf = 0;
    std::size_t topics = 0;
    std::size_t errors = 0;
    std::size_t words = 0;
};

// Neumaier-compensated summation.
class Accumulator {
public:
    void add(double v);
    double sum() const { return sum_ + c_; }
    std::size_t count() const { return n_; }
    double mean() const { return n_ ? sum() / static_cast<double>(n_) : 0.0; }

private:
    double sum_ = 0;
    double c_ = 0;
    std::size_t n_ = 0;
};

double mean(const std::vector<double>& values);

}  // namespace mtb::metrics
