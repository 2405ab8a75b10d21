#include "mtb/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <map>
#include <set>

#include <boost/math/distributions/students_t.hpp>

#include "mtb/error.hpp"
#include "mtb/text.hpp"

namespace mtb::metrics {

void Accumulator::add(double v) {
    const double t = sum_ + v;
    if (std::abs(sum_) >= std::abs(v)) {
        c_ += (sum_ - t) + v;
    } else {
        c_ += (v - t) + sum_;
    }
    sum_ = t;
    ++n_;
}

double mean(const std::vector<double>& values) {
    Accumulator acc;
    for (double v : values) acc.add(v);
    return acc.mean();
}

void ChrfParams::validate() const {
    std::vector<std::string> defects;
    if (char_order < 1) defects.emplace_back("chrF char_order must be >= 1");
    if (word_order < 0) defects.emplace_back("chrF word_order must be >= 0");
    if (!(beta > 0)) defects.emplace_back("chrF beta must be > 0");
    if (!defects.empty()) throw ValidationError(std::move(defects));
}

namespace {

using Counts = std::map<std::u32string, std::size_t>;

struct OrderStats {
    std::size_t hyp = 0;
    std::size_t ref = 0;
    std::size_t match = 0;
};

std::vector<Counts> char_ngrams(std::u32string_view s, int max_order, bool include_whitespace) {
    std::u32string t;
    if (include_whitespace) {
        t.assign(s);
    } else {
        for (char32_t c : s) {
            if (!text::is_space(c)) t.push_back(c);
        }
    }
    std::vector<Counts> out(static_cast<std::size_t>(max_order));
    for (int n = 1; n <= max_order; ++n) {
        const auto un = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i + un <= t.size(); ++i) ++out[un - 1][t.substr(i, un)];
    }
    return out;
}

// A one-character word stays as is; otherwise a trailing punctuation mark is
// split off, else a leading one.
std::vector<std::u32string> word_tokens(std::u32string_view s) {
    std::vector<std::u32string> out;
    for (auto& w : text::split_whitespace(s)) {
        if (w.size() == 1) {
            out.push_back(std::move(w));
        } else if (text::is_ascii_punct(w.back())) {
            out.push_back(w.substr(0, w.size() - 1));
            out.push_back(w.substr(w.size() - 1));
        } else if (text::is_ascii_punct(w.front())) {
            out.push_back(w.substr(0, 1));
            out.push_back(w.substr(1));
        } else {
            out.push_back(std::move(w));
        }
    }
    return out;
}

std::vector<Counts> word_ngrams(std::u32string_view s, int max_order) {
    const auto words = word_tokens(s);
    std::vector<Counts> out(static_cast<std::size_t>(max_order));
    for (int n = 1; n <= max_order; ++n) {
        const auto un = static_cast<std::size_t>(n);
        for (std::size_t i = 0; i + un <= words.size(); ++i) {
            std::u32string key = words[i];
            for (std::size_t k = 1; k < un; ++k) {
                key.push_back(U' ');
                key += words[i + k];
            }
            ++out[un - 1][key];
        }
    }
    return out;
}

OrderStats compare(const Counts& hyp, const Counts& ref) {
    OrderStats st;
    for (const auto& [g, c] : hyp) st.hyp += c;
    for (const auto& [g, c] : ref) st.ref += c;
    for (const auto& [g, c] : hyp) {
        auto it = ref.find(g);
        if (it != ref.end()) st.match += std::min(c, it->second);
    }
    return st;
}

std::u32string prepare(std::string_view s, bool case_fold) {
    return text::decode_utf8(case_fold ? text::to_lower_ascii(s) : std::string(s));
}

}  // namespace

double chrf(std::string_view hypothesis, std::string_view reference, const ChrfParams& params) {
    params.validate();
    const auto hyp = prepare(hypothesis, params.case_fold);
    const auto ref = prepare(reference, params.case_fold);

    std::vector<OrderStats> stats;
    {
        const auto h = char_ngrams(hyp, params.char_order, params.include_whitespace);
        const auto r = char_ngrams(ref, params.char_order, params.include_whitespace);
        for (std::size_t i = 0; i < h.size(); ++i) stats.push_back(compare(h[i], r[i]));
    }
    if (params.word_order > 0) {
        const auto h = word_ngrams(hyp, params.word_order);
        const auto r = word_ngrams(ref, params.word_order);
        for (std::size_t i = 0; i < h.size(); ++i) stats.push_back(compare(h[i], r[i]));
    }

    bool both_empty = true;
    for (const auto& st : stats) both_empty = both_empty && st.hyp == 0 && st.ref == 0;
    if (both_empty) return 100.0;

    const double factor = params.beta * params.beta;
    double avg_prec = 0;
    double avg_rec = 0;
    std::size_t effective = 0;
    for (const auto& st : stats) {
        if (params.effective_order && (st.hyp == 0 || st.ref == 0)) continue;
        avg_prec += st.hyp > 0 ? static_cast<double>(st.match) / static_cast<double>(st.hyp) : 0.0;
        avg_rec += st.ref > 0 ? static_cast<double>(st.match) / static_cast<double>(st.ref) : 0.0;
        ++effective;
    }
    if (effective == 0) return 0.0;
    avg_prec /= static_cast<double>(effective);
    avg_rec /= static_cast<double>(effective);
    if (avg_prec + avg_rec == 0.0) return 0.0;
    const double f = (1 + factor) * avg_prec * avg_rec / (factor * avg_prec + avg_rec);
    return 100.0 * f;
}

double pairwise_diversity_chrf(const std::vector<std::string>& texts, const ChrfParams& params) {
    if (texts.size() < 2) throw ValidationError("pairwise chrF diversity needs at least 2 texts");
    Accumulator acc;
    for (std::size_t i = 0; i < texts.size(); ++i) {
        for (std::size_t j = i + 1; j < texts.size(); ++j) {
            acc.add((chrf(texts[i], texts[j], params) + chrf(texts[j], texts[i], params)) / 2.0);
        }
    }
    return 1.0 - acc.mean() / 100.0;
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw ValidationError("cosine of vectors with different dimensions");
    Accumulator dot, na, nb;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot.add(a[i] * b[i]);
        na.add(a[i] * a[i]);
        nb.add(b[i] * b[i]);
    }
    if (na.sum() <= 0 || nb.sum() <= 0) throw ValidationError("cosine of a zero vector");
    return dot.sum() / (std::sqrt(na.sum()) * std::sqrt(nb.sum()));
}

double pairwise_diversity_embedding(const std::vector<std::vector<double>>& vectors) {
    if (vectors.size() < 2) throw ValidationError("embedding diversity needs at least 2 vectors");
    for (const auto& v : vectors) {
        if (v.size() != vectors.front().size()) throw ValidationError("embeddings differ in dimension");
    }
    Accumulator acc;
    for (std::size_t i = 0; i < vectors.size(); ++i) {
        for (std::size_t j = i + 1; j < vectors.size(); ++j) acc.add(cosine(vectors[i], vectors[j]));
    }
    return 1.0 - acc.mean();
}

std::size_t unique_count(const std::vector<std::vector<std::string>>& items, bool fold) {
    std::set<std::string> seen;
    for (const auto& list : items) {
        for (const auto& s : list) seen.insert(fold ? text::to_lower_ascii(text::trim(s)) : s);
    }
    if (fold) seen.erase("");
    return seen.size();
}

std::size_t vocab_size(const std::vector<std::string>& texts) {
    std::set<std::string> seen;
    for (const auto& t : texts) {
        for (const auto& tok : text::split_whitespace(t)) {
            auto w = text::to_lower_ascii(text::strip_punct(tok));
            if (!w.empty()) seen.insert(std::move(w));
        }
    }
    return seen.size();
}

LengthStats length_stats(const std::vector<std::string>& texts) {
    if (texts.empty()) throw ValidationError("length statistics need at least one text");
    Accumulator words;
    Accumulator lengths;
    for (const auto& t : texts) {
        const auto toks = text::split_whitespace(t);
        words.add(static_cast<double>(toks.size()));
        for (const auto& tok : toks) {
            const auto stripped = text::decode_utf8(text::strip_punct(tok));
            if (!stripped.empty()) lengths.add(static_cast<double>(stripped.size()));
        }
    }
    return LengthStats{words.mean(), lengths.mean()};
}

std::vector<double> z_normalize(const std::vector<double>& values) {
    if (values.empty()) return {};
    const double m = mean(values);
    Accumulator sq;
    for (double v : values) sq.add((v - m) * (v - m));
    const double sigma = std::sqrt(sq.sum() / static_cast<double>(values.size()));
    std::vector<double> out(values.size(), 0.0);
    if (sigma == 0.0) return out;
    for (std::size_t i = 0; i < values.size(); ++i) out[i] = (values[i] - m) / sigma;
    return out;
}

double t_quantile(double p, double df) {
    boost::math::students_t dist(df);
    return boost::math::quantile(dist, p);
}

Interval mean_ci_t(const std::vector<double>& values, double level) {
    if (values.size() < 2) throw ValidationError("a t-interval needs at least 2 values");
    if (!(level > 0 && level < 1)) throw ValidationError("confidence level must lie in (0,1)");
    const auto n = static_cast<double>(values.size());
    const double m = mean(values);
    Accumulator sq;
    for (double v : values) sq.add((v - m) * (v - m));
    const double s = std::sqrt(sq.sum() / (n - 1));
    const double half = t_quantile((1 + level) / 2, n - 1) * s / std::sqrt(n);
    return Interval{m, m - half, m + half};
}

double scale_metricx(double raw) {
    if (!(raw >= 0.0 && raw <= 25.0)) {
        std::cerr << "warning: MetricX score " << text::exact(raw) << " outside [0,25], clamped\n";
        raw = std::isnan(raw) ? 25.0 : std::clamp(raw, 0.0, 25.0);
    }
    return 100.0 * (1.0 - raw / 25.0);
}

}  // namespace mtb::metrics
