#include "mtb/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include "mtb/error.hpp"
#include "mtb/text.hpp"

namespace fs = std::filesystem;

namespace mtb::report {

std::string csv_field(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv(const Row& header, const std::vector<Row>& rows) {
    std::string out;
    const auto line = [&](const Row& r) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) out += ',';
            out += csv_field(r[i]);
        }
        out += "\n";
    };
    line(header);
    for (const auto& r : rows) line(r);
    return out;
}

std::string table(const Row& header, const std::vector<Row>& rows, std::size_t label_columns) {
    std::vector<std::size_t> width(header.size(), 0);
    const auto measure = [&](const Row& r) {
        for (std::size_t i = 0; i < r.size() && i < width.size(); ++i) {
            width[i] = std::max(width[i], text::decode_utf8(r[i]).size());
        }
    };
    measure(header);
    for (const auto& r : rows) measure(r);
    std::string out;
    const auto line = [&](const Row& r) {
        std::string l;
        for (std::size_t i = 0; i < width.size(); ++i) {
            const std::string cell = i < r.size() ? r[i] : "";
            const auto pad = width[i] - text::decode_utf8(cell).size();
            if (i) l += "  ";
            if (i < label_columns) {
                l += cell + std::string(pad, ' ');
            } else {
                l += std::string(pad, ' ') + cell;
            }
        }
        while (!l.empty() && l.back() == ' ') l.pop_back();
        out += l + "\n";
    };
    line(header);
    std::size_t total = 0;
    for (auto w : width) total += w;
    out += std::string(total + 2 * (width.empty() ? 0 : width.size() - 1), '-') + "\n";
    for (const auto& r : rows) line(r);
    return out;
}

std::string display(double v) { return text::round_half_up(v, 2); }

void write_file(const fs::path& path, std::string_view content) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("cannot write '" + path.string() + "'");
}

void write_transfer(const fs::path& dir, const harness::TransferMatrix& m) {
    Row header{"generated_for"};
    header.insert(header.end(), m.columns.begin(), m.columns.end());
    std::vector<Row> full, shown;
    for (std::size_t r = 0; r < m.rows.size(); ++r) {
        Row f{m.rows[r]}, s{m.rows[r]};
        for (double v : m.cells[r]) {
            f.push_back(text::exact(v));
            s.push_back(display(v));
        }
        full.push_back(std::move(f));
        shown.push_back(std::move(s));
    }
    write_file(dir / "transfer.csv", csv(header, full));
    write_file(dir / "transfer.txt", table(header, shown));
}

namespace {

std::string series_csv(const std::vector<harness::SeriesPoint>& s) {
    std::vector<Row> rows;
    for (const auto& p : s) {
        rows.push_back({std::to_string(p.step), text::exact(p.mean), p.lower ? text::exact(*p.lower) : "",
                        p.upper ? text::exact(*p.upper) : ""});
    }
    return csv({"step", "mean", "lo", "hi"}, rows);
}

std::string opt_cell(const std::optional<double>& v, bool exact) {
    if (!v) return "";
    return exact ? text::exact(*v) : display(*v);
}

std::vector<std::string> quality_values(const harness::DataQualityReport& r, bool exact) {
    const auto num = [&](double v) { return exact ? text::exact(v) : display(v); };
    std::vector<std::string> out{num(r.diversity.embd),
                                 num(r.diversity.chrf),
                                 std::to_string(r.diversity.topics),
                                 std::to_string(r.diversity.errors),
                                 std::to_string(r.diversity.words),
                                 opt_cell(r.grammaticality, exact),
                                 opt_cell(r.naturalness, exact),
                                 opt_cell(r.word_rarity, exact),
                                 opt_cell(r.syntax_complexity, exact),
                                 num(r.avg_word_count),
                                 num(r.avg_word_length)};
    for (const auto& [sid, v] : r.qe) out.push_back(num(v));
    out.push_back(opt_cell(r.srcqe, exact));
    return out;
}

}  // namespace

void write_history(const fs::path& dir, const harness::DifficultyHistory& h) {
    write_file(dir / "history_cummin.csv", series_csv(h.cumulative_min));
    write_file(dir / "history_step.csv", series_csv(h.per_step));
}

std::vector<std::pair<std::string, std::string>> quality_rows(const harness::DataQualityReport& r) {
    std::vector<std::pair<std::string, std::string>> rows{
        {"Diversity", "embd"},
        {"Diversity", "chrF"},
        {"Diversity", "topics"},
        {"Diversity", "errors"},
        {"Diversity", "words"},
        {"Complexity & Style", "Grammaticality"},
        {"Complexity & Style", "Naturalness"},
        {"Complexity & Style", "Word Rarity"},
        {"Complexity & Style", "Syntax Complexity"},
        {"Complexity & Style", "Avg. Word Count"},
        {"Complexity & Style", "Avg. Word Length"}};
    for (const auto& [sid, v] : r.qe) rows.emplace_back("Quality Estimation", sid);
    rows.emplace_back("Quality Estimation", "srcqe");
    return rows;
}

void write_quality(const fs::path& dir, const std::map<std::string, harness::DataQualityReport>& reports) {
    if (reports.empty()) throw ValidationError("no data-quality reports to write");
    // Rows follow the first report; every report must carry the same scorers.
    const auto rows = quality_rows(reports.begin()->second);
    for (const auto& [name, r] : reports) {
        if (quality_rows(r) != rows) throw ValidationError("report '" + name + "' uses different QE scorers");
    }
    Row header{"group", "measure"};
    std::vector<std::vector<std::string>> full_cols, shown_cols;
    for (const auto& [name, r] : reports) {
        header.push_back(name);
        full_cols.push_back(quality_values(r, true));
        shown_cols.push_back(quality_values(r, false));
    }
    std::vector<Row> full, shown;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        Row f{rows[i].first, rows[i].second}, s{rows[i].first, rows[i].second};
        for (std::size_t c = 0; c < full_cols.size(); ++c) {
            f.push_back(full_cols[c][i]);
            s.push_back(shown_cols[c][i]);
        }
        full.push_back(std::move(f));
        shown.push_back(std::move(s));
    }
    write_file(dir / "quality.csv", csv(header, full));
    write_file(dir / "quality.txt", table(header, shown, 2));
}

void write_pareto(const fs::path& path, const std::vector<harness::ParetoPoint>& points) {
    std::vector<Row> rows;
    for (const auto& p : points) rows.push_back({text::exact(p.diversity), text::exact(p.qe), p.method});
    write_file(path, csv({"x", "y", "label"}, rows));
}

void write_evaluation(const fs::path& dir, const std::string& label, const std::vector<DatasetRecord>& records,
                      const harness::Evaluation& ev) {
    std::vector<Row> rows;
    for (const auto& item : ev.items) {
        const auto& rec = records.at(item.index);
        rows.push_back({std::to_string(item.index), rec.source,
                        item.scores ? text::exact(item.scores->combined) : "", item.error});
    }
    write_file(dir / (label + "_items.csv"), csv({"item", "source", "combined", "error"}, rows));
    write_file(dir / (label + "_summary.csv"),
               csv({"dataset", "mean", "included", "excluded"},
                   {{label, text::exact(ev.mean), std::to_string(ev.included), std::to_string(ev.excluded)}}));
}

}  // namespace mtb::report
