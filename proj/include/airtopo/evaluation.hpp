#pragma once
// Scoring of localization output against ground-truth node labels: Top-k
// accuracy, confusion matrices, and the Table-style text/CSV reports.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/format.hpp"
#include "airtopo/tree.hpp"

namespace airtopo {

struct SequenceResult {
    std::string id;
    std::vector<std::vector<int>> rankings;  // per frame, best-first node indices
    std::vector<int> truth;                  // per frame ground-truth node index

    void check() const {
        if (rankings.size() != truth.size()) {
            throw ValidationError("prediction and truth lengths differ");
        }
        if (rankings.empty()) throw ValidationError("empty sequence");
    }
};

// Fraction of frames whose true node appears among the k best-ranked ones.
inline double topk_accuracy(const SequenceResult& result, int k) {
    result.check();
    if (k < 1) throw ValidationError("k must be >= 1");
    size_t hits = 0;
    for (size_t t = 0; t < result.truth.size(); ++t) {
        const auto& r = result.rankings[t];
        const size_t limit = std::min<size_t>(k, r.size());
        for (size_t i = 0; i < limit; ++i) {
            if (r[i] == result.truth[t]) {
                ++hits;
                break;
            }
        }
    }
    return static_cast<double>(hits) / static_cast<double>(result.truth.size());
}

// entry (true, predicted top-1), row-major n x n counts
inline std::vector<int64_t> confusion_matrix(const SequenceResult& result, int n) {
    result.check();
    std::vector<int64_t> m(static_cast<size_t>(n) * n, 0);
    for (size_t t = 0; t < result.truth.size(); ++t) {
        const int truth = result.truth[t];
        const int pred = result.rankings[t].at(0);
        if (truth < 0 || truth >= n || pred < 0 || pred >= n) {
            throw ValidationError("node index outside tree in confusion_matrix");
        }
        ++m[static_cast<size_t>(truth) * n + pred];
    }
    return m;
}

inline double mean_over_sequences(const std::vector<double>& accuracies) {
    if (accuracies.empty()) throw ValidationError("mean over empty accuracy list");
    double sum = 0.0;
    for (double a : accuracies) sum += a;
    return sum / static_cast<double>(accuracies.size());
}

// ---------------------------------------------------------------------------
// Ground-truth label files: one node label per line, frame order.
// ---------------------------------------------------------------------------

inline std::vector<int> parse_truth_labels(std::string_view text, const TreeModel& tree) {
    std::vector<int> out;
    for (auto raw : split_lines(text)) {
        const auto line = trim(raw);
        if (line.empty()) continue;
        out.push_back(tree.index_of(line));
    }
    if (out.empty()) throw ValidationError("truth file lists no labels");
    return out;
}

inline std::vector<int> load_truth_labels(const std::filesystem::path& path,
                                          const TreeModel& tree) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open truth file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_truth_labels(buf.str(), tree);
}

inline void save_truth_labels(const std::filesystem::path& path, const std::vector<int>& truth,
                              const TreeModel& tree) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write truth file: " + path.string());
    for (int t : truth) out << tree.label(t) << '\n';
}

// ---------------------------------------------------------------------------
// Reports: one row per (sequence, pipeline variant), Top-k columns.
// ---------------------------------------------------------------------------

struct ReportRow {
    std::string sequence;
    std::string classifier;  // likelihood source description
    bool bayesian = false;
    bool branch_detector = false;
    std::vector<std::pair<int, double>> topk;  // (k, accuracy), ascending k
};

inline std::string report_to_csv(const std::vector<ReportRow>& rows) {
    std::string out = "sequence,classifier,bayesian,branching_detector";
    if (!rows.empty()) {
        for (const auto& [k, acc] : rows.front().topk) {
            out += ",top" + std::to_string(k) + "_acc";
        }
    }
    out += '\n';
    for (const auto& r : rows) {
        out += r.sequence + "," + r.classifier + ",";
        out += r.bayesian ? "yes" : "no";
        out += ",";
        out += r.branch_detector ? "yes" : "no";
        for (const auto& [k, acc] : r.topk) out += "," + format_double(acc);
        out += '\n';
    }
    return out;
}

inline void print_report(std::ostream& os, const std::vector<ReportRow>& rows) {
    os << std::left << std::setw(14) << "sequence" << std::setw(18) << "classifier"
       << std::setw(10) << "bayesian" << std::setw(10) << "detector";
    if (!rows.empty()) {
        for (const auto& [k, acc] : rows.front().topk) {
            os << std::setw(10) << ("top-" + std::to_string(k));
        }
    }
    os << '\n';
    for (const auto& r : rows) {
        os << std::left << std::setw(14) << r.sequence << std::setw(18) << r.classifier
           << std::setw(10) << (r.bayesian ? "yes" : "no") << std::setw(10)
           << (r.branch_detector ? "yes" : "no");
        os << std::fixed << std::setprecision(2);
        for (const auto& [k, acc] : r.topk) os << std::setw(10) << round2(acc);
        os.unsetf(std::ios::fixed);
        os << std::setprecision(6) << '\n';
    }
}

}  // namespace airtopo
