#pragma once
// Per-frame likelihood providers. Two sources feed the filter: a CSV file of
// externally computed classifier outputs, and a built-in nearest-centroid
// baseline over area-averaged thumbnails of quantized frames.
//
// Likelihood CSV: first row lists node labels (any order, must match the tree
// label set); each following row holds one non-negative value per label for
// one frame, in sequence order.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/format.hpp"
#include "airtopo/image.hpp"
#include "airtopo/quantize.hpp"
#include "airtopo/tree.hpp"

namespace airtopo {

inline constexpr double kAbsentClassFloor = 1e-12;

// v / sum(v); rejects vectors that carry no information.
inline std::vector<double> normalize(std::vector<double> v) {
    double sum = 0.0;
    for (double x : v) {
        if (x < 0.0 || !std::isfinite(x)) throw ValidationError("likelihood entries must be finite and non-negative");
        sum += x;
    }
    if (sum <= 0.0) throw ValidationError("cannot normalize an all-zero vector");
    for (double& x : v) x /= sum;
    return v;
}

// ---------------------------------------------------------------------------
// Labeled CSV matrices (likelihood files and posterior dumps share the format)
// ---------------------------------------------------------------------------

struct LabeledMatrix {
    std::vector<std::string> labels;
    std::vector<std::vector<double>> rows;
};

inline LabeledMatrix parse_labeled_csv(std::string_view text) {
    LabeledMatrix m;
    const auto lines = split_lines(text);
    if (lines.empty()) throw ParseError("empty CSV");
    for (auto field : split(trim(lines[0]), ',')) {
        field = trim(field);
        if (field.empty()) throw ParseError("empty label in CSV header");
        m.labels.emplace_back(field);
    }
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty()) continue;
        std::vector<double> row;
        for (auto field : split(line, ',')) {
            row.push_back(parse_double(trim(field), "CSV cell"));
        }
        if (row.size() != m.labels.size()) {
            throw ParseError("CSV row " + std::to_string(i + 1) + " has " +
                             std::to_string(row.size()) + " cells, expected " +
                             std::to_string(m.labels.size()));
        }
        m.rows.push_back(std::move(row));
    }
    return m;
}

inline LabeledMatrix read_labeled_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open CSV: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_labeled_csv(buf.str());
}

inline std::string to_csv(const LabeledMatrix& m) {
    std::string out;
    for (size_t i = 0; i < m.labels.size(); ++i) {
        if (i) out += ',';
        out += m.labels[i];
    }
    out += '\n';
    for (const auto& row : m.rows) {
        for (size_t i = 0; i < row.size(); ++i) {
            if (i) out += ',';
            out += format_double(row[i]);
        }
        out += '\n';
    }
    return out;
}

inline void write_labeled_csv(const std::filesystem::path& path, const LabeledMatrix& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write CSV: " + path.string());
    out << to_csv(m);
}

// Maps CSV columns onto tree node order; throws unless the header is a
// permutation of the tree labels.
inline std::vector<int> column_order(const std::vector<std::string>& labels,
                                     const TreeModel& tree) {
    if (static_cast<int>(labels.size()) != tree.size()) {
        throw ValidationError("CSV has " + std::to_string(labels.size()) +
                              " labels, tree has " + std::to_string(tree.size()));
    }
    std::vector<int> order(labels.size());
    std::vector<char> seen(labels.size(), 0);
    for (size_t c = 0; c < labels.size(); ++c) {
        const int idx = tree.index_of(labels[c]);  // throws on unknown label
        if (seen[idx]) throw ValidationError("duplicate CSV label: " + labels[c]);
        seen[idx] = 1;
        order[c] = idx;
    }
    return order;
}

// One normalized vector per frame row, reordered to tree node order.
inline std::vector<std::vector<double>> load_likelihood_file(const std::filesystem::path& path,
                                                             const TreeModel& tree) {
    const auto m = read_labeled_csv(path);
    const auto order = column_order(m.labels, tree);
    std::vector<std::vector<double>> out;
    out.reserve(m.rows.size());
    for (size_t r = 0; r < m.rows.size(); ++r) {
        std::vector<double> v(tree.size(), 0.0);
        for (size_t c = 0; c < m.rows[r].size(); ++c) {
            const double x = m.rows[r][c];
            if (x < 0.0 || !std::isfinite(x)) {
                throw ValidationError("negative or non-finite likelihood in row " +
                                      std::to_string(r + 2));
            }
            v[order[c]] = x;
        }
        out.push_back(normalize(std::move(v)));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Nearest-centroid baseline classifier
// ---------------------------------------------------------------------------

struct CentroidModel {
    int thumb_width = 32;
    int thumb_height = 32;
    double temperature = 1.0;
    std::vector<std::string> labels;            // tree node order
    std::vector<char> present;                  // class had training data
    std::vector<std::vector<double>> centroids; // mean thumbnail per class (empty if absent)
};

struct TrainingFrame {
    QuantizedImage image;
    int node = -1;
};

inline CentroidModel train_centroids(const std::vector<TrainingFrame>& frames,
                                     const TreeModel& tree, int thumb_size = 32,
                                     double temperature = 1.0) {
    if (thumb_size < 1) throw ValidationError("thumb_size must be >= 1");
    if (!(temperature > 0.0)) throw ValidationError("temperature must be positive");
    const int n = tree.size();
    CentroidModel model;
    model.thumb_width = model.thumb_height = thumb_size;
    model.temperature = temperature;
    model.labels = tree.nodes();
    model.present.assign(n, 0);
    model.centroids.assign(n, {});

    std::vector<size_t> counts(n, 0);
    for (const auto& f : frames) {
        if (f.node < 0 || f.node >= n) throw ValidationError("training frame labels an unknown node");
        auto thumb = area_average_resize(f.image.image, thumb_size, thumb_size);
        if (model.centroids[f.node].empty()) {
            model.centroids[f.node].assign(thumb.size(), 0.0);
        }
        for (size_t i = 0; i < thumb.size(); ++i) model.centroids[f.node][i] += thumb[i];
        ++counts[f.node];
    }
    int classes_with_data = 0;
    for (int c = 0; c < n; ++c) {
        if (counts[c] > 0) {
            model.present[c] = 1;
            ++classes_with_data;
            for (double& v : model.centroids[c]) v /= static_cast<double>(counts[c]);
        }
    }
    if (classes_with_data < 2) {
        throw ValidationError("training needs frames for at least 2 classes");
    }
    return model;
}

// Softmax over negative thumbnail distances; classes without training data sit
// at a tiny probability floor so the posterior can always recover them.
inline std::vector<double> predict_centroid(const CentroidModel& model,
                                            const QuantizedImage& frame) {
    const auto thumb = area_average_resize(frame.image, model.thumb_width, model.thumb_height);
    const int n = static_cast<int>(model.labels.size());
    std::vector<double> score(n, -std::numeric_limits<double>::infinity());
    double max_score = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < n; ++c) {
        if (!model.present[c]) continue;
        double sq = 0.0;
        for (size_t i = 0; i < thumb.size(); ++i) {
            const double diff = thumb[i] - model.centroids[c][i];
            sq += diff * diff;
        }
        score[c] = -std::sqrt(sq) / model.temperature;
        max_score = std::max(max_score, score[c]);
    }
    std::vector<double> probs(n, 0.0);
    for (int c = 0; c < n; ++c) {
        probs[c] = model.present[c] ? std::exp(score[c] - max_score) : kAbsentClassFloor;
    }
    return normalize(std::move(probs));
}

// Flat text persistence:
//   airtopo-centroid-model 1
//   thumb <w> <h>
//   temperature <t>
//   class <label> present <w*h values...>   |   class <label> absent
inline std::string centroid_model_to_text(const CentroidModel& model) {
    std::string out = "airtopo-centroid-model 1\n";
    out += "thumb " + std::to_string(model.thumb_width) + " " +
           std::to_string(model.thumb_height) + "\n";
    out += "temperature " + format_double(model.temperature) + "\n";
    for (size_t c = 0; c < model.labels.size(); ++c) {
        out += "class " + model.labels[c];
        if (model.present[c]) {
            out += " present";
            for (double v : model.centroids[c]) out += " " + format_double(v);
        } else {
            out += " absent";
        }
        out += '\n';
    }
    return out;
}

inline CentroidModel parse_centroid_model(std::string_view text) {
    const auto lines = split_lines(text);
    if (lines.empty() || trim(lines[0]) != "airtopo-centroid-model 1") {
        throw ParseError("not a centroid model file");
    }
    CentroidModel model;
    model.labels.clear();
    model.present.clear();
    model.centroids.clear();
    for (size_t i = 1; i < lines.size(); ++i) {
        const auto line = trim(lines[i]);
        if (line.empty()) continue;
        std::vector<std::string_view> tok;
        for (auto part : split(line, ' ')) {
            if (!trim(part).empty()) tok.push_back(trim(part));
        }
        if (tok[0] == "thumb" && tok.size() == 3) {
            model.thumb_width = static_cast<int>(parse_int(tok[1], "thumb width"));
            model.thumb_height = static_cast<int>(parse_int(tok[2], "thumb height"));
        } else if (tok[0] == "temperature" && tok.size() == 2) {
            model.temperature = parse_double(tok[1], "temperature");
        } else if (tok[0] == "class" && tok.size() >= 3) {
            model.labels.emplace_back(tok[1]);
            if (tok[2] == "present") {
                model.present.push_back(1);
                std::vector<double> values;
                for (size_t t = 3; t < tok.size(); ++t) {
                    values.push_back(parse_double(tok[t], "centroid value"));
                }
                const size_t expect =
                    static_cast<size_t>(model.thumb_width) * model.thumb_height;
                if (values.size() != expect) {
                    throw ParseError("centroid for " + model.labels.back() + " has " +
                                     std::to_string(values.size()) + " values, expected " +
                                     std::to_string(expect));
                }
                model.centroids.push_back(std::move(values));
            } else if (tok[2] == "absent") {
                model.present.push_back(0);
                model.centroids.emplace_back();
            } else {
                throw ParseError("class line must end with 'present' or 'absent'");
            }
        } else {
            throw ParseError("bad centroid model line: " + std::string(line));
        }
    }
    if (model.labels.size() < 2) throw ParseError("centroid model lists fewer than 2 classes");
    return model;
}

inline void save_centroid_model(const std::filesystem::path& path, const CentroidModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write centroid model: " + path.string());
    out << centroid_model_to_text(model);
}

inline CentroidModel load_centroid_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open centroid model: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_centroid_model(buf.str());
}

}  // namespace airtopo
