#pragma once
// Offline most-likely-path decoding. Log-space dynamic program over the whole
// sequence: products of near-zero transition weights underflow linear space on
// long runs, sums of logs do not. The path always starts at the root (one-hot
// initialization); with endpoint constraints enabled the backtrack is forced
// to finish there too, which models procedures that begin and end in the
// trachea. Ties pick the smaller node index at every argmax.

#include <cmath>
#include <limits>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/tree.hpp"

namespace airtopo {

struct DecodedPath {
    std::vector<int> states;
    double log_score = 0.0;
};

inline DecodedPath viterbi_decode(const std::vector<std::vector<double>>& likelihoods,
                                  const TransitionModel& transition, int root_index,
                                  bool constrain_endpoints) {
    const int n = transition.size();
    const int frames = static_cast<int>(likelihoods.size());
    if (frames < 1) throw ValidationError("viterbi_decode: empty sequence");
    if (root_index < 0 || root_index >= n) throw ValidationError("root index out of range");
    for (const auto& row : likelihoods) {
        if (static_cast<int>(row.size()) != n) {
            throw ValidationError("likelihood/transition dimension mismatch");
        }
    }

    const double ninf = -std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> delta(frames, std::vector<double>(n, ninf));
    std::vector<std::vector<int>> back(frames, std::vector<int>(n, -1));

    delta[0][root_index] = std::log(likelihoods[0][root_index]);
    for (int t = 1; t < frames; ++t) {
        for (int i = 0; i < n; ++i) {
            double best = ninf;
            int best_j = -1;
            for (int j = 0; j < n; ++j) {
                const double s = delta[t - 1][j] + std::log(transition.at(j, i));
                if (best_j == -1 || s > best) {  // strict: ties keep the smaller predecessor
                    best = s;
                    best_j = j;
                }
            }
            delta[t][i] = best + std::log(likelihoods[t][i]);
            back[t][i] = best_j;
        }
    }

    int end = root_index;
    if (!constrain_endpoints) {
        double best = ninf;
        end = 0;
        for (int i = 0; i < n; ++i) {
            if (delta[frames - 1][i] > best) {
                best = delta[frames - 1][i];
                end = i;
            }
        }
    }

    DecodedPath path;
    path.log_score = delta[frames - 1][end];
    path.states.assign(frames, end);
    for (int t = frames - 1; t > 0; --t) {
        path.states[t - 1] = back[t][path.states[t]];
    }
    return path;
}

}  // namespace airtopo
