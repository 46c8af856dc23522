#pragma once
// Recursive discrete Bayesian localization over the tree nodes.
//
// The posterior starts as a one-hot at the trachea (frame 0 emits the
// initialization itself). Every later frame first diffuses the posterior
// through the transition prior; the likelihood is multiplied in only when the
// gate policy says so, and the result is renormalized each step so the
// distribution invariants hold over arbitrarily long runs.

#include <algorithm>
#include <span>
#include <utility>
#include <vector>

#include "airtopo/error.hpp"
#include "airtopo/tree.hpp"

namespace airtopo {

enum class GatePolicy {
    kBranchGated,   // update only on branching-point frames
    kAlwaysUpdate,  // classic filter, likelihood every frame
    kNeverUpdate,   // prediction cascade only
};

inline const char* to_string(GatePolicy g) {
    switch (g) {
        case GatePolicy::kBranchGated: return "branch";
        case GatePolicy::kAlwaysUpdate: return "always";
        case GatePolicy::kNeverUpdate: return "never";
    }
    return "?";
}

struct Posterior {
    std::vector<double> probs;
    int frame_index = 0;
};

inline Posterior init_posterior(const TreeModel& tree) {
    Posterior p;
    p.probs.assign(tree.size(), 0.0);
    p.probs[tree.root_index()] = 1.0;
    p.frame_index = 0;
    return p;
}

// predicted[i] = sum_j T[j -> i] * probs[j]; row-stochasticity preserves mass.
inline std::vector<double> predict(const std::vector<double>& probs,
                                   const TransitionModel& transition) {
    const int n = transition.size();
    if (static_cast<int>(probs.size()) != n) {
        throw ValidationError("posterior/transition dimension mismatch");
    }
    std::vector<double> out(n, 0.0);
    for (int j = 0; j < n; ++j) {
        const double pj = probs[j];
        if (pj == 0.0) continue;
        const double* row = transition.row(j);
        for (int i = 0; i < n; ++i) out[i] += row[i] * pj;
    }
    return out;
}

// posterior ∝ likelihood ⊙ predicted
inline std::vector<double> update(const std::vector<double>& predicted,
                                  const std::vector<double>& likelihood) {
    if (predicted.size() != likelihood.size()) {
        throw ValidationError("predicted/likelihood dimension mismatch");
    }
    std::vector<double> out(predicted.size());
    double sum = 0.0;
    for (size_t i = 0; i < predicted.size(); ++i) {
        out[i] = predicted[i] * likelihood[i];
        sum += out[i];
    }
    if (sum <= 0.0) {
        throw ValidationError("likelihood contradicts prediction everywhere (zero product)");
    }
    for (double& x : out) x /= sum;
    return out;
}

class BayesFilter {
public:
    BayesFilter(const TreeModel& tree, const TransitionModel& transition,
                GatePolicy gate = GatePolicy::kBranchGated)
        : transition_(&transition), gate_(gate), posterior_(init_posterior(tree)) {
        if (transition.size() != tree.size()) {
            throw ValidationError("tree/transition dimension mismatch");
        }
    }

    const Posterior& posterior() const { return posterior_; }
    GatePolicy gate() const { return gate_; }

    // One frame: predict, maybe update, renormalize, advance the clock.
    const Posterior& step(const std::vector<double>& likelihood, bool is_branch) {
        auto predicted = predict(posterior_.probs, *transition_);
        const bool apply = gate_ == GatePolicy::kAlwaysUpdate ||
                           (gate_ == GatePolicy::kBranchGated && is_branch);
        posterior_.probs = apply ? update(predicted, likelihood) : std::move(predicted);
        double sum = 0.0;
        for (double x : posterior_.probs) sum += x;
        for (double& x : posterior_.probs) x /= sum;
        posterior_.frame_index += 1;
        return posterior_;
    }

private:
    const TransitionModel* transition_;
    GatePolicy gate_;
    Posterior posterior_;
};

// k highest-probability nodes, descending; ties broken by ascending index.
inline std::vector<std::pair<int, double>> top_k(std::span<const double> probs, int k) {
    const int n = static_cast<int>(probs.size());
    if (k < 1 || k > n) throw ValidationError("top_k: k out of range");
    std::vector<int> idx(n);
    for (int i = 0; i < n; ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(),
                     [&](int a, int b) { return probs[a] > probs[b]; });
    std::vector<std::pair<int, double>> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) out.emplace_back(idx[i], probs[idx[i]]);
    return out;
}

inline int arg_max(std::span<const double> probs) { return top_k(probs, 1)[0].first; }

}  // namespace airtopo
