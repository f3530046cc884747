#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "motifstore/ctc.hpp"
#include "motifstore/synthsim.hpp"

namespace motifstore::caller {

// Windowed-feature model trained with the CTC loss; stands in for a learned
// caller at desk scale while keeping the EmissionMatrix interface. One tanh
// hidden layer sits between the window features and the token logits: a
// purely affine map cannot represent "this window belongs to motif m",
// because each motif occupies several disjoint feature clusters (one per
// window position inside the motif).
struct ToyModelParams {
    int window_len = 64;  // samples per feature window
    int stride = 64;
    int alphabet_size = 0;  // token classes including the blank
    int hidden = 24;

    // mean, std, min, max, slope, and four quarter means (sub-window shape)
    static constexpr int n_features = 9;

    std::vector<double> w_hidden;  // hidden x (n_features + 1), bias last
    std::vector<double> w_out;     // alphabet_size x (hidden + 1), bias last
    // feature standardization, fitted once at training start
    std::vector<double> feat_mean;
    std::vector<double> feat_std;

    void init(int alphabet, uint64_t seed = 1);
    std::string to_json_string() const;
    static ToyModelParams from_json_string(const std::string& text);
    void save(const std::filesystem::path& path) const;
    static ToyModelParams load(const std::filesystem::path& path);
};

std::vector<double> window_features(std::span<const float> samples, int start, int len);

// Softmax emission rows for every full window of the squiggle.
ctc::EmissionMatrix toy_emissions(const sim::Squiggle& squiggle, const ToyModelParams& params);

// Mean CTC loss over the dataset plus its gradient w.r.t. both weight
// matrices (concatenated w_hidden then w_out). Infeasible samples are
// skipped and counted.
double toy_loss_and_gradient(const std::vector<std::pair<sim::Squiggle, std::vector<int>>>& data,
                             const ToyModelParams& params, std::vector<double>* gradient,
                             int* skipped);

struct ToyTrainStats {
    std::vector<double> epoch_losses;  // loss before each update, plus final
    int skipped = 0;
};

// Full-batch gradient descent on the mean CTC loss.
ToyTrainStats train_toy_caller(const std::vector<std::pair<sim::Squiggle, std::vector<int>>>& data,
                               ToyModelParams& params, int epochs, double learning_rate);

}  // namespace motifstore::caller
