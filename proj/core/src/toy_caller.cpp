#include "motifstore/toy_caller.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "motifstore/rng.hpp"

namespace motifstore::caller {

void ToyModelParams::init(int alphabet, uint64_t seed) {
    if (alphabet < 2) throw std::invalid_argument("ToyModelParams: alphabet must include blank");
    alphabet_size = alphabet;
    // small random hidden weights break the symmetry; output weights start
    // at zero so the initial emissions are uniform
    Rng rng(derive_seed(seed, 0x70f));
    w_hidden.assign(static_cast<size_t>(hidden) * (n_features + 1), 0.0);
    for (auto& w : w_hidden) w = 0.5 * (2.0 * rng.uniform01() - 1.0);
    w_out.assign(static_cast<size_t>(alphabet) * (hidden + 1), 0.0);
    feat_mean.clear();
    feat_std.clear();
}

std::string ToyModelParams::to_json_string() const {
    nlohmann::json j;
    j["window_len"] = window_len;
    j["stride"] = stride;
    j["alphabet_size"] = alphabet_size;
    j["hidden"] = hidden;
    j["n_features"] = n_features;
    j["w_hidden"] = w_hidden;
    j["w_out"] = w_out;
    j["feat_mean"] = feat_mean;
    j["feat_std"] = feat_std;
    return j.dump(2) + "\n";
}

ToyModelParams ToyModelParams::from_json_string(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ToyModelParams p;
    p.window_len = j.at("window_len").get<int>();
    p.stride = j.at("stride").get<int>();
    p.alphabet_size = j.at("alphabet_size").get<int>();
    p.hidden = j.at("hidden").get<int>();
    p.w_hidden = j.at("w_hidden").get<std::vector<double>>();
    p.w_out = j.at("w_out").get<std::vector<double>>();
    p.feat_mean = j.at("feat_mean").get<std::vector<double>>();
    p.feat_std = j.at("feat_std").get<std::vector<double>>();
    if (p.w_hidden.size() != static_cast<size_t>(p.hidden) * (ToyModelParams::n_features + 1) ||
        p.w_out.size() != static_cast<size_t>(p.alphabet_size) * (p.hidden + 1))
        throw std::invalid_argument("ToyModelParams: weight shape mismatch");
    return p;
}

void ToyModelParams::save(const std::filesystem::path& path) const {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path.string());
    out << to_json_string();
}

ToyModelParams ToyModelParams::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open model file: " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json_string(ss.str());
}

std::vector<double> window_features(std::span<const float> samples, int start, int len) {
    if (len < 8 || start < 0 || start + len > static_cast<int>(samples.size()))
        throw std::out_of_range("window_features: bad window");
    double sum = 0.0, sum2 = 0.0;
    double mn = samples[start], mx = samples[start];
    for (int i = start; i < start + len; ++i) {
        const double v = samples[i];
        sum += v;
        sum2 += v * v;
        mn = std::min(mn, static_cast<double>(samples[i]));
        mx = std::max(mx, static_cast<double>(samples[i]));
    }
    const double mean = sum / len;
    const double var = std::max(0.0, sum2 / len - mean * mean);
    const double slope = (samples[start + len - 1] - samples[start]) / (len - 1);
    std::vector<double> f{mean, std::sqrt(var), mn, mx, slope};
    const int quarter = len / 4;
    for (int q = 0; q < 4; ++q) {
        double qs = 0.0;
        for (int i = 0; i < quarter; ++i) qs += samples[start + q * quarter + i];
        f.push_back(qs / quarter);
    }
    return f;
}

namespace {

constexpr int kF1 = ToyModelParams::n_features + 1;

// standardized feature vector with trailing bias 1
std::vector<double> standardized(const std::vector<double>& f, const ToyModelParams& p) {
    std::vector<double> out(kF1, 1.0);
    for (int i = 0; i < ToyModelParams::n_features; ++i) {
        const double mu = p.feat_mean.empty() ? 0.0 : p.feat_mean[i];
        const double sd = p.feat_std.empty() ? 1.0 : p.feat_std[i];
        out[i] = (f[i] - mu) / (sd > 1e-12 ? sd : 1.0);
    }
    return out;
}

int n_windows(const sim::Squiggle& sq, const ToyModelParams& p) {
    const int n = static_cast<int>(sq.samples.size());
    if (n < p.window_len) return 0;
    return (n - p.window_len) / p.stride + 1;
}

// hidden activations with trailing bias 1
std::vector<double> hidden_of(const std::vector<double>& f, const ToyModelParams& p) {
    std::vector<double> h(p.hidden + 1, 1.0);
    for (int j = 0; j < p.hidden; ++j) {
        double z = 0.0;
        for (int i = 0; i < kF1; ++i) z += p.w_hidden[static_cast<size_t>(j) * kF1 + i] * f[i];
        h[j] = std::tanh(z);
    }
    return h;
}

}  // namespace

ctc::EmissionMatrix toy_emissions(const sim::Squiggle& squiggle, const ToyModelParams& params) {
    const int T = n_windows(squiggle, params);
    if (T < 1) throw std::invalid_argument("toy_emissions: squiggle shorter than one window");
    const int A = params.alphabet_size;
    ctc::EmissionMatrix m = ctc::EmissionMatrix::zeros(T, A);
    for (int t = 0; t < T; ++t) {
        const auto f = standardized(
            window_features(squiggle.samples, t * params.stride, params.window_len), params);
        const auto h = hidden_of(f, params);
        double max_logit = -1e300;
        std::vector<double> logits(A, 0.0);
        for (int a = 0; a < A; ++a) {
            double z = 0.0;
            for (int j = 0; j <= params.hidden; ++j)
                z += params.w_out[static_cast<size_t>(a) * (params.hidden + 1) + j] * h[j];
            logits[a] = z;
            max_logit = std::max(max_logit, z);
        }
        double denom = 0.0;
        for (int a = 0; a < A; ++a) denom += std::exp(logits[a] - max_logit);
        for (int a = 0; a < A; ++a) m.at(t, a) = std::exp(logits[a] - max_logit) / denom;
    }
    return m;
}

double toy_loss_and_gradient(const std::vector<std::pair<sim::Squiggle, std::vector<int>>>& data,
                             const ToyModelParams& params, std::vector<double>* gradient,
                             int* skipped) {
    const int A = params.alphabet_size;
    const int H = params.hidden;
    const size_t n_w1 = params.w_hidden.size();
    if (gradient) gradient->assign(n_w1 + params.w_out.size(), 0.0);
    double total_loss = 0.0;
    int used = 0, skip = 0;
    for (const auto& [squiggle, target] : data) {
        const int T = n_windows(squiggle, params);
        if (T < 1 || ctc::min_windows_for_target(target) > T) {
            ++skip;
            continue;
        }
        const auto emissions = toy_emissions(squiggle, params);
        const auto grad = ctc::ctc_gradient(emissions, target);
        if (!grad.feasible) {
            ++skip;
            continue;
        }
        total_loss += grad.loss;
        ++used;
        if (gradient) {
            for (int t = 0; t < T; ++t) {
                const auto f = standardized(
                    window_features(squiggle.samples, t * params.stride, params.window_len),
                    params);
                const auto h = hidden_of(f, params);
                std::vector<double> dh(H, 0.0);
                for (int a = 0; a < A; ++a) {
                    const double g = grad.dlogits[static_cast<size_t>(t) * A + a];
                    for (int j = 0; j <= H; ++j)
                        (*gradient)[n_w1 + static_cast<size_t>(a) * (H + 1) + j] += g * h[j];
                    for (int j = 0; j < H; ++j)
                        dh[j] += g * params.w_out[static_cast<size_t>(a) * (H + 1) + j];
                }
                for (int j = 0; j < H; ++j) {
                    const double dpre = dh[j] * (1.0 - h[j] * h[j]);
                    for (int i = 0; i < kF1; ++i)
                        (*gradient)[static_cast<size_t>(j) * kF1 + i] += dpre * f[i];
                }
            }
        }
    }
    if (skipped) *skipped = skip;
    if (used == 0) return 0.0;
    if (gradient)
        for (auto& g : *gradient) g /= used;
    return total_loss / used;
}

ToyTrainStats train_toy_caller(const std::vector<std::pair<sim::Squiggle, std::vector<int>>>& data,
                               ToyModelParams& params, int epochs, double learning_rate) {
    if (params.alphabet_size < 2) throw std::invalid_argument("train_toy_caller: init params first");
    ToyTrainStats stats;

    // fit feature standardization once, up front
    if (params.feat_mean.empty()) {
        std::vector<double> sum(ToyModelParams::n_features, 0.0),
            sum2(ToyModelParams::n_features, 0.0);
        long count = 0;
        for (const auto& [squiggle, target] : data) {
            (void)target;
            const int T = n_windows(squiggle, params);
            for (int t = 0; t < T; ++t) {
                const auto f =
                    window_features(squiggle.samples, t * params.stride, params.window_len);
                for (int i = 0; i < ToyModelParams::n_features; ++i) {
                    sum[i] += f[i];
                    sum2[i] += f[i] * f[i];
                }
                ++count;
            }
        }
        params.feat_mean.assign(ToyModelParams::n_features, 0.0);
        params.feat_std.assign(ToyModelParams::n_features, 1.0);
        if (count > 0) {
            for (int i = 0; i < ToyModelParams::n_features; ++i) {
                params.feat_mean[i] = sum[i] / count;
                const double var =
                    std::max(0.0, sum2[i] / count - params.feat_mean[i] * params.feat_mean[i]);
                params.feat_std[i] = std::sqrt(var) > 1e-9 ? std::sqrt(var) : 1.0;
            }
        }
    }

    std::vector<double> grad;
    const size_t n_w1 = params.w_hidden.size();
    for (int epoch = 0; epoch < epochs; ++epoch) {
        int skip = 0;
        const double loss = toy_loss_and_gradient(data, params, &grad, &skip);
        stats.epoch_losses.push_back(loss);
        stats.skipped = skip;
        for (size_t i = 0; i < n_w1; ++i) params.w_hidden[i] -= learning_rate * grad[i];
        for (size_t i = 0; i < params.w_out.size(); ++i)
            params.w_out[i] -= learning_rate * grad[n_w1 + i];
    }
    int skip = 0;
    stats.epoch_losses.push_back(toy_loss_and_gradient(data, params, nullptr, &skip));
    return stats;
}

}  // namespace motifstore::caller
