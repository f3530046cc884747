#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <map>

#include "motifstore/ctc.hpp"
#include "motifstore/rng.hpp"

using namespace motifstore;
using namespace motifstore::ctc;

namespace {

EmissionMatrix random_emissions(Rng& rng, int T, int A, double floor = 0.02) {
    EmissionMatrix m = EmissionMatrix::zeros(T, A);
    for (int t = 0; t < T; ++t) {
        double sum = 0;
        for (int a = 0; a < A; ++a) {
            m.at(t, a) = floor + rng.uniform01();
            sum += m.at(t, a);
        }
        for (int a = 0; a < A; ++a) m.at(t, a) /= sum;
    }
    return m;
}

// Exhaustive sum over all |A|^T alignments that collapse to the target.
double brute_force_target_prob(const EmissionMatrix& m, const std::vector<int>& target) {
    const int T = m.n_windows, A = m.alphabet_size;
    std::vector<int> align(T, 0);
    double total = 0.0;
    while (true) {
        if (collapse(align, A - 1) == target) {
            double p = 1.0;
            for (int t = 0; t < T; ++t) p *= m.at(t, align[t]);
            total += p;
        }
        int i = T - 1;
        while (i >= 0 && align[i] == A - 1) align[i--] = 0;
        if (i < 0) break;
        ++align[i];
    }
    return total;
}

// Probability of every collapsed sequence, by the same enumeration.
std::map<std::vector<int>, double> brute_force_all(const EmissionMatrix& m) {
    const int T = m.n_windows, A = m.alphabet_size;
    std::vector<int> align(T, 0);
    std::map<std::vector<int>, double> out;
    while (true) {
        double p = 1.0;
        for (int t = 0; t < T; ++t) p *= m.at(t, align[t]);
        out[collapse(align, A - 1)] += p;
        int i = T - 1;
        while (i >= 0 && align[i] == A - 1) align[i--] = 0;
        if (i < 0) break;
        ++align[i];
    }
    return out;
}

EmissionMatrix softmax_of(const std::vector<double>& logits, int T, int A) {
    EmissionMatrix m = EmissionMatrix::zeros(T, A);
    for (int t = 0; t < T; ++t) {
        double mx = -1e300;
        for (int a = 0; a < A; ++a) mx = std::max(mx, logits[t * A + a]);
        double sum = 0;
        for (int a = 0; a < A; ++a) sum += std::exp(logits[t * A + a] - mx);
        for (int a = 0; a < A; ++a) m.at(t, a) = std::exp(logits[t * A + a] - mx) / sum;
    }
    return m;
}

}  // namespace

TEST_CASE("collapse merges runs then drops blanks") {
    // token 0 = A, token 1 = G, blank = 2
    const int blank = 2;
    std::vector<int> a{0, blank, 0, 0, blank, 1, 1};
    CHECK(collapse(a, blank) == std::vector<int>{0, 0, 1});  // [A,phi,A,A,phi,G,G] -> [A,A,G]
    CHECK(collapse(std::vector<int>{blank, blank, blank}, blank).empty());
    CHECK(collapse(std::vector<int>{1, 1, 1}, blank) == std::vector<int>{1});
    CHECK(collapse(std::vector<int>{}, blank).empty());
}

TEST_CASE("collapse is stable under blank reinsertion between distinct tokens") {
    Rng rng(31);
    for (int trial = 0; trial < 100; ++trial) {
        const int blank = 4;
        std::vector<int> seq;
        int prev = -1;
        const size_t len = rng.below(6);
        while (seq.size() < len) {
            const int tok = static_cast<int>(rng.below(4));
            if (tok == prev) continue;
            seq.push_back(tok);
            prev = tok;
        }
        // reinsert blanks arbitrarily between the (distinct-adjacent) tokens
        std::vector<int> padded;
        for (int tok : seq) {
            for (uint64_t i = rng.below(3); i > 0; --i) padded.push_back(blank);
            padded.push_back(tok);
        }
        for (uint64_t i = rng.below(3); i > 0; --i) padded.push_back(blank);
        CHECK(collapse(padded, blank) == seq);
    }
}

TEST_CASE("ctc_forward single-window, single-alignment case") {
    EmissionMatrix m = EmissionMatrix::zeros(1, 3);
    m.at(0, 0) = 0.7;
    m.at(0, 1) = 0.2;
    m.at(0, 2) = 0.1;
    const auto res = ctc_forward(m, std::vector<int>{0});
    CHECK(res.feasible);
    CHECK(res.loss == doctest::Approx(-std::log(0.7)).epsilon(1e-12));
    CHECK(res.loss == doctest::Approx(0.356675).epsilon(1e-5));
}

TEST_CASE("ctc_forward two uniform windows over {A, blank}") {
    // P(target [A]) = P(AA) + P(Aphi) + P(phiA) = 0.75
    EmissionMatrix m = EmissionMatrix::zeros(2, 2);
    for (int t = 0; t < 2; ++t) m.at(t, 0) = m.at(t, 1) = 0.5;
    const auto res = ctc_forward(m, std::vector<int>{0});
    CHECK(res.feasible);
    CHECK(std::exp(-res.loss) == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(res.loss == doctest::Approx(-std::log(0.75)).epsilon(1e-12));
}

TEST_CASE("ctc_forward repeated token needs a separating blank") {
    // T=3, target [A,A]: only alignments of the form A phi A are valid
    Rng rng(8);
    const auto m = random_emissions(rng, 3, 3);
    const std::vector<int> target{0, 0};
    const auto res = ctc_forward(m, target);
    CHECK(res.feasible);
    const double direct = m.at(0, 0) * m.at(1, 2) * m.at(2, 0);
    CHECK(std::exp(-res.loss) == doctest::Approx(direct).epsilon(1e-12));
    CHECK(std::exp(-res.loss) == doctest::Approx(brute_force_target_prob(m, target)).epsilon(1e-12));
}

TEST_CASE("ctc_forward infeasible targets give a distinguished result") {
    Rng rng(9);
    const auto m = random_emissions(rng, 2, 3);
    const auto res = ctc_forward(m, std::vector<int>{0, 0});  // needs >= 3 windows
    CHECK_FALSE(res.feasible);
    CHECK(std::isinf(res.loss));
    CHECK(min_windows_for_target(std::vector<int>{0, 0}) == 3);
    CHECK(min_windows_for_target(std::vector<int>{0, 1}) == 2);
    CHECK(min_windows_for_target(std::vector<int>{}) == 0);
}

TEST_CASE("ctc_forward matches brute-force enumeration: T<=8, |alphabet|<=4") {
    Rng rng(0xc7c);
    int checked = 0;
    for (int trial = 0; trial < 100; ++trial) {
        const int T = 1 + static_cast<int>(rng.below(8));
        const int A = 2 + static_cast<int>(rng.below(3));
        const auto m = random_emissions(rng, T, A);
        const int L = static_cast<int>(rng.below(4));
        std::vector<int> target;
        for (int i = 0; i < L; ++i) target.push_back(static_cast<int>(rng.below(A - 1)));
        const double brute = brute_force_target_prob(m, target);
        const auto res = ctc_forward(m, target);
        const double got = res.feasible ? std::exp(-res.loss) : 0.0;
        CHECK(std::abs(got - brute) < 1e-10);
        ++checked;
    }
    CHECK(checked == 100);
}

TEST_CASE("ctc_gradient closed form for a single window") {
    // loss = -ln softmax(u)[target]; gradient = softmax - onehot
    std::vector<double> logits{0.3, -0.7, 1.1};
    const auto m = softmax_of(logits, 1, 3);
    const auto grad = ctc_gradient(m, std::vector<int>{0});
    REQUIRE(grad.feasible);
    CHECK(grad.dlogits[0] == doctest::Approx(m.at(0, 0) - 1.0).epsilon(1e-12));
    CHECK(grad.dlogits[1] == doctest::Approx(m.at(0, 1)).epsilon(1e-12));
    CHECK(grad.dlogits[2] == doctest::Approx(m.at(0, 2)).epsilon(1e-12));
}

TEST_CASE("ctc_gradient matches central finite differences on 100 instances") {
    Rng rng(0x9d);
    double worst = 0.0;
    int checked = 0;
    while (checked < 100) {
        const int T = 2 + static_cast<int>(rng.below(5));
        const int A = 2 + static_cast<int>(rng.below(3));
        std::vector<double> logits(static_cast<size_t>(T) * A);
        for (auto& u : logits) u = 2.0 * rng.uniform01() - 1.0;
        const int L = 1 + static_cast<int>(rng.below(2));
        std::vector<int> target;
        for (int i = 0; i < L; ++i) target.push_back(static_cast<int>(rng.below(A - 1)));
        if (min_windows_for_target(target) > T) continue;
        ++checked;

        const auto grad = ctc_gradient(softmax_of(logits, T, A), target);
        REQUIRE(grad.feasible);

        const double eps = 1e-6;
        double max_abs_grad = 0.0, max_abs_diff = 0.0;
        for (size_t i = 0; i < logits.size(); ++i) {
            auto perturbed = logits;
            perturbed[i] += eps;
            const double up = ctc_forward(softmax_of(perturbed, T, A), target).loss;
            perturbed[i] -= 2 * eps;
            const double dn = ctc_forward(softmax_of(perturbed, T, A), target).loss;
            const double fd = (up - dn) / (2 * eps);
            max_abs_grad = std::max(max_abs_grad, std::abs(fd));
            max_abs_diff = std::max(max_abs_diff, std::abs(fd - grad.dlogits[i]));
        }
        // normwise relative error against the finite-difference reference
        const double rel = max_abs_diff / std::max(max_abs_grad, 1e-12);
        worst = std::max(worst, rel);
        CHECK(rel < 1e-5);
    }
    MESSAGE("worst normwise relative error: ", worst);
}

TEST_CASE("ctc_gradient refuses infeasible targets") {
    Rng rng(77);
    const auto m = random_emissions(rng, 2, 3);
    const auto grad = ctc_gradient(m, std::vector<int>{0, 0});
    CHECK_FALSE(grad.feasible);
    CHECK(grad.dlogits.empty());
}

TEST_CASE("greedy_decode collapses the argmax path") {
    // rows: argmax = M1, blank, M2, M2  ->  [M1, M2]
    EmissionMatrix m = EmissionMatrix::zeros(4, 3);
    m.at(0, 0) = 0.8; m.at(0, 1) = 0.1; m.at(0, 2) = 0.1;
    m.at(1, 0) = 0.2; m.at(1, 1) = 0.1; m.at(1, 2) = 0.7;
    m.at(2, 0) = 0.3; m.at(2, 1) = 0.6; m.at(2, 2) = 0.1;
    m.at(3, 0) = 0.1; m.at(3, 1) = 0.5; m.at(3, 2) = 0.4;
    const auto res = greedy_decode(m);
    CHECK(res.tokens == std::vector<int>{0, 1});
    CHECK(res.confidences[0] == doctest::Approx(0.8));
    CHECK(res.confidences[1] == doctest::Approx(0.6));  // max over the merged run
    CHECK(res.spans[1] == std::pair<int, int>{2, 3});
}

TEST_CASE("greedy_decode all-blank argmax is empty") {
    EmissionMatrix m = EmissionMatrix::zeros(3, 3);
    for (int t = 0; t < 3; ++t) {
        m.at(t, 0) = 0.2;
        m.at(t, 1) = 0.2;
        m.at(t, 2) = 0.6;
    }
    CHECK(greedy_decode(m).tokens.empty());
}

TEST_CASE("greedy_decode ties break toward the lower token index, blank last") {
    EmissionMatrix m = EmissionMatrix::zeros(2, 4);
    m.at(0, 0) = 0.1; m.at(0, 1) = 0.4; m.at(0, 2) = 0.4; m.at(0, 3) = 0.1;
    m.at(1, 0) = 0.35; m.at(1, 1) = 0.2; m.at(1, 2) = 0.1; m.at(1, 3) = 0.35;
    const auto res = greedy_decode(m);
    // window 0: tokens 1 and 2 tie -> 1; window 1: token 0 ties blank -> 0
    CHECK(res.tokens == std::vector<int>{1, 0});
    CHECK_FALSE(std::count(res.tokens.begin(), res.tokens.end(), 3));
}

TEST_CASE("greedy output never contains the blank token") {
    Rng rng(0xabc);
    for (int trial = 0; trial < 200; ++trial) {
        const auto m = random_emissions(rng, 1 + static_cast<int>(rng.below(10)), 4);
        for (int tok : greedy_decode(m).tokens) CHECK(tok != 3);
    }
}

TEST_CASE("beam_decode equals greedy on near-deterministic emissions") {
    Rng rng(0x3e3);
    for (int trial = 0; trial < 50; ++trial) {
        const int T = 1 + static_cast<int>(rng.below(8));
        const int A = 3;
        EmissionMatrix m = EmissionMatrix::zeros(T, A);
        for (int t = 0; t < T; ++t) {
            const int big = static_cast<int>(rng.below(A));
            for (int a = 0; a < A; ++a) m.at(t, a) = big == a ? 0.992 : 0.008 / (A - 1);
        }
        const auto greedy = greedy_decode(m);
        for (int W : {1, 4, 64})
            CHECK(beam_decode(m, W).tokens == greedy.tokens);
    }
}

TEST_CASE("beam_decode with a wide beam equals exact argmax over collapsed sequences") {
    Rng rng(0xbea);
    for (int trial = 0; trial < 40; ++trial) {
        const int T = 2 + static_cast<int>(rng.below(5));  // <= 6
        const int A = 3;
        const auto m = random_emissions(rng, T, A);
        const auto all = brute_force_all(m);
        const std::vector<int>* best_seq = nullptr;
        double best_p = -1;
        for (const auto& [seq, p] : all) {
            if (p > best_p) {
                best_p = p;
                best_seq = &seq;
            }
        }
        const auto beam = beam_decode(m, 64);
        CHECK(beam.tokens == *best_seq);
        CHECK(std::exp(beam.log_prob) == doctest::Approx(best_p).epsilon(1e-9));
    }
}

TEST_CASE("beam_decode W=1 equals greedy on the worked-example pattern") {
    // argmax path [A, phi, A, A, phi, G, G] with dominant probabilities
    EmissionMatrix m = EmissionMatrix::zeros(7, 3);
    const int path[7] = {0, 2, 0, 0, 2, 1, 1};
    for (int t = 0; t < 7; ++t)
        for (int a = 0; a < 3; ++a) m.at(t, a) = path[t] == a ? 0.9 : 0.05;
    const auto greedy = greedy_decode(m);
    CHECK(greedy.tokens == std::vector<int>{0, 0, 1});
    CHECK(beam_decode(m, 1).tokens == greedy.tokens);
}

TEST_CASE("beam_decode score is monotonically non-decreasing in W") {
    // Property domain: rows with a dominant token (0.55..0.95), the shape
    // model emissions actually take. Near-uniform rows can defeat any pruned
    // beam search: a narrow beam may keep a parent prefix that a wide beam
    // evicts, so no width ordering is a theorem on arbitrary inputs.
    Rng rng(0x8ee);
    for (int trial = 0; trial < 500; ++trial) {
        const int T = 2 + static_cast<int>(rng.below(7));
        const int A = 4;
        EmissionMatrix m = EmissionMatrix::zeros(T, A);
        for (int t = 0; t < T; ++t) {
            const int dom = static_cast<int>(rng.below(A));
            const double p = 0.55 + 0.4 * rng.uniform01();
            for (int a = 0; a < A; ++a) m.at(t, a) = a == dom ? p : (1 - p) / (A - 1);
        }
        double prev = -1e300;
        for (int W : {1, 2, 3, 4, 8, 16, 64}) {
            const double s = beam_decode(m, W).log_prob;
            CHECK(s >= prev - 1e-12);
            prev = s;
        }
    }
}

TEST_CASE("quality formula and saturation") {
    CHECK(quality(0.9) == doctest::Approx(10.0).epsilon(1e-9));
    CHECK(quality(0.99) == doctest::Approx(20.0).epsilon(1e-9));
    CHECK(quality(0.999) == doctest::Approx(30.0).epsilon(1e-9));
    CHECK(quality(0.0) == doctest::Approx(0.0));
    CHECK(quality(1.0 - 1e-12) == doctest::Approx(60.0));  // saturates at the cap
    CHECK(quality(1.0 - 1e-12, 80.0) == doctest::Approx(80.0));
    CHECK_THROWS_AS(quality(-0.1), std::domain_error);
    CHECK_THROWS_AS(quality(1.0), std::domain_error);
    CHECK_THROWS_AS(quality(1.5), std::domain_error);
}

TEST_CASE("emission matrix EMX1 roundtrip") {
    Rng rng(0xe3);
    const auto m = random_emissions(rng, 12, 5);
    const auto path = std::filesystem::temp_directory_path() / "motifstore_test.emx";
    write_emissions(path, m);
    const auto back = read_emissions(path);
    REQUIRE(back.n_windows == m.n_windows);
    REQUIRE(back.alphabet_size == m.alphabet_size);
    back.validate();  // rows renormalized to the invariant after float32 storage
    for (size_t i = 0; i < m.probs.size(); ++i)
        CHECK(back.probs[i] == doctest::Approx(m.probs[i]).epsilon(1e-5));
    std::filesystem::remove(path);
}

TEST_CASE("emission matrix validation rejects bad rows") {
    EmissionMatrix m = EmissionMatrix::zeros(1, 3);
    m.at(0, 0) = 0.5;
    m.at(0, 1) = 0.6;
    m.at(0, 2) = 0.1;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
    m.at(0, 1) = 0.4;
    CHECK_NOTHROW(m.validate());
    m.at(0, 0) = -0.1;
    m.at(0, 1) = 1.0;
    CHECK_THROWS_AS(m.validate(), std::invalid_argument);
}

TEST_CASE("token alphabet layout") {
    TokenAlphabet alphabet{8, 10};
    CHECK(alphabet.size() == 19);
    CHECK(alphabet.blank() == 18);
    CHECK(alphabet.is_motif(0));
    CHECK(alphabet.is_motif(7));
    CHECK(alphabet.is_spacer(8));
    CHECK(alphabet.spacer_token(9) == 17);
    CHECK(alphabet.is_blank(18));
    CHECK(alphabet.token_name(0) == "M0");
    CHECK(alphabet.token_name(8) == "S0");
    CHECK(alphabet.token_name(18) == "phi");
}
