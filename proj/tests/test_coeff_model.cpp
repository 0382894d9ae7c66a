#include "derivdepth/coeff_model.hpp"
#include "derivdepth/errors.hpp"
#include "derivdepth/filter_bank.hpp"
#include "derivdepth/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

using namespace derivdepth;
using testing_support::TempDir;

namespace {

double wcss(const std::vector<double>& samples, const std::vector<double>& centers) {
    double total = 0.0;
    for (double s : samples) {
        double best = INFINITY;
        for (double c : centers) best = std::min(best, (s - c) * (s - c));
        total += best;
    }
    return total;
}

std::vector<double> random_simplex(std::mt19937_64& rng, int m) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> p(m);
    double s = 0.0;
    for (double& v : p) s += (v = e(rng));
    for (double& v : p) v /= s;
    return p;
}

WeightMap map_from_rows(int w, int h, std::vector<int> filters, int m, const std::vector<std::vector<double>>& rows) {
    WeightMap out(w, h, std::move(filters), m);
    for (std::size_t r = 0; r < rows.size(); ++r)
        for (int j = 0; j < m; ++j) out.raw()[r * m + j] = static_cast<float>(rows[r][j]);
    return out;
}

}  // namespace

TEST_SUITE("coeff_model") {

TEST_CASE("kmeans small examples") {
    const std::vector<double> a{0, 0, 10, 10};
    CHECK(kmeans_1d(a, 2, 0) == std::vector<double>{0, 10});
    const std::vector<double> b(7, 5.0);
    CHECK(kmeans_1d(b, 1, 0) == std::vector<double>{5});
    CHECK_THROWS_WITH(kmeans_1d(a, 5, 0), "insufficient samples");
}

TEST_CASE("kmeans beats the true means on a 3-component mixture") {
    std::mt19937_64 rng(42);
    const double true_means[3] = {-4.0, 0.5, 6.0};
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> samples;
    for (int k = 0; k < 10000; ++k) samples.push_back(true_means[k % 3] + n(rng));
    const auto res = kmeans_1d_detailed(samples, 3, 0);
    CHECK(wcss(samples, res.centers) <= wcss(samples, {true_means, true_means + 3}));
    CHECK(std::is_sorted(res.centers.begin(), res.centers.end()));
}

TEST_CASE("kmeans objective never increases") {
    std::mt19937_64 rng(9);
    std::student_t_distribution<double> t(2.0);
    for (int trial = 0; trial < 20; ++trial) {
        std::vector<double> samples(500 + 100 * trial);
        for (double& s : samples) s = t(rng);
        const auto res = kmeans_1d_detailed(samples, 16, trial);
        REQUIRE(!res.objective.empty());
        for (std::size_t k = 1; k < res.objective.size(); ++k) {
            CHECK(res.objective[k] <= res.objective[k - 1] * (1 + 1e-12));
        }
        CHECK(res.objective.back() == doctest::Approx(wcss(samples, res.centers)).epsilon(1e-9));
    }
}

TEST_CASE("fit: exact values give floored variance") {
    std::vector<double> samples;
    for (int rep = 0; rep < 5; ++rep)
        for (double v : {-2.0, 0.0, 1.0, 3.5}) samples.push_back(v);
    const MixtureModel m = fit_mixture_model({samples, samples}, 4, 0, 0);
    CHECK(std::vector<double>(m.means(1).begin(), m.means(1).end()) == std::vector<double>{-2, 0, 1, 3.5});
    CHECK(m.variance(0) == MixtureModel::kVarianceFloor);
}

TEST_CASE("fit: min_assign drops small clusters") {
    const std::vector<double> samples{0, 0, 0, 0, 100};
    // the size-4 cluster has zero spread and the singleton is excluded
    CHECK(fit_mixture_model({samples}, 2, 2, 0).variance(0) == MixtureModel::kVarianceFloor);
    const std::vector<double> spread{-1, 1, -1, 1, 100};
    CHECK(fit_mixture_model({spread}, 2, 2, 0).variance(0) == doctest::Approx(1.0));
    // with nothing qualifying every non-empty cluster counts
    CHECK(fit_mixture_model({spread}, 2, 10, 0).variance(0) == doctest::Approx(0.5));
    CHECK(default_min_assign(100) == 10);
    CHECK(default_min_assign(50000) == 50);
}

TEST_CASE("fit on a smooth corpus covers the bulk of each filter") {
    const FilterBank bank = build_filter_bank();
    const auto corpus = synth_corpus(100, 32, 32, 5);
    const auto samples = collect_coefficient_samples(corpus, bank, 4);
    const int M = 64;
    const MixtureModel model = fit_mixture_model(samples, M, std::nullopt, 0);
    CHECK(model == fit_mixture_model(samples, M, std::nullopt, 0));
    for (int i = 0; i < bank.size(); ++i) {
        std::vector<double> s = samples[i];
        std::sort(s.begin(), s.end());
        const auto pct = [&](double q) { return s[static_cast<std::size_t>(q * (s.size() - 1))]; };
        const auto means = model.means(i);
        CAPTURE(i);
        CHECK(means.front() <= pct(0.005));
        CHECK(means.back() >= pct(0.995));
        CHECK(std::adjacent_find(means.begin(), means.end(), std::greater_equal<>()) == means.end());
        CHECK(model.variance(i) > 0.0);
    }
}

TEST_CASE("soft targets") {
    const MixtureModel m(1, 3, {0, 1, 2}, {1.0});
    const auto q = soft_targets(1.0, m, 0);
    const double e = std::exp(-0.5);
    CHECK(q[0] == doctest::Approx(e / (1 + 2 * e)).epsilon(1e-12));
    CHECK(q[1] == doctest::Approx(1 / (1 + 2 * e)).epsilon(1e-12));
    CHECK(std::abs(q[0] - 0.274068619061197) <= 1e-12);
    CHECK(std::abs(q[1] - 0.451862761877606) <= 1e-12);
    CHECK(q[2] == q[0]);

    const MixtureModel far(1, 5, {-100, -40, 0, 40, 100}, {1.0});
    CHECK(soft_targets(0.0, far, 0)[2] >= 1 - 1e-80);
    const MixtureModel pair(1, 4, {-100, 1, 3, 100}, {1.0});
    const auto half = soft_targets(2.0, pair, 0);
    CHECK(std::abs(half[1] - 0.5) <= 1e-12);
    CHECK(std::abs(half[2] - 0.5) <= 1e-12);

    for (double w : {-1e6, -1e3, -3.0, 0.0, 0.7, 1e3, 1e6}) {
        const auto r = soft_targets(w, m, 0);
        double s = 0.0;
        for (double v : r) {
            CHECK(v >= 0.0);
            CHECK(std::isfinite(v));
            s += v;
        }
        CHECK(std::abs(s - 1.0) <= 1e-9);
    }
}

TEST_CASE("KL loss") {
    const int M = 64;
    const MixtureModel model = testing_support::uniform_model(3, M, -1, 1, 1.0);
    std::vector<double> one_hot(M, 0.0), uniform(M, 1.0 / M);
    one_hot[17] = 1.0;
    const WeightMap q = map_from_rows(1, 1, {1}, M, {one_hot});
    const WeightMap p = map_from_rows(1, 1, {1}, M, {uniform});
    CHECK(kl_loss(p, q, model) == doctest::Approx(std::log(64.0)).epsilon(1e-6));
    CHECK(std::abs(kl_loss(p, q, model) - 4.1589) < 1e-4);

    std::mt19937_64 rng(3);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::vector<double>> a, b;
        for (int r = 0; r < 4 * 3 * 2; ++r) {
            a.push_back(random_simplex(rng, M));
            b.push_back(random_simplex(rng, M));
        }
        const WeightMap pa = map_from_rows(4, 3, {0, 2}, M, a);
        const WeightMap pb = map_from_rows(4, 3, {0, 2}, M, b);
        CHECK(std::abs(kl_loss(pa, pa, model)) <= 1e-9);
        CHECK(kl_loss(pa, pb, model) > 0.0);
    }
    CHECK_THROWS(kl_loss(p, map_from_rows(1, 1, {2}, M, {one_hot}), model));
}

TEST_CASE("GMM1 round trip is bit-exact") {
    TempDir dir("gmm");
    std::mt19937_64 rng(5);
    std::normal_distribution<double> n;
    std::vector<double> means, vars;
    for (int i = 0; i < 6; ++i) {
        std::vector<double> row(9);
        for (double& v : row) v = n(rng);
        std::sort(row.begin(), row.end());
        means.insert(means.end(), row.begin(), row.end());
        vars.push_back(std::exp(n(rng)));
    }
    const MixtureModel m(6, 9, means, vars);
    write_mixture_model(dir / "m.gmm", m);
    CHECK(read_mixture_model(dir / "m.gmm") == m);
    CHECK(std::filesystem::file_size(dir / "m.gmm") == 4 + 8 + 6 * 9 * 8 + 6 * 8);

    std::ifstream in(dir / "m.gmm", std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), {});
    CHECK(bytes.substr(0, 4) == "GMM1");
    std::ofstream(dir / "bad.gmm", std::ios::binary) << "GMM2" << bytes.substr(4);
    CHECK_THROWS_AS(read_mixture_model(dir / "bad.gmm"), BadMagicError);
    std::ofstream(dir / "short.gmm", std::ios::binary) << bytes.substr(0, bytes.size() - 3);
    CHECK_THROWS_AS(read_mixture_model(dir / "short.gmm"), TruncatedPayloadError);
}

TEST_CASE("model validation") {
    CHECK_THROWS(MixtureModel(1, 2, {1, 1}, {1}));
    CHECK_THROWS(MixtureModel(1, 2, {0, 1}, {0}));
    CHECK_THROWS(MixtureModel(1, 2, {0, 1}, {1, 1}));
}

}  // TEST_SUITE
