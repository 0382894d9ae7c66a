#include "derivdepth/field.hpp"
#include "derivdepth/metrics.hpp"
#include "derivdepth/pfm.hpp"
#include "derivdepth/synthetic.hpp"
#include "support.hpp"

#include <doctest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sys/wait.h>

using namespace derivdepth;
using testing_support::TempDir;

namespace {

struct Run {
    int status;
    std::string out;
};

Run run(const std::string& args) {
    const std::string cmd = std::string(DERIVDEPTH_CLI) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    std::array<char, 4096> buf;
    while (std::size_t n = std::fread(buf.data(), 1, buf.size(), pipe)) out.append(buf.data(), n);
    const int raw = pclose(pipe);
    return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

std::size_t count_lines(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

std::string q(const std::filesystem::path& p) { return "'" + p.string() + "'"; }

}  // namespace

TEST_SUITE("cli") {

TEST_CASE("bank dump") {
    TempDir dir("cli_bank");
    REQUIRE(run("bank --out-dir " + q(dir / "a")).status == 0);
    REQUIRE(run("bank --out-dir " + q(dir / "b")).status == 0);
    const std::string index = slurp(dir / "a" / "bank.txt");
    CHECK(count_lines(index) == 64);
    CHECK(index.rfind("0 impulse 0 0 1.000000000\n", 0) == 0);
    CHECK(index.find("\n1 gaussian 1 0 0.250000000\n") != std::string::npos);
    int pfms = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir / "a")) {
        if (e.path().extension() != ".pfm") continue;
        ++pfms;
        CHECK(slurp(e.path()) == slurp(dir / "b" / e.path().filename()));
    }
    CHECK(pfms == 64);
    CHECK(index == slurp(dir / "b" / "bank.txt"));
    const Run bad = run("bank --out-dir ''");
    CHECK(bad.status != 0);
    CHECK(count_lines(bad.out) == 1);
}

TEST_CASE("fit, predict, globalize, eval") {
    TempDir dir("cli_pipe");
    std::filesystem::create_directories(dir / "corpus");
    const auto corpus = synth_corpus(20, 32, 32, 3);
    for (std::size_t k = 0; k < corpus.size(); ++k) {
        write_pfm(dir / "corpus" / ("map_" + std::to_string(k) + ".pfm"), scene_to_depth(corpus[k]));
    }
    const ScalarField truth = synth_scene(32, 32, 8);
    write_pfm(dir / "truth.pfm", scene_to_depth(truth));

    REQUIRE(run("fit --corpus " + q(dir / "corpus") + " -M 8 --seed 1 --out " + q(dir / "m.gmm")).status == 0);
    REQUIRE(run("fit --corpus " + q(dir / "corpus") + " -M 8 --seed 1 --out " + q(dir / "m2.gmm")).status == 0);
    CHECK(slurp(dir / "m.gmm") == slurp(dir / "m2.gmm"));
    const MixtureModel model = read_mixture_model(dir / "m.gmm");
    CHECK(model.num_filters() == 64);
    CHECK(model.num_components() == 8);
    for (int i = 0; i < 64; ++i) {
        const auto m = model.means(i);
        CHECK(std::adjacent_find(m.begin(), m.end(), std::greater_equal<>()) == m.end());
    }
    CHECK(run("fit --corpus " + q(dir / "corpus") + " -M 100000 --out " + q(dir / "x.gmm")).status != 0);
    std::filesystem::create_directories(dir / "empty");
    CHECK(run("fit --corpus " + q(dir / "empty") + " --out " + q(dir / "x.gmm")).status != 0);

    const std::string predict = "predict-synth --depth " + q(dir / "truth.pfm") + " --model " + q(dir / "m.gmm") +
                                " --subset scale0,scale1 --ambiguity 0.2 --temperature 1.5 --seed 4 --out ";
    REQUIRE(run(predict + q(dir / "w.owm")).status == 0);
    REQUIRE(run(predict + q(dir / "w2.owm")).status == 0);
    CHECK(slurp(dir / "w.owm") == slurp(dir / "w2.owm"));

    const Run g = run("globalize --weights " + q(dir / "w.owm") + " --model " + q(dir / "m.gmm") +
                      " --subset scale0,scale1 --out-scene " + q(dir / "y.pfm") + " --out-depth " +
                      q(dir / "z.pfm") + " --trace " + q(dir / "t.csv"));
    REQUIRE(g.status == 0);
    const std::string trace = slurp(dir / "t.csv");
    CHECK(trace.rfind("iter,beta,objective,residual\n", 0) == 0);
    CHECK(count_lines(trace) == 138);
    CHECK(read_pfm(dir / "y.pfm").width() == 32);

    CHECK(run("globalize --weights " + q(dir / "w.owm") + " --model " + q(dir / "m.gmm") +
              " --subset scale0 --beta-final 0.01 --out-scene " + q(dir / "y0.pfm")).status == 0);
    const Run missing_filter = run("globalize --weights " + q(dir / "w.owm") + " --model " + q(dir / "m.gmm") +
                                   " --subset scale2 --out-scene " + q(dir / "y1.pfm"));
    CHECK(missing_filter.status != 0);
    CHECK(count_lines(missing_filter.out) == 1);
    CHECK(run("globalize --weights " + q(dir / "w.owm") + " --model " + q(dir / "m.gmm") + " --subset 99").status != 0);

    const Run same = run("eval --pred " + q(dir / "truth.pfm") + " --truth " + q(dir / "truth.pfm"));
    CHECK(same.status == 0);
    CHECK(same.out ==
          "{\"rmse_lin\": 0, \"rmse_log\": 0, \"abs_rel\": 0, \"sqr_rel\": 0, \"delta1\": 1, \"delta2\": 1, "
          "\"delta3\": 1}\n");
    write_pfm(dir / "t2.pfm", ScalarField(2, 1, std::vector<double>{2.0, 2.0}));
    write_pfm(dir / "p2.pfm", ScalarField(2, 1, std::vector<double>{2.0, 2.6}));
    const Run hand = run("eval --pred " + q(dir / "p2.pfm") + " --truth " + q(dir / "t2.pfm"));
    CHECK(hand.out == evaluate(read_pfm(dir / "p2.pfm"), read_pfm(dir / "t2.pfm")).to_json() + "\n");
    CHECK(run("eval --pred " + q(dir / "p2.pfm") + " --truth " + q(dir / "truth.pfm")).status != 0);
    const Run gone = run("eval --pred " + q(dir / "nope.pfm") + " --truth " + q(dir / "truth.pfm"));
    CHECK(gone.status != 0);
    CHECK(count_lines(gone.out) == 1);
}

}  // TEST_SUITE
