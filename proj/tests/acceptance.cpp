// Acceptance suite: one pass/fail line per criterion, nonzero exit if any
// criterion fails. Heavier end-to-end runs live here rather than in the
// per-module tests.
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cfshift/data.hpp"
#include "cfshift/ecf.hpp"
#include "cfshift/loss.hpp"
#include "cfshift/net.hpp"
#include "cfshift/pca.hpp"
#include "cfshift/plot.hpp"
#include "cfshift/rng.hpp"
#include "cfshift/trainer.hpp"
#include "spectrum_oracle.hpp"

using namespace cfshift;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

void report(const std::string& label, bool ok, const std::string& detail) {
    std::printf("[%s] %s: %s\n", ok ? "PASS" : "FAIL", label.c_str(), detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

FeatureMatrix random_features(std::size_t n, std::size_t d, std::uint64_t seed,
                              double spread = 1.0, const std::string& id = "t") {
    rng::NormalSampler normal(seed);
    FeatureMatrix f;
    f.domain_id = id;
    f.values = Matrix(n, d);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) f.values(i, j) = spread * normal.next();
    return f;
}

// ---------------------------------------------------------------- C1
void criterion_1() {
    const auto start = Clock::now();
    rng::NormalSampler normal(451);
    FeatureMatrix f;
    f.values = Matrix(10000, 1);
    for (std::size_t i = 0; i < 10000; ++i) f.values(i, 0) = normal.next();
    FrequencyBank bank;
    bank.freqs = Matrix::from_rows({{0.5}, {1.0}, {2.0}});
    const EcfVector phi = ecf_eval(f, bank);
    double worst = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        const double w = bank.freqs(k, 0);
        const double expect = std::exp(-0.5 * w * w);  // CF of N(0,1) is real
        worst = std::max(worst, std::abs(phi.re[k] - expect));
        worst = std::max(worst, std::abs(phi.im[k] - 0.0));
    }
    const double elapsed = seconds_since(start);
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "max |ecf - exp(-w^2/2)| = %.4f (tol 0.05), %.2fs (cap 1s)", worst, elapsed);
    report("criterion 1 Gaussian CF oracle", worst <= 0.05 && elapsed < 1.0, detail);
}

// ---------------------------------------------------------------- C2
void criterion_2() {
    std::mt19937_64 gen(7);
    bool ok = true;
    std::string why = "boundedness, zero-frequency, shift covariance, brute force on 120 instances";
    for (int trial = 0; trial < 120 && ok; ++trial) {
        const std::size_t n = 1 + gen() % 8;
        const std::size_t d = 1 + gen() % 4;
        const std::size_t K = 2 + gen() % 12;
        const FeatureMatrix f = random_features(n, d, gen(), 2.0);
        FrequencyBank bank = sample_frequency_bank(d, K, 1.0, gen(), BankScheme::gaussian);
        for (std::size_t j = 0; j < d; ++j) bank.freqs(K - 1, j) = 0.0;
        const EcfVector phi = ecf_eval(f, bank);

        for (std::size_t k = 0; k < K; ++k)
            if (phi.re[k] * phi.re[k] + phi.im[k] * phi.im[k] > 1.0 + 1e-9) {
                ok = false;
                why = "boundedness violated";
            }
        if (std::abs(phi.re[K - 1] - 1.0) > 1e-12 || std::abs(phi.im[K - 1]) > 1e-12) {
            ok = false;
            why = "zero-frequency identity violated";
        }

        for (std::size_t k = 0; k < K; ++k) {
            std::complex<double> acc{0.0, 0.0};
            for (std::size_t i = 0; i < n; ++i) {
                double theta = 0.0;
                for (std::size_t j = 0; j < d; ++j) theta += bank.freqs(k, j) * f.values(i, j);
                acc += std::exp(std::complex<double>(0.0, theta));
            }
            acc /= static_cast<double>(n);
            if (std::abs(phi.re[k] - acc.real()) > 1e-12 ||
                std::abs(phi.im[k] - acc.imag()) > 1e-12) {
                ok = false;
                why = "brute-force equivalence violated";
            }
        }

        std::vector<double> shift(d);
        for (std::size_t j = 0; j < d; ++j) shift[j] = rng::uniform(gen, -1.0, 1.0);
        FeatureMatrix shifted = f;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < d; ++j) shifted.values(i, j) += shift[j];
        const EcfVector phi2 = ecf_eval(shifted, bank);
        for (std::size_t k = 0; k < K; ++k) {
            double wc = 0.0;
            for (std::size_t j = 0; j < d; ++j) wc += bank.freqs(k, j) * shift[j];
            const std::complex<double> expect = std::exp(std::complex<double>(0.0, wc)) *
                                                std::complex<double>(phi.re[k], phi.im[k]);
            if (std::abs(std::complex<double>(phi2.re[k], phi2.im[k]) - expect) > 1e-10) {
                ok = false;
                why = "shift covariance violated";
            }
        }
    }
    report("criterion 2 ECF properties", ok, why);
}

// ---------------------------------------------------------------- C3
void criterion_3() {
    std::mt19937_64 gen(13);
    bool ok = true;
    std::string why = "symmetry, self-distance, bound, permutation invariance on 120 instances";
    for (int trial = 0; trial < 120 && ok; ++trial) {
        const std::size_t d = 1 + gen() % 4;
        const std::size_t K = 1 + gen() % 24;
        const FeatureMatrix a = random_features(2 + gen() % 16, d, gen(), 2.0, "a");
        const FeatureMatrix b = random_features(2 + gen() % 16, d, gen(), 2.0, "b");
        const FrequencyBank bank = sample_frequency_bank(d, K, 1.0, gen(), BankScheme::gaussian);
        const EcfVector pa = ecf_eval(a, bank);
        const EcfVector pb = ecf_eval(b, bank);

        if (cfl_distance(pa, pb) != cfl_distance(pb, pa)) { ok = false; why = "symmetry violated"; }
        if (cfl_distance(pa, pa) != 0.0) { ok = false; why = "self-distance not 0"; }
        const double dist = cfl_distance(pa, pb);
        if (dist < 0.0 || dist > 4.0 + 1e-12) { ok = false; why = "bound violated"; }

        FeatureMatrix ap = a;
        std::vector<std::size_t> idx(a.rows());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        rng::shuffle(idx, gen);
        for (std::size_t i = 0; i < idx.size(); ++i)
            for (std::size_t j = 0; j < d; ++j) ap.values(i, j) = a.values(idx[i], j);
        if (std::abs(cfl_between(ap, b, bank) - dist) > 1e-12) {
            ok = false;
            why = "permutation invariance violated";
        }
    }
    report("criterion 3 CFL properties", ok, why);
}

// ---------------------------------------------------------------- C4
void criterion_4() {
    const auto start = Clock::now();
    std::mt19937_64 gen(2026);
    double worst = 0.0;
    int configs = 0;
    for (int trial = 0; trial < 20; ++trial) {
        const std::size_t d = 2 + gen() % 4;
        const std::size_t e = 2 + gen() % 3;
        const std::size_t C = 2 + gen() % 3;
        std::vector<std::size_t> hidden;
        const std::size_t n_hidden = gen() % 3;  // 0, 1 or 2 layers
        for (std::size_t h = 0; h < n_hidden; ++h) hidden.push_back(2 + gen() % 5);
        AdapterModel model = init_adapter(d, hidden, e, C, gen());

        DomainData labeled;
        labeled.domain_id = "s";
        labeled.features = random_features(4 + gen() % 5, d, gen()).values;
        labeled.labels.resize(labeled.features.rows());
        for (auto& y : labeled.labels) y = static_cast<int>(gen() % C);
        const FeatureMatrix unlabeled = random_features(4 + gen() % 5, d, gen(), 1.0, "u");
        const FrequencyBank bank =
            sample_frequency_bank(e, 4 + gen() % 12, 0.8, gen(), BankScheme::gaussian);
        ++configs;

        for (double lambda : {0.0, 0.1, 1.0}) {
            const TotalLoss loss = total_loss(model, {labeled}, {unlabeled}, bank, lambda);
            const auto analytic = flatten_grad(loss.grad);
            std::vector<double*> params = parameter_view(model);
            const double h = 1e-5;
            for (std::size_t p = 0; p < params.size(); ++p) {
                const double saved = *params[p];
                *params[p] = saved + h;
                const double up = total_loss(model, {labeled}, {unlabeled}, bank, lambda).total;
                *params[p] = saved - h;
                const double down = total_loss(model, {labeled}, {unlabeled}, bank, lambda).total;
                *params[p] = saved;
                const double fd = (up - down) / (2.0 * h);
                const double denom = std::max({std::abs(analytic[p]), std::abs(fd), 1e-6});
                worst = std::max(worst, std::abs(analytic[p] - fd) / denom);
            }
        }
    }
    const double elapsed = seconds_since(start);
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "max rel err %.2e (tol 1e-4) over %d configs x lambda {0, 0.1, 1}, %.2fs (cap 10s)",
                  worst, configs, elapsed);
    report("criterion 4 gradient check", worst <= 1e-4 && elapsed < 10.0, detail);
}

// --------------------------------------------------------------- C5/C6
TrainResult run_benchmark(std::uint64_t seed, double lambda) {
    LabeledDataset dataset = generate(benchmark_spec(seed));
    dataset.source_ids = {"A"};
    dataset.target_ids = {"C"};  // "B" sits between them, held out
    TrainConfig config;
    config.lambda = lambda;
    config.epochs = 50;
    config.batch_per_domain = 2;
    config.seed = seed;
    return train(dataset, config);
}

std::vector<double> pair_ratios(const TrainResult& result) {
    const Matrix& first = result.history.front().report.matrix;
    const Matrix& last = result.history.back().report.matrix;
    std::vector<double> ratios;
    for (std::size_t i = 0; i < first.rows(); ++i)
        for (std::size_t j = i + 1; j < first.cols(); ++j)
            ratios.push_back(last(i, j) / first(i, j));
    return ratios;
}

void criterion_5() {
    const auto start = Clock::now();
    const TrainResult aligned = run_benchmark(0, 0.1);
    const TrainResult control = run_benchmark(0, 0.0);
    const double elapsed = seconds_since(start);

    double worst_aligned = 0.0;
    for (double r : pair_ratios(aligned)) worst_aligned = std::max(worst_aligned, r);
    double worst_control = 0.0;
    for (double r : pair_ratios(control)) worst_control = std::max(worst_control, r);

    const bool ok = worst_aligned <= 0.5 && worst_control > 0.5 && elapsed < 60.0;
    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "lambda 0.1: every pair ratio <= %.3f (bound 0.5); lambda 0 control worst %.3f "
                  "(> 0.5 required); %.1fs (cap 60s)",
                  worst_aligned, worst_control, elapsed);
    report("criterion 5 alignment pattern", ok, detail);
}

void criterion_6() {
    int distance_wins = 0;
    double acc_aligned = 0.0, acc_control = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const TrainResult aligned = run_benchmark(seed, 0.1);
        const TrainResult control = run_benchmark(seed, 0.0);
        // unseen domain "B" is index 1; training domains are A (0) and C (2)
        auto unseen_mean = [](const TrainResult& r) {
            const Matrix& m = r.history.back().report.matrix;
            return 0.5 * (m(1, 0) + m(1, 2));
        };
        if (unseen_mean(aligned) < unseen_mean(control)) ++distance_wins;

        LabeledDataset dataset = generate(benchmark_spec(seed));
        acc_aligned += evaluate(aligned.model, dataset, {"B"})[0].accuracy;
        acc_control += evaluate(control.model, dataset, {"B"})[0].accuracy;
    }
    acc_aligned /= 5.0;
    acc_control /= 5.0;

    char detail[200];
    std::snprintf(detail, sizeof detail,
                  "unseen domain closer to training domains in %d/5 runs (need >= 4)",
                  distance_wins);
    report("criterion 6 unseen-domain projection", distance_wins >= 4, detail);

    std::snprintf(detail, sizeof detail,
                  "mean unseen accuracy %.4f (lambda 0.1) vs %.4f (lambda 0) over 5 seeds",
                  acc_aligned, acc_control);
    report("example: unseen-domain accuracy", acc_aligned >= acc_control, detail);
}

// ---------------------------------------------------------------- C7
void criterion_7() {
    double worst_var = 0.0, worst_ortho = 0.0;
    std::mt19937_64 gen(300);
    for (int trial = 0; trial < 10; ++trial) {
        FeatureMatrix f = random_features(20 + gen() % 20, 5, gen());
        for (std::size_t i = 0; i < f.rows(); ++i) {
            f.values(i, 0) *= 3.0;
            f.values(i, 1) *= 1.7;
        }
        const PcaModel model = pca_fit(f, 2);
        const Matrix proj = pca_project(model, f);
        const auto spectrum = cfshift_tests::covariance_spectrum(f);
        for (std::size_t c = 0; c < 2; ++c) {
            double mean = 0.0;
            for (std::size_t i = 0; i < proj.rows(); ++i) mean += proj(i, c);
            mean /= static_cast<double>(proj.rows());
            double var = 0.0;
            for (std::size_t i = 0; i < proj.rows(); ++i)
                var += (proj(i, c) - mean) * (proj(i, c) - mean);
            var /= static_cast<double>(proj.rows());
            worst_var = std::max(worst_var, std::abs(var - spectrum[c]));
        }
        double n0 = 0.0, n1 = 0.0, cross = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            n0 += model.components(0, j) * model.components(0, j);
            n1 += model.components(1, j) * model.components(1, j);
            cross += model.components(0, j) * model.components(1, j);
        }
        worst_ortho = std::max({worst_ortho, std::abs(n0 - 1.0), std::abs(n1 - 1.0),
                                std::abs(cross)});
    }
    char detail[160];
    std::snprintf(detail, sizeof detail,
                  "max |proj var - eigensolver| %.2e (tol 1e-8); orthonormality dev %.2e (tol 1e-9)",
                  worst_var, worst_ortho);
    report("criterion 7 PCA baseline", worst_var <= 1e-8 && worst_ortho <= 1e-9, detail);
}

// ---------------------------------------------------------------- C8
std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void criterion_8() {
    const fs::path dir =
        fs::temp_directory_path() / ("cfshift_acceptance_" + std::to_string(::getpid()));
    fs::create_directories(dir);
    const std::string bin = CFSHIFT_BIN;
    auto shell = [&](const std::string& args) {
        const std::string cmd = bin + " " + args + " > /dev/null 2>&1";
        return std::system(cmd.c_str()) == 0;
    };

    bool ok = true;
    std::string why = "gen-data, distance, train, plot x2 kinds, eval all byte-identical on reruns";
    const fs::path data = dir / "data.csv";

    // every subcommand, run twice, outputs compared byte-for-byte
    struct Step {
        std::string name;
        std::string args;                 // with {} placeholders for outputs
        std::vector<std::string> outputs;
    };
    const std::string train_outputs = " --out-model {0} --out-history {1}";
    std::vector<Step> steps = {
        {"gen-data",
         "gen-data --domains 3 --classes 2 --dim 8 --n 24 --trans-step 1.25 --class-offset 1.2 "
         "--rot-step 0 --seed 11 --out {0}",
         {"gen.csv"}},
        {"distance", "distance --data " + data.string() + " --bank-k 32 --out {0}",
         {"report.json"}},
        {"train",
         "train --data " + data.string() +
             " --source A --target C --epochs 2 --batch 8 --hidden 16 --embed 8 --seed 4" +
             train_outputs,
         {"model.ckpt", "history.jsonl"}},
        {"plot cf-plane",
         "plot --data " + data.string() + " --kind cf-plane --seed 2 --out {0} --out-csv {1}",
         {"plane.svg", "plane.csv"}},
        {"plot pca-scatter",
         "plot --data " + data.string() + " --kind pca-scatter --out {0} --out-csv {1}",
         {"scatter.svg", "scatter.csv"}},
        {"eval",
         "eval --data " + data.string() + " --model " + (dir / "r0_model.ckpt").string() +
             " --out {0}",
         {"acc.json"}},
    };

    // seed the data file used by later steps
    if (!shell("gen-data --domains 3 --classes 2 --dim 8 --n 24 --trans-step 1.25 "
               "--class-offset 1.2 --rot-step 0 --seed 11 --out " + data.string())) {
        report("criterion 8 CLI reproducibility", false, "gen-data failed");
        return;
    }

    for (const auto& step : steps) {
        std::vector<std::string> first, second;
        for (int round = 0; round < 2 && ok; ++round) {
            std::string args = step.args;
            std::vector<std::string> files;
            for (std::size_t o = 0; o < step.outputs.size(); ++o) {
                const fs::path out = dir / ("r" + std::to_string(round) + "_" + step.outputs[o]);
                files.push_back(out.string());
                const std::string token = "{" + std::to_string(o) + "}";
                const std::size_t at = args.find(token);
                args = args.substr(0, at) + out.string() + args.substr(at + token.size());
            }
            if (!shell(args)) {
                ok = false;
                why = step.name + " exited nonzero";
            }
            (round == 0 ? first : second) = files;
        }
        for (std::size_t o = 0; o < step.outputs.size() && ok; ++o) {
            const std::string a = slurp(first[o]);
            if (a.empty() || a != slurp(second[o])) {
                ok = false;
                why = step.name + " output " + step.outputs[o] + " differs between runs";
            }
        }
        if (!ok) break;
    }
    report("criterion 8 CLI reproducibility", ok, why);
    fs::remove_all(dir);
}

}  // namespace

int main() {
    criterion_1();
    criterion_2();
    criterion_3();
    criterion_4();
    criterion_5();
    criterion_6();
    criterion_7();
    criterion_8();
    if (g_failures) {
        std::printf("%d criterion(s) failed\n", g_failures);
        return 1;
    }
    std::printf("all acceptance criteria passed\n");
    return 0;
}
