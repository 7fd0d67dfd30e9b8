#include "cfshift/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <numeric>
#include <stdexcept>

#include "cfshift/rng.hpp"
#include "json.hpp"

namespace cfshift {

namespace {

// gradient of mean cross-entropy w.r.t. logits: (softmax - onehot) * weight
Matrix erm_grad(const Matrix& logits, const std::vector<int>& labels, double weight) {
    const std::size_t n = logits.rows();
    const std::size_t C = logits.cols();
    Matrix g(n, C);
    for (std::size_t i = 0; i < n; ++i) {
        double mx = logits(i, 0);
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, logits(i, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < C; ++c) denom += std::exp(logits(i, c) - mx);
        for (std::size_t c = 0; c < C; ++c) g(i, c) = std::exp(logits(i, c) - mx) / denom * weight;
        g(i, static_cast<std::size_t>(labels[i])) -= weight;
    }
    return g;
}

struct EcfWork {
    Matrix theta;  // n x K, w_k . x_i
    EcfVector phi;
};

EcfWork ecf_with_angles(const Matrix& emb, const FrequencyBank& bank) {
    EcfWork work;
    const std::size_t n = emb.rows();
    const std::size_t K = bank.size();
    const std::size_t e = emb.cols();
    work.theta = Matrix(n, K);
    work.phi.re.assign(K, 0.0);
    work.phi.im.assign(K, 0.0);
    work.phi.n_samples = n;
    const double inv_n = 1.0 / static_cast<double>(n);  // same arithmetic as ecf_eval
    for (std::size_t k = 0; k < K; ++k) {
        const auto w = bank.freqs.row(k);
        double sc = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double t = 0.0;
            const auto x = emb.row(i);
            for (std::size_t j = 0; j < e; ++j) t += w[j] * x[j];
            work.theta(i, k) = t;
            sc += std::cos(t);
            ss += std::sin(t);
        }
        work.phi.re[k] = sc * inv_n;
        work.phi.im[k] = ss * inv_n;
    }
    return work;
}

std::size_t find_domain_index(const LabeledDataset& dataset, const std::string& id,
                              const char* what) {
    for (std::size_t i = 0; i < dataset.domains.size(); ++i)
        if (dataset.domains[i].domain_id == id) return i;
    throw std::invalid_argument(std::string(what) + " domain '" + id + "' not found in dataset");
}

}  // namespace

double erm_loss(const Matrix& logits, const std::vector<int>& labels) {
    const std::size_t n = logits.rows();
    const std::size_t C = logits.cols();
    if (n != labels.size()) throw std::invalid_argument("erm_loss: logits/labels size mismatch");
    if (n == 0) throw std::invalid_argument("erm_loss: empty batch");
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const int y = labels[i];
        if (y < 0 || static_cast<std::size_t>(y) >= C)
            throw std::invalid_argument("erm_loss: label out of range");
        double mx = logits(i, 0);
        for (std::size_t c = 1; c < C; ++c) mx = std::max(mx, logits(i, c));
        double denom = 0.0;
        for (std::size_t c = 0; c < C; ++c) denom += std::exp(logits(i, c) - mx);
        sum += mx + std::log(denom) - logits(i, static_cast<std::size_t>(y));
    }
    return sum / static_cast<double>(n);
}

CflStepLoss cfl_step_loss(const std::vector<FeatureMatrix>& embeddings_by_domain,
                          const FrequencyBank& bank) {
    if (embeddings_by_domain.empty())
        throw std::invalid_argument("cfl_step_loss: no domain batches");
    if (embeddings_by_domain.size() == 1) return {0.0, true};

    std::vector<EcfVector> phis;
    phis.reserve(embeddings_by_domain.size());
    for (const auto& emb : embeddings_by_domain) phis.push_back(ecf_eval(emb, bank));

    double sum = 0.0;
    std::size_t pairs = 0;
    for (std::size_t a = 0; a < phis.size(); ++a)
        for (std::size_t b = a + 1; b < phis.size(); ++b) {
            sum += cfl_distance(phis[a], phis[b]);
            ++pairs;
        }
    return {sum / static_cast<double>(pairs), false};
}

TotalLoss total_loss(const AdapterModel& model, const std::vector<DomainData>& labeled_batches,
                     const std::vector<FeatureMatrix>& unlabeled_batches,
                     const FrequencyBank& bank, double lambda) {
    if (lambda < 0.0) throw std::invalid_argument("total_loss: lambda must be >= 0");
    if (labeled_batches.empty())
        throw std::invalid_argument("total_loss: need at least one labeled batch");

    TotalLoss out;
    out.grad = zero_grad(model);

    const std::size_t n_labeled = labeled_batches.size();
    const std::size_t n_batches = n_labeled + unlabeled_batches.size();

    std::vector<ForwardCache> caches;
    caches.reserve(n_batches);
    for (const auto& batch : labeled_batches) {
        if (batch.features.rows() != batch.labels.size())
            throw std::invalid_argument("total_loss: labeled batch rows/labels mismatch");
        caches.push_back(forward_cached(model, batch.features));
    }
    for (const auto& batch : unlabeled_batches)
        caches.push_back(forward_cached(model, batch.values));

    // ERM term: uniform average over the labeled batches
    double erm_sum = 0.0;
    for (std::size_t b = 0; b < n_labeled; ++b)
        erm_sum += erm_loss(caches[b].logits, labeled_batches[b].labels);
    out.erm = erm_sum / static_cast<double>(n_labeled);

    // ECF alignment term over all unordered batch pairs
    std::vector<EcfWork> works;
    std::vector<Matrix> d_emb(n_batches);
    out.cfl_single_domain = n_batches < 2;
    if (!out.cfl_single_domain) {
        works.reserve(n_batches);
        for (const auto& cache : caches) works.push_back(ecf_with_angles(cache.activations.back(), bank));

        const std::size_t K = bank.size();
        const std::size_t n_pairs = n_batches * (n_batches - 1) / 2;
        double sum = 0.0;  // of per-pair means, matching cfl_step_loss bit-for-bit
        std::vector<std::vector<double>> d_re(n_batches, std::vector<double>(K, 0.0));
        std::vector<std::vector<double>> d_im(n_batches, std::vector<double>(K, 0.0));
        for (std::size_t a = 0; a < n_batches; ++a)
            for (std::size_t b = a + 1; b < n_batches; ++b) {
                const double w = lambda / (static_cast<double>(n_pairs) * static_cast<double>(K));
                double pair_sum = 0.0;
                for (std::size_t k = 0; k < K; ++k) {
                    const double dr = works[a].phi.re[k] - works[b].phi.re[k];
                    const double di = works[a].phi.im[k] - works[b].phi.im[k];
                    pair_sum += dr * dr + di * di;
                    if (lambda != 0.0) {
                        d_re[a][k] += 2.0 * dr * w;
                        d_re[b][k] -= 2.0 * dr * w;
                        d_im[a][k] += 2.0 * di * w;
                        d_im[b][k] -= 2.0 * di * w;
                    }
                }
                sum += pair_sum / static_cast<double>(K);
            }
        out.cfl = sum / static_cast<double>(n_pairs);

        if (lambda != 0.0) {
            // d(phi)/d(x_i) routed through cos/sin: each sample i adds
            // (1/n) [-sin(theta_ik) d_re_k + cos(theta_ik) d_im_k] w_k
            const std::size_t e = bank.cols();
            for (std::size_t b = 0; b < n_batches; ++b) {
                const Matrix& emb = caches[b].activations.back();
                const std::size_t n = emb.rows();
                d_emb[b] = Matrix(n, e);
                const double inv_n = 1.0 / static_cast<double>(n);
                for (std::size_t i = 0; i < n; ++i)
                    for (std::size_t k = 0; k < K; ++k) {
                        const double theta = works[b].theta(i, k);
                        const double c = (-std::sin(theta) * d_re[b][k] +
                                          std::cos(theta) * d_im[b][k]) * inv_n;
                        if (c == 0.0) continue;
                        const auto w = bank.freqs.row(k);
                        for (std::size_t j = 0; j < e; ++j) d_emb[b](i, j) += c * w[j];
                    }
            }
        }
    }

    out.total = lambda != 0.0 ? out.erm + lambda * out.cfl : out.erm;

    const Matrix none;
    for (std::size_t b = 0; b < n_batches; ++b) {
        Matrix d_logits;
        if (b < n_labeled)
            d_logits = erm_grad(caches[b].logits, labeled_batches[b].labels,
                                1.0 / (static_cast<double>(labeled_batches[b].labels.size()) *
                                       static_cast<double>(n_labeled)));
        if (d_logits.empty() && d_emb[b].empty()) continue;
        backprop(model, caches[b], d_logits, d_emb[b].empty() ? none : d_emb[b], out.grad);
    }
    return out;
}

TrainResult train(const LabeledDataset& dataset, const TrainConfig& config) {
    if (!(config.lr > 0.0)) throw std::invalid_argument("train: lr must be > 0");
    if (config.lambda < 0.0) throw std::invalid_argument("train: lambda must be >= 0");
    if (config.epochs < 1) throw std::invalid_argument("train: epochs must be >= 1");
    if (config.batch_per_domain < 2)
        throw std::invalid_argument("train: batch_per_domain must be >= 2");
    if (dataset.domains.empty()) throw std::invalid_argument("train: empty dataset");
    if (dataset.source_ids.empty())
        throw std::invalid_argument("train: need at least one source domain");
    if (dataset.num_classes < 1) throw std::invalid_argument("train: dataset has no classes");

    std::vector<std::size_t> source_idx, target_idx;
    for (const auto& id : dataset.source_ids)
        source_idx.push_back(find_domain_index(dataset, id, "source"));
    for (const auto& id : dataset.target_ids) {
        const std::size_t i = find_domain_index(dataset, id, "target");
        if (std::find(source_idx.begin(), source_idx.end(), i) != source_idx.end())
            throw std::invalid_argument("train: domain '" + dataset.domains[i].domain_id +
                                        "' is both source and target");
        target_idx.push_back(i);
    }
    std::vector<std::size_t> visible = source_idx;
    visible.insert(visible.end(), target_idx.begin(), target_idx.end());

    const std::size_t d = dataset.dim();
    for (const auto& domain : dataset.domains) {
        if (domain.features.cols() != d)
            throw std::invalid_argument("train: domain dimensions disagree");
        if (domain.features.rows() == 0)
            throw std::invalid_argument("train: domain '" + domain.domain_id + "' is empty");
        for (int y : domain.labels)
            if (y < 0 || y >= dataset.num_classes)
                throw std::invalid_argument("train: label out of range in domain '" +
                                            domain.domain_id + "'");
    }

    AdapterModel model = init_adapter(d, config.hidden, config.embed_dim,
                                      static_cast<std::size_t>(dataset.num_classes),
                                      rng::derive_seed(config.seed, 1));
    std::mt19937_64 shuffle_rng(rng::derive_seed(config.seed, 2));

    const FrequencyBank base_bank = sample_frequency_bank(
        model.embedding_dim(), config.bank.k, config.bank.scale, config.bank.seed,
        config.bank.scheme);

    std::size_t min_rows = dataset.domains[visible[0]].features.rows();
    for (std::size_t i : visible) min_rows = std::min(min_rows, dataset.domains[i].features.rows());
    const std::size_t steps =
        (min_rows + config.batch_per_domain - 1) / config.batch_per_domain;

    auto snapshot = [&](std::size_t epoch, double erm, double cfl, double total) {
        EpochRecord rec;
        rec.epoch = epoch;
        rec.erm = erm;
        rec.cfl = cfl;
        rec.total = total;
        std::vector<FeatureMatrix> embs;
        embs.reserve(dataset.domains.size());
        for (const auto& domain : dataset.domains)
            embs.push_back(forward(model, {domain.features, domain.domain_id}).embeddings);
        if (embs.size() >= 2) {
            rec.report = distance_matrix(embs, base_bank);
        } else {
            rec.report.domain_ids = {embs[0].domain_id};
            rec.report.matrix = Matrix(1, 1);
            rec.report.bank = bank_meta(base_bank);
        }
        return rec;
    };

    TrainResult result;
    result.steps_per_epoch = steps;

    // epoch-0 record: full-data losses under the initial model
    {
        std::vector<DomainData> labeled;
        for (std::size_t i : source_idx) labeled.push_back(dataset.domains[i]);
        std::vector<FeatureMatrix> unlabeled;
        for (std::size_t i : target_idx)
            unlabeled.push_back({dataset.domains[i].features, dataset.domains[i].domain_id});
        TotalLoss initial = total_loss(model, labeled, unlabeled, base_bank, config.lambda);
        result.history.push_back(snapshot(0, initial.erm, initial.cfl, initial.total));
    }

    bool warned_single_domain = false;
    std::size_t global_step = 0;
    std::vector<std::vector<std::size_t>> order(dataset.domains.size());
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        for (std::size_t i : visible) {
            order[i].resize(dataset.domains[i].features.rows());
            std::iota(order[i].begin(), order[i].end(), std::size_t{0});
            rng::shuffle(order[i], shuffle_rng);
        }

        double erm_acc = 0.0, cfl_acc = 0.0, total_acc = 0.0;
        for (std::size_t step = 0; step < steps; ++step, ++global_step) {
            std::vector<DomainData> labeled;
            std::vector<FeatureMatrix> unlabeled;
            auto slice = [&](std::size_t i) {
                const auto& domain = dataset.domains[i];
                const std::size_t begin = step * config.batch_per_domain;
                const std::size_t end =
                    std::min(begin + config.batch_per_domain, domain.features.rows());
                Matrix batch(end - begin, d);
                std::vector<int> labels(end - begin);
                for (std::size_t r = begin; r < end; ++r) {
                    const std::size_t src = order[i][r];
                    std::copy(domain.features.row(src).begin(), domain.features.row(src).end(),
                              batch.row(r - begin).begin());
                    labels[r - begin] = domain.labels[src];
                }
                return std::pair{std::move(batch), std::move(labels)};
            };
            for (std::size_t i : source_idx) {
                auto [batch, labels] = slice(i);
                labeled.push_back({dataset.domains[i].domain_id, std::move(batch), std::move(labels)});
            }
            for (std::size_t i : target_idx) {
                auto sliced = slice(i);
                unlabeled.push_back({std::move(sliced.first), dataset.domains[i].domain_id});
            }

            FrequencyBank step_bank;
            const FrequencyBank* bank = &base_bank;
            if (config.resample_bank_each_step) {
                step_bank = sample_frequency_bank(
                    model.embedding_dim(), config.bank.k, config.bank.scale,
                    rng::derive_seed(config.bank.seed, global_step + 1), config.bank.scheme);
                bank = &step_bank;
            }

            TotalLoss loss = total_loss(model, labeled, unlabeled, *bank, config.lambda);
            if (loss.cfl_single_domain && config.lambda != 0.0 && !warned_single_domain) {
                std::cerr << "warning: only one visible domain, alignment term is 0\n";
                warned_single_domain = true;
            }
            sgd_step(model, loss.grad, config.lr);
            erm_acc += loss.erm;
            cfl_acc += loss.cfl;
            total_acc += loss.total;
        }
        result.history.push_back(snapshot(epoch, erm_acc / static_cast<double>(steps),
                                          cfl_acc / static_cast<double>(steps),
                                          total_acc / static_cast<double>(steps)));
    }

    result.model = std::move(model);
    return result;
}

std::vector<DomainAccuracy> evaluate(const AdapterModel& model, const LabeledDataset& dataset,
                                     const std::vector<std::string>& domain_ids) {
    if (domain_ids.empty()) throw std::invalid_argument("evaluate: no domains requested");
    std::vector<DomainAccuracy> out;
    for (const auto& id : domain_ids) {
        const DomainData* domain = dataset.find(id);
        if (domain == nullptr)
            throw std::invalid_argument("evaluate: domain '" + id + "' not found");
        if (domain->features.rows() == 0)
            throw std::invalid_argument("evaluate: domain '" + id + "' is empty");
        const Matrix logits = forward(model, {domain->features, id}).logits;
        std::size_t correct = 0;
        for (std::size_t i = 0; i < logits.rows(); ++i) {
            std::size_t best = 0;
            for (std::size_t c = 1; c < logits.cols(); ++c)
                if (logits(i, c) > logits(i, best)) best = c;  // ties keep the lowest class
            if (static_cast<int>(best) == domain->labels[i]) ++correct;
        }
        out.push_back({id, static_cast<double>(correct) / static_cast<double>(logits.rows())});
    }
    return out;
}

std::string history_to_jsonl(const std::vector<EpochRecord>& history) {
    std::string out;
    for (const auto& rec : history) {
        nlohmann::ordered_json doc;
        doc["epoch"] = rec.epoch;
        doc["erm"] = rec.erm;
        doc["cfl"] = rec.cfl;
        doc["total"] = rec.total;
        auto rows = nlohmann::ordered_json::array();
        for (std::size_t i = 0; i < rec.report.matrix.rows(); ++i) {
            auto row = nlohmann::ordered_json::array();
            for (std::size_t j = 0; j < rec.report.matrix.cols(); ++j)
                row.push_back(rec.report.matrix(i, j));
            rows.push_back(std::move(row));
        }
        doc["matrix"] = std::move(rows);
        out += doc.dump();
        out += '\n';
    }
    return out;
}

}  // namespace cfshift
