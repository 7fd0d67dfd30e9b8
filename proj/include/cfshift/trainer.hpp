#ifndef CFSHIFT_TRAINER_HPP
#define CFSHIFT_TRAINER_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "cfshift/data.hpp"
#include "cfshift/ecf.hpp"
#include "cfshift/loss.hpp"
#include "cfshift/net.hpp"

namespace cfshift {

/// Frequency-bank parameters used during training. The scale default is
/// tuned to tanh embeddings (coordinates in (-1, 1)), not to standardized
/// raw features.
struct BankConfig {
    std::size_t k = 64;
    double scale = 0.4;
    std::uint64_t seed = 0;
    BankScheme scheme = BankScheme::gaussian;
};

struct TrainConfig {
    double lr = 1e-3;
    double lambda = 0.1;
    std::size_t epochs = 30;
    std::size_t batch_per_domain = 32;
    BankConfig bank;
    std::uint64_t seed = 0;
    bool resample_bank_each_step = false;
    std::vector<std::size_t> hidden = {64};
    std::size_t embed_dim = 32;
};

/// Mean stabilized softmax cross-entropy over the batch.
double erm_loss(const Matrix& logits, const std::vector<int>& labels);

struct CflStepLoss {
    double value = 0.0;
    bool single_domain = false;  // set when fewer than 2 domains were given
};

/// Mean pairwise ECF distance over all unordered pairs of the given
/// per-domain embedding batches. One domain is degenerate: value 0 with
/// the flag set.
CflStepLoss cfl_step_loss(const std::vector<FeatureMatrix>& embeddings_by_domain,
                          const FrequencyBank& bank);

struct TotalLoss {
    double total = 0.0;
    double erm = 0.0;
    double cfl = 0.0;
    bool cfl_single_domain = false;
    ModelGrad grad;
};

/// erm over the labeled batches plus lambda times the pairwise ECF loss over
/// all batches (labeled and unlabeled), with the exact analytic gradient of
/// that scalar w.r.t. every model parameter. At lambda == 0 the value and
/// gradient reduce bit-for-bit to the ERM terms.
TotalLoss total_loss(const AdapterModel& model, const std::vector<DomainData>& labeled_batches,
                     const std::vector<FeatureMatrix>& unlabeled_batches,
                     const FrequencyBank& bank, double lambda);

struct EpochRecord {
    std::size_t epoch = 0;  // 0 is the pre-training snapshot
    double erm = 0.0;
    double cfl = 0.0;
    double total = 0.0;
    ShiftReport report;  // over every domain's full embeddings
};

struct TrainResult {
    AdapterModel model;
    std::vector<EpochRecord> history;
    std::size_t steps_per_epoch = 0;
};

/// Plain SGD over per-domain batches drawn without replacement within each
/// epoch. Source domains supply labels; target domains enter the ECF term
/// unlabeled; all other domains are held out. Returns the last-epoch model
/// and one history record per epoch boundary (including epoch 0).
TrainResult train(const LabeledDataset& dataset, const TrainConfig& config);

struct DomainAccuracy {
    std::string domain_id;
    double accuracy = 0.0;
};

/// Argmax accuracy per requested domain; ties resolve to the lowest class.
std::vector<DomainAccuracy> evaluate(const AdapterModel& model, const LabeledDataset& dataset,
                                     const std::vector<std::string>& domain_ids);

/// One JSON object per history record: epoch, erm, cfl, total, matrix.
std::string history_to_jsonl(const std::vector<EpochRecord>& history);

}  // namespace cfshift

#endif
