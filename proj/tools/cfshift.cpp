// cfshift: measure distribution shift between feature domains with
// empirical characteristic functions, train an adapter that closes the
// gap, and plot the result.
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "cfshift/data.hpp"
#include "cfshift/ecf.hpp"
#include "cfshift/loss.hpp"
#include "cfshift/net.hpp"
#include "cfshift/plot.hpp"
#include "cfshift/trainer.hpp"

namespace {

using namespace cfshift;

constexpr int kExitOk = 0;
constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

/// Flag errors discovered after parsing (unknown domain names, bad
/// combinations); mapped to the usage exit code.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

/// Standardize every domain with statistics pooled over all rows.
std::vector<FeatureMatrix> pooled_standardize(const std::vector<FeatureMatrix>& domains) {
    std::size_t total = 0;
    for (const auto& d : domains) total += d.rows();
    FeatureMatrix pooled;
    pooled.values = Matrix(total, domains.front().cols());
    std::size_t row = 0;
    for (const auto& d : domains)
        for (std::size_t i = 0; i < d.rows(); ++i, ++row)
            std::copy(d.values.row(i).begin(), d.values.row(i).end(),
                      pooled.values.row(row).begin());
    const ColumnStats stats = standardize(pooled).second;
    std::vector<FeatureMatrix> out;
    out.reserve(domains.size());
    for (const auto& d : domains) out.push_back(standardize(d, stats).first);
    return out;
}

struct BankFlags {
    std::size_t k = 64;
    double scale = 1.0;
    std::uint64_t seed = 0;
    std::string scheme = "gaussian";
};

void add_bank_flags(CLI::App* cmd, BankFlags& flags, double default_scale) {
    flags.scale = default_scale;
    cmd->add_option("--bank-k", flags.k, "Number of bank frequencies")->capture_default_str();
    cmd->add_option("--bank-scale", flags.scale, "Frequency scale sigma")->capture_default_str();
    cmd->add_option("--bank-seed", flags.seed, "Bank sampling seed")->capture_default_str();
    cmd->add_option("--scheme", flags.scheme, "Bank scheme: gaussian or radial-sweep")
        ->capture_default_str();
}

int run_gen_data(std::size_t domains, std::size_t classes, std::size_t dim, std::size_t n,
                 double rot_step, double trans_step, double noise, double sep,
                 double class_offset, std::uint64_t seed, const std::string& out) {
    SyntheticSpec spec;
    spec.n_domains = domains;
    spec.classes = classes;
    spec.dim = dim;
    spec.samples_per_class_per_domain = n;
    spec.noise_std = noise;
    spec.class_separation = sep;
    spec.class_axis_offset = class_offset;
    spec.seed = seed;
    if (trans_step != 0.0 && dim < 3)
        throw UsageError("--trans-step needs --dim >= 3 (translation runs along f2)");
    spec.transforms.resize(domains);
    for (std::size_t t = 0; t < domains; ++t) {
        spec.transforms[t].rotation_deg = rot_step * static_cast<double>(t);
        if (trans_step != 0.0) {
            spec.transforms[t].translation.assign(dim, 0.0);
            spec.transforms[t].translation[2] = trans_step * static_cast<double>(t);
        }
    }
    save_embeddings(generate(spec), out);
    return kExitOk;
}

int run_distance(const std::string& data_path, const BankFlags& bank_flags,
                 const std::string& out) {
    const LabeledDataset dataset = load_embeddings(data_path);
    if (dataset.domains.size() < 2)
        throw std::runtime_error("distance needs at least 2 domains, file has " +
                                 std::to_string(dataset.domains.size()));
    const auto domains = pooled_standardize(dataset.feature_matrices());
    const FrequencyBank bank =
        sample_frequency_bank(dataset.dim(), bank_flags.k, bank_flags.scale, bank_flags.seed,
                              parse_bank_scheme(bank_flags.scheme));
    const ShiftReport report = distance_matrix(domains, bank);
    write_file(out, to_json(report) + "\n");

    std::printf("%-10s", "");
    for (const auto& id : report.domain_ids) std::printf(" %9s", id.c_str());
    std::printf("\n");
    for (std::size_t i = 0; i < report.domain_ids.size(); ++i) {
        std::printf("%-10s", report.domain_ids[i].c_str());
        for (std::size_t j = 0; j < report.domain_ids.size(); ++j)
            std::printf(" %9.3f", report.matrix(i, j));
        std::printf("\n");
    }
    return kExitOk;
}

int run_train(const std::string& data_path, const std::vector<std::string>& sources,
              const std::vector<std::string>& targets, const TrainConfig& base_config,
              const std::string& out_model, const std::string& out_history) {
    LabeledDataset dataset = load_embeddings(data_path);
    for (const auto& id : sources)
        if (dataset.find(id) == nullptr) throw UsageError("unknown source domain '" + id + "'");
    for (const auto& id : targets)
        if (dataset.find(id) == nullptr) throw UsageError("unknown target domain '" + id + "'");
    dataset.source_ids = sources;
    dataset.target_ids = targets;

    const TrainResult result = train(dataset, base_config);
    for (const auto& rec : result.history)
        std::printf("epoch %3zu  erm %.6f  cfl %.6f  total %.6f\n", rec.epoch, rec.erm, rec.cfl,
                    rec.total);
    save_checkpoint(result.model, out_model);
    write_file(out_history, history_to_jsonl(result.history));
    return kExitOk;
}

int run_plot(const std::string& data_path, const std::string& model_path,
             const std::string& kind, const PlotSpec& base_spec, std::uint64_t seed,
             int label_filter, const std::string& out, std::string out_csv) {
    PlotSpec spec = base_spec;
    if (kind == "cf-plane")
        spec.kind = PlotKind::cf_plane;
    else if (kind == "pca-scatter")
        spec.kind = PlotKind::pca_scatter;
    else
        throw UsageError("unknown --kind '" + kind + "' (cf-plane or pca-scatter)");
    if (out_csv.empty()) out_csv = out + ".csv";

    const LabeledDataset dataset = load_embeddings(data_path);
    if (dataset.domains.empty()) throw std::runtime_error(data_path + ": no data rows");

    std::vector<FeatureMatrix> domains;
    if (label_filter < 0) {
        domains = dataset.feature_matrices();
    } else {
        // single-class view: compare domains on one object class at a time
        for (const auto& domain : dataset.domains) {
            std::size_t count = 0;
            for (int y : domain.labels) count += y == label_filter ? 1 : 0;
            if (count == 0) continue;
            FeatureMatrix filtered;
            filtered.domain_id = domain.domain_id;
            filtered.values = Matrix(count, dataset.dim());
            std::size_t row = 0;
            for (std::size_t i = 0; i < domain.features.rows(); ++i)
                if (domain.labels[i] == label_filter) {
                    std::copy(domain.features.row(i).begin(), domain.features.row(i).end(),
                              filtered.values.row(row++).begin());
                }
            domains.push_back(std::move(filtered));
        }
        if (domains.empty())
            throw std::runtime_error("no rows carry label " + std::to_string(label_filter));
    }
    if (!model_path.empty()) {
        const AdapterModel model = load_checkpoint(model_path);
        for (auto& domain : domains) domain = forward(model, domain).embeddings;
    }
    domains = pooled_standardize(domains);

    if (spec.kind == PlotKind::cf_plane) {
        const auto traces = cf_plane_traces(domains, spec, seed);
        std::vector<std::string> ids;
        for (const auto& d : domains) ids.push_back(d.domain_id);
        write_file(out, render_cf_plane(traces, ids));
        write_file(out_csv, cf_plane_csv(traces));
    } else {
        const auto scatter = pca_scatter_points(domains);
        write_file(out, render_pca_scatter(scatter));
        write_file(out_csv, pca_scatter_csv(scatter));
    }
    return kExitOk;
}

int run_eval(const std::string& data_path, const std::string& model_path,
             std::vector<std::string> domains, const std::string& out) {
    const LabeledDataset dataset = load_embeddings(data_path);
    const AdapterModel model = load_checkpoint(model_path);
    if (domains.empty())
        for (const auto& d : dataset.domains) domains.push_back(d.domain_id);
    for (const auto& id : domains)
        if (dataset.find(id) == nullptr) throw UsageError("unknown domain '" + id + "'");

    const auto results = evaluate(model, dataset, domains);
    for (const auto& r : results) std::printf("%-10s %.3f\n", r.domain_id.c_str(), r.accuracy);
    if (!out.empty()) {
        nlohmann::ordered_json doc;
        for (const auto& r : results) doc[r.domain_id] = r.accuracy;
        write_file(out, doc.dump() + "\n");
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"characteristic-function distribution shift toolkit"};
    app.require_subcommand(1);

    // gen-data
    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic multi-domain CSV");
    std::size_t g_domains = 3, g_classes = 3, g_dim = 16, g_n = 200;
    double g_rot = 30.0, g_trans = 0.0, g_noise = 0.4, g_sep = 4.0, g_offset = 0.0;
    std::uint64_t g_seed = 0;
    std::string g_out;
    gen->add_option("--domains", g_domains, "Number of domains (named A, B, ...)")
        ->capture_default_str();
    gen->add_option("--classes", g_classes, "Number of classes")->capture_default_str();
    gen->add_option("--dim", g_dim, "Feature dimension")->capture_default_str();
    gen->add_option("--n", g_n, "Samples per class per domain")->capture_default_str();
    gen->add_option("--rot-step", g_rot, "Rotation (degrees) of domain t is t times this")
        ->capture_default_str();
    gen->add_option("--trans-step", g_trans, "Translation along f2 of domain t is t times this")
        ->capture_default_str();
    gen->add_option("--noise", g_noise, "Cluster noise deviation")->capture_default_str();
    gen->add_option("--sep", g_sep, "Class center separation")->capture_default_str();
    gen->add_option("--class-offset", g_offset, "Per-class offset step along f2")
        ->capture_default_str();
    gen->add_option("--seed", g_seed, "Generator seed")->envname("CFSHIFT_SEED")
        ->capture_default_str();
    gen->add_option("--out", g_out, "Output CSV path")->required();

    // distance
    auto* dist = app.add_subcommand("distance", "Pairwise ECF distances between domains");
    std::string d_data, d_out;
    BankFlags d_bank;
    dist->add_option("--data", d_data, "Input CSV")->required();
    add_bank_flags(dist, d_bank, 1.0);
    dist->add_option("--out", d_out, "Output report JSON path")->required();

    // train
    auto* tr = app.add_subcommand("train", "Train the feature adapter");
    std::string t_data, t_model = "model.ckpt", t_history = "history.jsonl";
    std::vector<std::string> t_sources, t_targets;
    TrainConfig t_config;
    BankFlags t_bank;
    tr->add_option("--data", t_data, "Input CSV")->required();
    tr->add_option("--source", t_sources, "Labeled source domain (repeatable)")->required();
    tr->add_option("--target", t_targets, "Unlabeled target domain (repeatable)");
    tr->add_option("--lr", t_config.lr, "Learning rate")->capture_default_str();
    tr->add_option("--lambda", t_config.lambda, "Alignment loss weight")->capture_default_str();
    tr->add_option("--epochs", t_config.epochs, "Training epochs")->capture_default_str();
    tr->add_option("--batch", t_config.batch_per_domain, "Batch size per domain")
        ->capture_default_str();
    tr->add_option("--hidden", t_config.hidden, "Hidden layer sizes")->capture_default_str();
    tr->add_option("--embed", t_config.embed_dim, "Embedding dimension")->capture_default_str();
    tr->add_option("--seed", t_config.seed, "Training seed")->envname("CFSHIFT_SEED")
        ->capture_default_str();
    tr->add_flag("--resample-bank", t_config.resample_bank_each_step,
                 "Draw a fresh bank every step");
    add_bank_flags(tr, t_bank, 0.4);
    tr->add_option("--out-model", t_model, "Checkpoint output path")->capture_default_str();
    tr->add_option("--out-history", t_history, "History JSONL output path")
        ->capture_default_str();

    // plot
    auto* pl = app.add_subcommand("plot", "Render domain-gap charts (SVG + companion CSV)");
    std::string p_data, p_model, p_kind = "cf-plane", p_out, p_csv;
    PlotSpec p_spec;
    std::uint64_t p_seed = 0;
    int p_label = -1;
    pl->add_option("--data", p_data, "Input CSV")->required();
    pl->add_option("--model", p_model, "Optional checkpoint; plots its embeddings");
    pl->add_option("--kind", p_kind, "cf-plane or pca-scatter")->capture_default_str();
    pl->add_option("--label", p_label, "Restrict the plot to one class label");
    pl->add_option("--directions", p_spec.directions, "Sweep rays (cf-plane)")
        ->capture_default_str();
    pl->add_option("--steps", p_spec.steps, "Points per ray (cf-plane)")->capture_default_str();
    pl->add_option("--sweep-scale", p_spec.sweep_scale, "Largest swept frequency")
        ->capture_default_str();
    pl->add_option("--seed", p_seed, "Sweep direction seed")->envname("CFSHIFT_SEED")
        ->capture_default_str();
    pl->add_option("--out", p_out, "Output SVG path")->required();
    pl->add_option("--out-csv", p_csv, "Companion CSV path (default: <out>.csv)");

    // eval
    auto* ev = app.add_subcommand("eval", "Per-domain accuracy of a checkpoint");
    std::string e_data, e_model, e_out;
    std::vector<std::string> e_domains;
    ev->add_option("--data", e_data, "Input CSV")->required();
    ev->add_option("--model", e_model, "Checkpoint path")->required();
    ev->add_option("--domains", e_domains, "Domains to evaluate (default: all)");
    ev->add_option("--out", e_out, "Optional JSON output path");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (gen->parsed())
            return run_gen_data(g_domains, g_classes, g_dim, g_n, g_rot, g_trans, g_noise, g_sep,
                                g_offset, g_seed, g_out);
        if (dist->parsed()) return run_distance(d_data, d_bank, d_out);
        if (tr->parsed()) {
            t_config.bank.k = t_bank.k;
            t_config.bank.scale = t_bank.scale;
            t_config.bank.seed = t_bank.seed;
            t_config.bank.scheme = parse_bank_scheme(t_bank.scheme);
            return run_train(t_data, t_sources, t_targets, t_config, t_model, t_history);
        }
        if (pl->parsed())
            return run_plot(p_data, p_model, p_kind, p_spec, p_seed, p_label, p_out, p_csv);
        if (ev->parsed()) return run_eval(e_data, e_model, e_domains, e_out);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitUsage;
}
