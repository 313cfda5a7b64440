#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "classify.hpp"
#include "data.hpp"
#include "models.hpp"

namespace meda::harness {

enum class Classifier { ridge, nn, dscm };

Classifier classifier_from_string(std::string_view s);
const char* to_string(Classifier c);

enum class FileFormat { autodetect, dense, sparse };

struct ExperimentConfig {
    std::vector<std::pair<std::string, std::string>> domains;  // (name, path) in file order
    Scenario scenario = Scenario::us;
    std::vector<models::Model> model_list{models::Model::bl, models::Model::s1};
    std::vector<Classifier> classifier_list{Classifier::ridge};
    models::ModelSpec hyper;  // shared hyperparameters; the model field is ignored
    std::size_t labeled_per_class = 3;
    std::vector<std::uint64_t> seeds{0};
    bool standardize = true;
    bool add_bias = false;
    bool timing = true;
    double sigma = 1.0;  // class-means classifier bandwidth
    FileFormat format = FileFormat::autodetect;
    std::string output_dir = "results";

    /// String key/value override; accepts the same keys as the config file.
    void set(const std::string& key, const std::string& value);
};

/// Sectioned key = value file; '#' and ';' start comments. The [domains]
/// section maps domain names to dataset paths; every other key is routed by
/// name.
ExperimentConfig load_config(const std::string& path);

struct ResultRecord {
    std::string source, target;
    Scenario scenario;
    models::Model model;
    Classifier classifier;
    std::uint64_t seed;
    double accuracy = 0.0;
    int iterations = 0;
    double wall_time_ms = 0.0;
    bool converged = false;
    bool jitter_used = false;
};

struct AggregateRow {
    models::Model model;
    Classifier classifier;
    double mean = 0.0;
    double stddev = 0.0;
    std::size_t n = 0;
};

struct RunResult {
    std::vector<ResultRecord> records;
    std::vector<AggregateRow> aggregate;
    std::vector<std::string> failures;
};

struct ValidationReport {
    std::vector<std::string> violations;
    std::string resolved_config;
    bool ok() const { return violations.empty(); }
};

/// Checks files, dimensions and per-scenario class coverage without fitting
/// anything; the report carries every violation plus the fully resolved
/// configuration.
ValidationReport validate(const ExperimentConfig& cfg);

/// Runs every (ordered domain pair) x model x classifier x seed cell. Failing
/// cells are collected in `failures`; the others complete.
RunResult run(const ExperimentConfig& cfg);

/// Writes records.csv and aggregate.txt (plus failures.txt when needed) under
/// `out_dir`; numbers carry 6 significant digits and rows are sorted by the
/// CSV key columns.
void emit(const RunResult& result, const ExperimentConfig& cfg, const std::string& out_dir);

struct SweepRow {
    double lambda, gamma, p;
    models::Model model;
    Classifier classifier;
    double mean, stddev;
    std::size_t n;
};

/// Grid exploration over the loss weights and the dropout level; writes
/// sweep.csv under the output directory and returns the rows.
std::vector<SweepRow> sweep(const ExperimentConfig& base, std::span<const double> lambdas,
                            std::span<const double> gammas, std::span<const double> ps);

/// Fits one (source, target, model, seed) cell and scores one classifier on
/// the held-out target rows; building block of run() and of the validation
/// suites.
ResultRecord run_cell(const data::Dataset& source, const data::Dataset& target,
                      const std::string& source_name, const std::string& target_name,
                      const ExperimentConfig& cfg, models::Model model, Classifier cls,
                      std::uint64_t seed);

/// Dataset loading honoring the configured format (sniffing the first data
/// line when set to autodetect).
data::Dataset load_dataset(const std::string& path, FileFormat format);

} // namespace meda::harness
