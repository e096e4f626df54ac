#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "far/dataset.hpp"
#include "far/rng.hpp"
#include "far/tuning.hpp"

namespace far {

enum class Scenario { Linear, Nonlinear };

std::string to_string(Scenario s);
Scenario scenario_from_string(const std::string& s);

struct SimConfig {
    Scenario scenario = Scenario::Linear;
    int n = 60;
    int p = 10;
    int s = 4;  // signal predictors; the nonlinear scenario requires s == 2
    int T = 200;
    double sigma_x = 0.5;
    double sigma_y = 1.0;
    std::uint64_t seed = 1;
    int replicates = 100;
};

void validate(const SimConfig& config);

/// True index coefficient vectors in the 4-dimensional raw Fourier family:
/// standard normal draws rescaled to unit norm for signals, zero otherwise.
struct SimTruth {
    std::vector<Eigen::VectorXd> eta;  // p entries, length 4 (zero rows for noise predictors)
    std::vector<int> signal_set;
};

SimTruth make_truth(const SimConfig& config, Rng& rng);

/// Curves X_ij(t_k) = b(t_k)^T theta_ij + w_ijk with theta ~ N(0, I_4) and
/// w ~ N(0, sigma_x^2); responses from the additive model with quadrature
/// integrals of beta_j X_ij, link functions g1(u) = u and g2(u) = -u + sin u
/// in the nonlinear scenario, plus N(0, sigma_y^2) noise.
FunctionalDataset generate_dataset(const SimConfig& config, const SimTruth& truth, Rng& rng);

struct SelectionRates {
    double fnr = 0.0;  // missed signals / s
    double fpr = 0.0;  // selected noise / (p - s)
};

SelectionRates evaluate_selection(const std::vector<int>& active_set, const SimTruth& truth, int p);

double evaluate_pe(const LinearFarModel& model, const FunctionalDataset& test);
double evaluate_pe(const NonlinearFarModel& model, const FunctionalDataset& test);

struct StudySettings {
    MethodSpec method;
    TuningRule rule;
    double holdout_fraction = 0.2;  // nonlinear q selection
    int threads = 1;
};

struct ReplicateRecord {
    int replicate = 0;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    double fn = 0.0, fp = 0.0, pe = 0.0;
    double lambda = 0.0;
    int q = 0, d = -1;
    std::vector<int> active_set;
};

struct SelectionMetrics {
    double fnr = 0.0, fpr = 0.0;
    double mean_pe = 0.0, se_pe = 0.0;
};

struct StudyResult {
    SimConfig config;
    std::string method_label;
    SelectionMetrics metrics;
    std::vector<ReplicateRecord> records;
    int failures = 0;
};

/// Per replicate: generate train/validation/test triples from derived seeds,
/// tune, fit, evaluate; aggregate with pairwise-summed means. A failed
/// replicate is recorded and excluded from the aggregates.
StudyResult run_study(const SimConfig& config, const StudySettings& settings);

std::string study_method_label(const StudySettings& settings);
std::string study_csv(const StudyResult& result);
std::string study_jsonl(const StudyResult& result);

}  // namespace far
