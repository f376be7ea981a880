#pragma once

// Backbone comparison metrics and the four comparative studies. Each runner
// returns typed per-replicate records plus summaries; tables() flattens them
// into CSV-ready rows.

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "spine/bigraph.hpp"
#include "spine/cellprob.hpp"
#include "spine/extract.hpp"
#include "spine/synth.hpp"

namespace spine {

// Newman modularity of a fixed partition of the backbone's agents:
// sum over groups of (e_c - a_c^2). Empty edge set gives nullopt.
std::optional<double> modularity(const Backbone& b, const std::vector<int>& groups);

// Jaccard between `reference` and the uncorrected backbone thresholded from
// `pv` at each alpha, without building the intermediate backbones.
std::vector<double> jaccard_sweep(const EdgePvalues& pv, const Projection& p, const Backbone& reference,
                                  const std::vector<double>& alphas, TailMode tails = TailMode::two);

// Alphas first + step * s for s = 0..count-1, computed from integers.
std::vector<double> alpha_grid(double first, double last, double step);

// Midpoint of the alphas whose score equals the maximum.
struct Argmax {
    double alpha = 0.0;
    double value = 0.0;
};
Argmax argmax_midpoint(const std::vector<double>& alphas, const std::vector<double>& scores);

double mean(const std::vector<double>& xs);
double sample_sd(const std::vector<double>& xs);
// Linear interpolation between order statistics, q in [0,1].
double quantile(std::vector<double> xs, double q);

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

void write_table(const Table& table, const std::filesystem::path& dir);

enum class Preset { paper, desk };
Preset parse_preset(std::string_view name);

// ---- Study 1: cell-probability accuracy on enumerable ensembles ----

struct Study1Config {
    std::vector<CellProbMethod> methods{CellProbMethod::rcf,   CellProbMethod::lpm,     CellProbMethod::lpm_i,
                                        CellProbMethod::logit, CellProbMethod::logit_i, CellProbMethod::bicm};
    std::vector<std::size_t> timing_sizes{10, 100, 1000};
    std::uint64_t seed = 1;
    unsigned workers = 1;

    static Study1Config preset(Preset p);
};

struct DegreePair {
    std::vector<int> rows;
    std::vector<int> cols;
};

// Non-increasing sequences with 3 <= m <= n <= 5, no empty or full rows or
// columns, jointly realizable: 384 pairs with ensembles of 4 to 2040 members.
std::vector<DegreePair> study1_degree_pairs();

struct Study1Ensemble {
    DegreePair degrees;
    std::size_t cardinality = 0;
    std::vector<std::optional<double>> accuracy;  // per configured method
    std::vector<std::string> errors;
};

struct Study1Timing {
    CellProbMethod method = CellProbMethod::bicm;
    std::size_t size = 0;
    double seconds = 0.0;
    std::string error;
};

struct Study1Result {
    Study1Config config;
    std::vector<Study1Ensemble> ensembles;
    std::vector<Study1Timing> timings;

    // Mean over ensembles where the method succeeded.
    double mean_accuracy(CellProbMethod method) const;
    std::size_t failures(CellProbMethod method) const;
    std::vector<Table> tables() const;
};

Study1Result run_study1(const Study1Config& config);

// ---- Study 2: SDSM alpha sweep against an FDSM reference ----

struct Study2Config {
    std::size_t replicates = 10;
    std::size_t agents = 196;
    std::size_t artifacts = 100;
    double density = 0.08;
    DegreeShape agent_shape = DegreeShape::right();
    DegreeShape artifact_shape = DegreeShape::right();
    double fdsm_alpha = 0.05;
    std::size_t trials = 1000;
    std::vector<double> alphas = alpha_grid(0.01, 0.30, 0.001);
    std::uint64_t seed = 1;
    unsigned workers = 1;

    static Study2Config preset(Preset p);
};

struct Study2Replicate {
    std::uint64_t seed = 0;
    std::vector<double> jaccard;  // per alpha
    std::size_t fdsm_edges = 0;
    Argmax best;
    std::string error;
};

struct Study2Result {
    Study2Config config;
    std::vector<Study2Replicate> replicates;

    std::vector<double> mean_curve() const;  // over successful replicates
    Argmax mean_curve_argmax() const;
    double mean_replicate_argmax() const;
    std::vector<Table> tables() const;
};

Study2Result run_study2(const Study2Config& config);

// ---- Study 3: every model against FDSM over a 5 x 5 shape grid ----

// Order of the alternative models in per-replicate records.
inline constexpr std::array<NullModel, 4> kStudy3Models{NullModel::ffm, NullModel::frm, NullModel::fcm,
                                                        NullModel::sdsm};

struct Study3Config {
    std::size_t replicates = 10;
    std::size_t agents = 100;
    std::size_t artifacts = 100;
    double density = 0.1;
    double alpha = 0.05;
    std::size_t trials = 1000;
    std::vector<DegreeShape> shapes = DegreeShape::presets();
    std::vector<double> alphas = alpha_grid(0.01, 0.30, 0.001);
    std::uint64_t seed = 1;
    unsigned workers = 1;

    static Study3Config preset(Preset p);
};

struct Study3Replicate {
    std::size_t agent_shape = 0;
    std::size_t artifact_shape = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    std::array<double, 4> jaccard{};  // by kStudy3Models
    std::vector<double> sdsm_curve;   // SDSM vs FDSM per alpha
    std::string error;
};

struct Study3Cell {
    std::size_t agent_shape = 0;
    std::size_t artifact_shape = 0;
    std::array<double, 4> mean_jaccard{};
    Argmax optimal;  // argmax of the mean SDSM curve
    std::size_t ok = 0;
};

struct Study3Result {
    Study3Config config;
    std::vector<Study3Replicate> replicates;

    std::vector<Study3Cell> cells() const;
    std::vector<Table> tables() const;
};

Study3Result run_study3(const Study3Config& config);

// ---- Study 4: community recovery from planted blocks ----

inline constexpr std::size_t kStudy4Lines = 6;
// ffm, frm, fcm, sdsm at the conventional alpha, sdsm at the liberal alpha, fdsm
std::string study4_line_name(std::size_t line);

struct Study4Config {
    std::size_t replicates = 3;
    std::size_t agents = 200;
    std::size_t artifacts = 1000;
    double density = 0.1;
    std::vector<double> ws = alpha_grid(0.5, 0.8, 0.05);
    double alpha = 0.05;
    double liberal_alpha = 0.13;
    std::size_t trials = 1000;
    bool random_groups = false;
    std::uint64_t seed = 1;
    unsigned workers = 1;

    static Study4Config preset(Preset p);
};

struct Study4Replicate {
    std::size_t w_index = 0;
    std::size_t replicate = 0;
    std::uint64_t seed = 0;
    double realized_w = 0.0;
    bool attained = false;
    std::array<std::optional<double>, kStudy4Lines> q{};
    std::array<std::size_t, kStudy4Lines> edges{};
    std::string error;
};

struct Study4Summary {
    double mean = 0.0;
    double sd = 0.0;
    std::size_t n = 0;         // replicates with a defined Q
    std::size_t excluded = 0;  // empty backbones
};

struct Study4Result {
    Study4Config config;
    std::vector<Study4Replicate> replicates;

    Study4Summary summary(std::size_t w_index, std::size_t line) const;
    std::vector<Table> tables() const;
};

Study4Result run_study4(const Study4Config& config);

}  // namespace spine
