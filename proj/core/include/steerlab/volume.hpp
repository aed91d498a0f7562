#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "steerlab/nm_povm.hpp"

namespace steerlab {

enum class DetectorKind { Loo, LooRescaled, Povm, DasNpt };

struct Detector {
    DetectorKind kind = DetectorKind::Loo;
    /// Povm only. Empty means (d+1, d) with default_params() on that side.
    std::optional<PovmParams> povm_a;
    std::optional<PovmParams> povm_b;
    std::uint64_t povm_seed = 0;

    std::string tag() const;
};

/// The POVM a povm detector uses on one side (d = that side's dimension).
/// Alice's rotation is drawn from povm_seed, Bob's from derive_seed(povm_seed, 1).
/// Throws Configuration when the effects cannot be made positive.
NmPovm detector_povm(const Detector& detector, bool alice, int d);

/// Parses "loo", "loo-rescaled", "das-npt", "povm" or
/// "povm:N,M,x/N,M,x" (Alice / Bob). Dimensions are filled in by the job.
Detector parse_detector(std::string_view text);

struct EstimationJob {
    int da = 2;
    int db = 2;
    Detector detector;
    std::size_t samples = 100000;
    std::uint64_t seed = 1;
    int chains = 1;
    /// Worker threads; 0 picks min(chains, hardware concurrency). Does not affect results.
    int threads = 0;
    std::optional<long> burn_in;
    std::optional<long> thinning;
    /// Optimizer restarts per sample for loo-rescaled.
    int rescale_restarts = 3;
    /// Keep the global indices of detected samples.
    bool record_hits = false;

    /// Throws Configuration for invalid detector/dimension combinations.
    void validate() const;
};

struct RatioEstimate {
    double ratio = 0.0;     ///< hits / samples
    double std_error = 0.0; ///< max(batch-means error, binomial error)
    double batch_error = 0.0;
    double binomial_error = 0.0;
    std::size_t hits = 0;
    std::size_t samples = 0;
    std::string detector;
    std::uint64_t seed = 0;
    int chains = 1;
    std::size_t repairs = 0;
    double wall_seconds = 0.0;
    std::vector<std::size_t> hit_indices;
};

inline constexpr int kBatchesPerChain = 64;

/// Batch-means standard error of the mean of a 0/1 series using 64
/// non-overlapping batches; trailing samples that do not fill a batch are
/// left out of the variance.
double batch_means_error(const std::vector<unsigned char>& indicator, int batches = kBatchesPerChain);

/// Runs the job's chains (seed of chain k: derive_seed(seed, k)) and pools the hits.
RatioEstimate estimate_ratio(const EstimationJob& job);

struct TableEntry {
    int table = 1;
    int da = 2;
    int db = 2;
    double published_value = 0.0;
    double published_error = 0.0;
    bool extended = false;
    std::size_t extended_samples = 0;
};

/// Reference values of the two published tables (Table 1: loo-rescaled,
/// Table 2: das-npt with d_A = 2).
std::vector<TableEntry> table_entries(int which);

struct TableRow {
    TableEntry entry;
    RatioEstimate estimate;
    double combined_error = 0.0; ///< √(desk² + published²)
    bool pass = false;
    std::string criterion;
};

struct TableReport {
    int table = 1;
    std::size_t scale = 0;
    std::vector<TableRow> rows;
    bool all_passed() const;
};

struct TableOptions {
    std::size_t scale = 100000;
    bool include_extended = false;
    /// Sample count for extended rows; defaults to each entry's extended_samples.
    std::optional<std::size_t> extended_scale;
    std::uint64_t seed = 1;
    int chains = 1;
    int threads = 0;
};

/// Pass rule: |desk − published| ≤ 3·√(desk_err² + published_err²); for published values
/// below 1e-4 the rule is desk ratio < 1e-3.
bool table_row_passes(const TableEntry& entry, const RatioEstimate& est, double& combined,
                      std::string& criterion);

TableReport reproduce_table(int which, const TableOptions& options);

struct AuditReport {
    int da = 2;
    int db = 2;
    std::size_t samples = 0;
    std::uint64_t seed = 0;
    std::size_t loo_hits = 0;
    std::size_t das_hits = 0;
    std::size_t counterexamples = 0; ///< detected by loo, missed by das-npt
    std::vector<std::size_t> counterexample_indices;

    double loo_ratio() const { return samples ? double(loo_hits) / double(samples) : 0.0; }
    double das_ratio() const { return samples ? double(das_hits) / double(samples) : 0.0; }
};

/// Per-sample check that LOO-detected states are also das-npt-detected.
AuditReport cross_detector_audit(int da, int db, std::size_t samples, std::uint64_t seed);

} // namespace steerlab
