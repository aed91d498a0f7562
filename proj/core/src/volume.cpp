#include "steerlab/volume.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "steerlab/entanglement.hpp"
#include "steerlab/errors.hpp"
#include "steerlab/rng.hpp"
#include "steerlab/sampler.hpp"
#include "steerlab/state.hpp"
#include "steerlab/steering.hpp"

namespace steerlab {

namespace {

std::string format_params(const PovmParams& p) {
    std::ostringstream os;
    os.precision(17);
    os << p.N << ',' << p.M << ',' << p.x;
    return os.str();
}

PovmParams parse_side(std::string_view text) {
    std::vector<std::string> parts;
    std::string cur;
    for (char ch : text) {
        if (ch == ',') {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    parts.push_back(cur);
    if (parts.size() < 2 || parts.size() > 3)
        throw Error(ErrorCode::Configuration, "povm detector side must be N,M or N,M,x");
    PovmParams p;
    try {
        std::size_t used = 0;
        p.N = std::stoi(parts[0], &used);
        if (used != parts[0].size()) throw std::invalid_argument("N");
        p.M = std::stoi(parts[1], &used);
        if (used != parts[1].size()) throw std::invalid_argument("M");
        // x = 0 marks "use the default for this d" until the job fills in d.
        p.x = parts.size() == 3 ? std::stod(parts[2], &used) : 0.0;
        if (parts.size() == 3 && used != parts[2].size()) throw std::invalid_argument("x");
    } catch (const std::logic_error&) {
        throw Error(ErrorCode::Configuration, "cannot parse povm detector parameters '" +
                                                  std::string(text) + "'");
    }
    return p;
}

PovmParams resolve_side(const std::optional<PovmParams>& given, int d) {
    if (!given) return default_params(d, d + 1, d);
    PovmParams p = *given;
    p.d = d;
    if (p.x == 0.0) p.x = default_params(d, p.N, p.M).x;
    return p;
}

/// Detector state owned by one worker.
class SampleDetector {
public:
    SampleDetector(const EstimationJob& job)
        : kind_(job.detector.kind),
          basis_a_(gellmann_basis(job.da)),
          basis_b_(gellmann_basis(job.db)),
          restarts_(job.rescale_restarts) {
        if (kind_ == DetectorKind::Povm) {
            povm_a_.emplace(detector_povm(job.detector, true, job.da));
            povm_b_.emplace(detector_povm(job.detector, false, job.db));
        }
    }

    bool operator()(const BipartiteState& rho, std::uint64_t sample_seed) const {
        switch (kind_) {
        case DetectorKind::Loo:
            return loo_steering_check(rho, basis_a_, basis_b_).violated;
        case DetectorKind::LooRescaled: {
            RescaleOptions opts;
            opts.restarts = restarts_;
            opts.seed = sample_seed;
            return rescaled_steering_detects(rho, basis_a_, basis_b_, opts);
        }
        case DetectorKind::Povm:
            return povm_steering_check(rho, *povm_a_, *povm_b_).violated;
        case DetectorKind::DasNpt:
            return das_steering_check(rho).violated;
        }
        return false;
    }

private:
    DetectorKind kind_;
    LooBasis basis_a_;
    LooBasis basis_b_;
    int restarts_;
    std::optional<NmPovm> povm_a_;
    std::optional<NmPovm> povm_b_;
};

struct ChainResult {
    std::size_t hits = 0;
    std::size_t samples = 0;
    double batch_error = 0.0;
    std::size_t repairs = 0;
    std::vector<std::size_t> hit_indices; // global
};

std::size_t chain_share(std::size_t total, int chains, int c) {
    const auto k = static_cast<std::size_t>(chains);
    const auto i = static_cast<std::size_t>(c);
    return total / k + (i < total % k ? 1 : 0);
}

ChainResult run_chain(const EstimationJob& job, int c, std::size_t offset) {
    const std::size_t n = chain_share(job.samples, job.chains, c);
    SamplerConfig cfg;
    cfg.dim = job.da * job.db;
    cfg.seed = derive_seed(job.seed, static_cast<std::uint64_t>(c));
    cfg.burn_in = job.burn_in;
    cfg.thinning = job.thinning;

    SampleDetector detect(job);
    HitAndRunChain chain(cfg);
    std::vector<unsigned char> indicator(n, 0);
    ChainResult r;
    r.samples = n;
    for (std::size_t k = 0; k < n; ++k) {
        const auto rho = BipartiteState::trusted(job.da, job.db, chain.next().density());
        if (detect(rho, derive_seed(cfg.seed, k))) {
            indicator[k] = 1;
            ++r.hits;
            if (job.record_hits) r.hit_indices.push_back(offset + k);
        }
    }
    r.batch_error = batch_means_error(indicator);
    r.repairs = chain.repairs();
    return r;
}

int resolve_threads(int requested, int chains) {
    int t = requested;
    if (t <= 0) t = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    return std::clamp(t, 1, chains);
}

double binomial_error(std::size_t hits, std::size_t n) {
    const double p = double(hits) / double(n);
    return std::sqrt(p * (1.0 - p) / double(n));
}

} // namespace

std::string Detector::tag() const {
    switch (kind) {
    case DetectorKind::Loo: return "loo";
    case DetectorKind::LooRescaled: return "loo-rescaled";
    case DetectorKind::DasNpt: return "das-npt";
    case DetectorKind::Povm: {
        std::string t = "povm";
        if (povm_a || povm_b) {
            t += ':';
            t += povm_a ? format_params(*povm_a) : "default";
            t += '/';
            t += povm_b ? format_params(*povm_b) : "default";
        }
        if (povm_seed != 0) t += "@" + std::to_string(povm_seed);
        return t;
    }
    }
    return "unknown";
}

NmPovm detector_povm(const Detector& detector, bool alice, int d) {
    ConstructOptions opts;
    opts.seed = alice ? detector.povm_seed : derive_seed(detector.povm_seed, 1);
    try {
        return construct_povm(resolve_side(alice ? detector.povm_a : detector.povm_b, d), opts);
    } catch (const ConstructionFailed& e) {
        throw Error(ErrorCode::Configuration, std::string("povm detector could not be built: ") + e.what());
    }
}

Detector parse_detector(std::string_view text) {
    Detector d;
    if (text == "loo") {
        d.kind = DetectorKind::Loo;
    } else if (text == "loo-rescaled") {
        d.kind = DetectorKind::LooRescaled;
    } else if (text == "das-npt") {
        d.kind = DetectorKind::DasNpt;
    } else if (text == "povm") {
        d.kind = DetectorKind::Povm;
    } else if (text.substr(0, 5) == "povm:") {
        d.kind = DetectorKind::Povm;
        const auto body = text.substr(5);
        const auto slash = body.find('/');
        if (slash == std::string_view::npos)
            throw Error(ErrorCode::Configuration, "povm detector needs Alice/Bob parameters: povm:N,M,x/N,M,x");
        d.povm_a = parse_side(body.substr(0, slash));
        d.povm_b = parse_side(body.substr(slash + 1));
    } else {
        throw Error(ErrorCode::Configuration, "unknown detector '" + std::string(text) + "'");
    }
    return d;
}

void EstimationJob::validate() const {
    if (da < 2 || db < 2)
        throw Error(ErrorCode::Configuration, "local dimensions must be at least 2");
    if (samples == 0) throw Error(ErrorCode::Configuration, "sample count must be positive");
    if (chains < 1) throw Error(ErrorCode::Configuration, "chain count must be positive");
    if (static_cast<std::size_t>(chains) > samples)
        throw Error(ErrorCode::Configuration, "more chains than samples");
    if (rescale_restarts < 0) throw Error(ErrorCode::Configuration, "restarts must be non-negative");
    SamplerConfig cfg;
    cfg.dim = da * db;
    cfg.burn_in = burn_in;
    cfg.thinning = thinning;
    try {
        cfg.validate();
    } catch (const Error& e) {
        throw Error(ErrorCode::Configuration, e.what());
    }
    switch (detector.kind) {
    case DetectorKind::DasNpt:
        if (da != 2) throw Error(ErrorCode::Configuration, "das-npt requires d_A = 2");
        break;
    case DetectorKind::Povm: {
        const PovmParams pa = resolve_side(detector.povm_a, da);
        const PovmParams pb = resolve_side(detector.povm_b, db);
        for (const auto& p : {pa, pb}) {
            if (!p.informationally_complete())
                throw Error(ErrorCode::Configuration,
                            "povm detector requires informationally complete (N,M) on both sides");
            try {
                p.validate();
            } catch (const Error& e) {
                throw Error(ErrorCode::Configuration, e.what());
            }
        }
        break;
    }
    default: break;
    }
}

double batch_means_error(const std::vector<unsigned char>& indicator, int batches) {
    const std::size_t n = indicator.size();
    const auto b = static_cast<std::size_t>(std::max(batches, 2));
    const std::size_t size = n / b;
    if (size == 0) return 0.0;
    std::vector<double> means(b, 0.0);
    for (std::size_t k = 0; k < b; ++k) {
        std::size_t s = 0;
        for (std::size_t i = k * size; i < (k + 1) * size; ++i) s += indicator[i];
        means[k] = double(s) / double(size);
    }
    double mean = 0.0;
    for (double m : means) mean += m;
    mean /= double(b);
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= double(b - 1);
    return std::sqrt(var / double(b));
}

RatioEstimate estimate_ratio(const EstimationJob& job) {
    job.validate();
    const auto start = std::chrono::steady_clock::now();

    std::vector<std::size_t> offsets(static_cast<std::size_t>(job.chains), 0);
    for (int c = 1; c < job.chains; ++c)
        offsets[static_cast<std::size_t>(c)] =
            offsets[static_cast<std::size_t>(c - 1)] + chain_share(job.samples, job.chains, c - 1);

    // Build one detector up front so configuration errors surface before any worker starts.
    { SampleDetector probe(job); }

    std::vector<ChainResult> results(static_cast<std::size_t>(job.chains));
    std::atomic<int> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (int c = next++; c < job.chains; c = next++) {
            try {
                results[static_cast<std::size_t>(c)] = run_chain(job, c, offsets[static_cast<std::size_t>(c)]);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                if (!failure) failure = std::current_exception();
            }
        }
    };
    const int threads = resolve_threads(job.threads, job.chains);
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (failure) std::rethrow_exception(failure);

    RatioEstimate est;
    est.detector = job.detector.tag();
    est.seed = job.seed;
    est.chains = job.chains;
    est.samples = job.samples;
    double pooled = 0.0;
    for (const auto& r : results) {
        est.hits += r.hits;
        est.repairs += r.repairs;
        const double w = double(r.samples) / double(job.samples);
        pooled += w * w * r.batch_error * r.batch_error;
        est.hit_indices.insert(est.hit_indices.end(), r.hit_indices.begin(), r.hit_indices.end());
    }
    est.ratio = double(est.hits) / double(est.samples);
    est.binomial_error = binomial_error(est.hits, est.samples);
    est.batch_error = std::sqrt(pooled);
    est.std_error = std::max(est.batch_error, est.binomial_error);
    est.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return est;
}

std::vector<TableEntry> table_entries(int which) {
    if (which == 1) {
        return {
            {1, 2, 2, 5.011e-2, 1.5e-4, false, 100000},
            {1, 2, 3, 1.92e-5, 4.1e-6, true, 1000000},
            {1, 3, 2, 5.72e-5, 6.4e-6, true, 1000000},
            {1, 3, 3, 0.0, 0.0, true, 1000000},
        };
    }
    if (which == 2) {
        return {
            {2, 2, 2, 0.05167, 1.5e-4, false, 100000},
            {2, 2, 3, 0.10936, 3.4e-4, false, 100000},
            {2, 2, 4, 0.17278, 5.6e-4, false, 100000},
            {2, 2, 5, 0.24009, 8.3e-4, true, 50000},
            {2, 2, 6, 0.3119, 1.3e-3, true, 50000},
            {2, 2, 7, 0.3842, 1.5e-3, true, 50000},
        };
    }
    throw Error(ErrorCode::Configuration, "table must be 1 or 2");
}

bool table_row_passes(const TableEntry& entry, const RatioEstimate& est, double& combined,
                      std::string& criterion) {
    combined = std::hypot(est.std_error, entry.published_error);
    if (entry.published_value < 1e-4) {
        criterion = "desk ratio < 1e-3";
        return est.ratio < 1e-3;
    }
    criterion = "|desk - published| <= 3 combined stderr";
    return std::abs(est.ratio - entry.published_value) <= 3.0 * combined;
}

bool TableReport::all_passed() const {
    return std::all_of(rows.begin(), rows.end(), [](const TableRow& r) { return r.pass; });
}

TableReport reproduce_table(int which, const TableOptions& options) {
    if (options.scale < 10000) throw Error(ErrorCode::Configuration, "table scale must be at least 1e4");
    const auto entries = table_entries(which);
    TableReport report;
    report.table = which;
    report.scale = options.scale;
    for (const auto& entry : entries) {
        if (entry.extended && !options.include_extended) continue;
        EstimationJob job;
        job.da = entry.da;
        job.db = entry.db;
        job.detector.kind = which == 1 ? DetectorKind::LooRescaled : DetectorKind::DasNpt;
        job.samples = entry.extended ? options.extended_scale.value_or(entry.extended_samples)
                                     : options.scale;
        job.seed = options.seed;
        job.chains = options.chains;
        job.threads = options.threads;
        TableRow row;
        row.entry = entry;
        row.estimate = estimate_ratio(job);
        row.pass = table_row_passes(entry, row.estimate, row.combined_error, row.criterion);
        report.rows.push_back(std::move(row));
    }
    return report;
}

AuditReport cross_detector_audit(int da, int db, std::size_t samples, std::uint64_t seed) {
    if (da != 2 || (db != 2 && db != 3))
        throw Error(ErrorCode::Configuration, "cross-detector audit needs d_A = 2 and d_B in {2,3}");
    if (samples == 0) throw Error(ErrorCode::Configuration, "sample count must be positive");
    AuditReport report;
    report.da = da;
    report.db = db;
    report.samples = samples;
    report.seed = seed;
    const LooBasis ga = gellmann_basis(da);
    const LooBasis gb = gellmann_basis(db);
    SamplerConfig cfg;
    cfg.dim = da * db;
    cfg.seed = derive_seed(seed, 0);
    HitAndRunChain chain(cfg);
    for (std::size_t k = 0; k < samples; ++k) {
        const auto rho = BipartiteState::trusted(da, db, chain.next().density());
        const bool loo = loo_steering_check(rho, ga, gb).violated;
        const bool das = das_steering_check(rho).violated;
        report.loo_hits += loo;
        report.das_hits += das;
        if (loo && !das) {
            ++report.counterexamples;
            report.counterexample_indices.push_back(k);
        }
    }
    return report;
}

} // namespace steerlab
