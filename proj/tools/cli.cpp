#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "steerlab/entanglement.hpp"
#include "steerlab/errors.hpp"
#include "steerlab/io.hpp"
#include "steerlab/nm_povm.hpp"
#include "steerlab/state.hpp"
#include "steerlab/steering.hpp"
#include "steerlab/volume.hpp"

namespace steerlab::cli {

namespace {

using nlohmann::json;

struct Globals {
    std::uint64_t seed = 1;
    int workers = 0;
    std::string format = "text";
    std::string out;
};

/// Either the caller's stream or the --out file.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw Error(ErrorCode::Configuration, "cannot open output file '" + path + "'");
        stream_ = file_.get();
    }
    std::ostream& operator*() { return *stream_; }

private:
    std::unique_ptr<std::ofstream> file_;
    std::ostream* stream_;
};

json make_header(const std::string& command, const Globals& g, json config) {
    return {{"tool", "steerlab"},
            {"version", std::string(version())},
            {"command", command},
            {"seed", g.seed},
            {"config", std::move(config)}};
}

void text_header(std::ostream& os, const json& header) {
    os << "# steerlab " << header["version"].get<std::string>() << ' '
       << header["command"].get<std::string>() << " seed=" << header["seed"].dump()
       << " config=" << header["config"].dump() << '\n';
}

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Configuration, "cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::vector<double> split_reals(const std::string& text, const std::string& what) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        double v = 0.0;
        try {
            v = std::stod(item, &used);
        } catch (const std::logic_error&) {
            used = 0;
        }
        if (used == 0 || used != item.size())
            throw Error(ErrorCode::Configuration, "cannot parse '" + item + "' in " + what);
        out.push_back(v);
    }
    return out;
}

BipartiteState named_state(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string args = colon == std::string::npos ? "" : spec.substr(colon + 1);
    const auto values = args.empty() ? std::vector<double>{} : split_reals(args, "state '" + spec + "'");
    auto expect = [&](std::size_t n) {
        if (values.size() != n)
            throw Error(ErrorCode::Configuration,
                        "state '" + name + "' takes " + std::to_string(n) + " parameter(s)");
    };
    if (name == "singlet") {
        expect(0);
        return singlet();
    }
    if (name == "werner") {
        expect(1);
        return werner(values[0]);
    }
    if (name == "bell-diag") {
        expect(3);
        return bell_diagonal_state({values[0], values[1], values[2]});
    }
    if (name == "isotropic") {
        expect(2);
        const double d = values[0];
        if (d != std::floor(d)) throw Error(ErrorCode::Configuration, "isotropic dimension must be an integer");
        return isotropic(static_cast<int>(d), values[1]);
    }
    throw Error(ErrorCode::Configuration,
                "unknown state '" + name + "' (singlet, werner:w, bell-diag:t1,t2,t3, isotropic:d,v)");
}

std::string yes_no(bool b) { return b ? "yes" : "no"; }

std::string real_text(double v) {
    std::ostringstream os;
    os << std::setprecision(12) << v;
    return os.str();
}

// --- povm --------------------------------------------------------------------

struct PovmArgs {
    int d = 2;
    int N = 1;
    int M = 4;
    std::optional<double> x;
    bool aligned = false;
    bool search = false;
    std::string file;
};

int povm_construct(const PovmArgs& a, const Globals& g, std::ostream& out) {
    PovmParams p = default_params(a.d, a.N, a.M);
    if (a.x) p.x = *a.x;
    p.validate();
    if (a.aligned && a.search)
        throw Error(ErrorCode::Configuration, "--aligned and --search are mutually exclusive");

    ConstructOptions opts;
    opts.seed = g.seed;
    std::string rotation = "random";
    if (a.aligned) {
        opts.rotation = aligned_rotation(p);
        rotation = "aligned";
    } else if (a.search) {
        RotationSearchOptions so;
        so.seed = g.seed;
        opts.rotation = search_positive_rotation(p, so).rotation;
        rotation = "search";
    }
    const NmPovm povm = construct_povm(p, opts);
    const json header = make_header("povm construct", g,
                                    {{"d", p.d}, {"N", p.N}, {"M", p.M}, {"x", p.x}, {"rotation", rotation}});
    Sink sink(g.out, out);
    *sink << povm_to_json(povm, header);
    return kExitOk;
}

int povm_validate(const PovmArgs& a, const Globals& g, std::ostream& out) {
    const NmPovm povm = povm_from_json(read_file(a.file));
    const ValidationReport report = validate_povm(povm);
    const PovmParams& p = povm.params();
    const json header = make_header("povm validate", g,
                                    {{"file", a.file}, {"d", p.d}, {"N", p.N}, {"M", p.M}, {"x", p.x}});
    Sink sink(g.out, out);
    if (g.format == "json") {
        *sink << json{{"header", header}, {"report", to_json(report)}}.dump(2) << '\n';
    } else if (g.format == "csv") {
        *sink << "# " << header.dump() << "\nrelation,max_deviation,passed\n";
        for (const auto& r : report.relations)
            *sink << r.name << ',' << real_text(r.max_deviation) << ',' << (r.passed ? "pass" : "fail") << '\n';
    } else {
        text_header(*sink, header);
        for (const auto& r : report.relations)
            *sink << std::left << std::setw(24) << r.name << real_text(r.max_deviation) << "  "
                  << (r.passed ? "pass" : "FAIL") << '\n';
        *sink << "min effect eigenvalue " << real_text(report.min_eigenvalue) << '\n'
              << (report.passed ? "valid" : "INVALID: " + report.failures()) << '\n';
    }
    return report.passed ? kExitOk : kExitValidation;
}

int povm_spectrum(const PovmArgs& a, const Globals& g, std::ostream& out) {
    const NmPovm povm = povm_from_json(read_file(a.file));
    const auto spectrum = sts_spectrum(povm);
    const auto expected = expected_sts_spectrum(povm.params());
    double dev = 0.0;
    for (std::size_t i = 0; i < spectrum.size(); ++i) dev = std::max(dev, std::abs(spectrum[i] - expected[i]));
    const PovmParams& p = povm.params();
    const json header = make_header("povm spectrum", g,
                                    {{"file", a.file}, {"d", p.d}, {"N", p.N}, {"M", p.M}, {"x", p.x}});
    Sink sink(g.out, out);
    if (g.format == "json") {
        *sink << json{{"header", header}, {"spectrum", spectrum}, {"expected", expected}, {"max_deviation", dev}}
                     .dump(2)
              << '\n';
    } else {
        // Round-off below 1e-12 is shown as zero in the plain formats.
        auto clean = [](double v) { return std::abs(v) < 1e-12 ? 0.0 : v; };
        if (g.format == "csv") {
            *sink << "# " << header.dump() << "\nindex,eigenvalue,expected\n";
            for (std::size_t i = 0; i < spectrum.size(); ++i)
                *sink << i << ',' << real_text(clean(spectrum[i])) << ',' << real_text(clean(expected[i])) << '\n';
        } else {
            text_header(*sink, header);
            *sink << "spectrum:";
            for (double v : spectrum) *sink << ' ' << real_text(clean(v));
            *sink << "\nexpected:";
            for (double v : expected) *sink << ' ' << real_text(clean(v));
            *sink << "\nmax deviation " << real_text(dev) << '\n';
        }
    }
    return kExitOk;
}

// --- detect ------------------------------------------------------------------

struct DetectArgs {
    std::string state;
    std::string state_file;
    std::string detector = "loo";
    std::string povm_a;
    std::string povm_b;
    int restarts = 20;
    double mu = kDasMuMax;
};

int detect(const DetectArgs& a, const Globals& g, std::ostream& out) {
    if (a.state.empty() == a.state_file.empty())
        throw Error(ErrorCode::Configuration, "give exactly one of --state or --state-file");
    std::optional<BipartiteState> loaded;
    try {
        loaded.emplace(a.state.empty() ? state_from_json(json::parse(read_file(a.state_file)))
                                       : named_state(a.state));
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("state file is not valid JSON: ") + e.what());
    }
    const BipartiteState& rho = *loaded;

    json config = {{"detector", a.detector}, {"dA", rho.da()}, {"dB", rho.db()}};
    if (!a.state.empty()) config["state"] = a.state;
    else config["state_file"] = a.state_file;

    json result;
    std::vector<std::pair<std::string, std::string>> fields;
    auto steering = [&](const SteeringVerdict& v) {
        result = to_json(v);
        fields = {{"detector", v.detector},
                  {"lhs", real_text(v.lhs)},
                  {"rhs", real_text(v.rhs)},
                  {"margin", real_text(v.margin)},
                  {"violated", yes_no(v.violated)}};
        if (v.scaling_residual) fields.emplace_back("scaling_residual", real_text(*v.scaling_residual));
        if (!v.note.empty()) fields.emplace_back("note", v.note);
    };
    auto entanglement = [&](const EntanglementVerdict& v) {
        result = to_json(v);
        fields = {{"method", std::string(to_string(v.method))},
                  {"witness", real_text(v.witness)},
                  {"entangled", yes_no(v.entangled)},
                  {"conclusive", yes_no(v.conclusive)}};
    };

    const std::string& d = a.detector;
    if (d == "loo" || d == "loo-reverse") {
        const LooBasis ga = gellmann_basis(rho.da()), gb = gellmann_basis(rho.db());
        steering(d == "loo" ? loo_steering_check(rho, ga, gb) : loo_steering_check_reverse(rho, ga, gb));
    } else if (d == "loo-rescaled") {
        RescaleOptions opts;
        opts.restarts = a.restarts;
        opts.seed = g.seed;
        config["restarts"] = a.restarts;
        const auto r = optimize_rescaled_steering(rho, gellmann_basis(rho.da()), gellmann_basis(rho.db()), opts);
        steering(r.verdict);
        result["h"] = std::vector<double>(r.h.h.data(), r.h.h.data() + r.h.h.size());
    } else if (d == "povm") {
        Detector det = parse_detector(a.povm_a.empty() && a.povm_b.empty()
                                          ? std::string("povm")
                                          : "povm:" + (a.povm_a.empty() ? std::to_string(rho.da() + 1) + "," +
                                                                              std::to_string(rho.da())
                                                                        : a.povm_a) +
                                                "/" +
                                                (a.povm_b.empty() ? std::to_string(rho.db() + 1) + "," +
                                                                        std::to_string(rho.db())
                                                                  : a.povm_b));
        det.povm_seed = g.seed;
        config["povm"] = det.tag();
        steering(povm_steering_check(rho, detector_povm(det, true, rho.da()), detector_povm(det, false, rho.db())));
    } else if (d == "das-npt") {
        DasConfig cfg{a.mu};
        config["mu"] = a.mu;
        steering(das_steering_check(rho, cfg));
    } else if (d == "ccnr") {
        entanglement(ccnr_entanglement_check(rho, gellmann_basis(rho.da()), gellmann_basis(rho.db())));
    } else if (d == "npt") {
        entanglement(is_npt(rho));
    } else {
        throw Error(ErrorCode::Configuration, "unknown detector '" + d +
                                                  "' (loo, loo-reverse, loo-rescaled, povm, das-npt, ccnr, npt)");
    }

    const json header = make_header("detect", g, config);
    Sink sink(g.out, out);
    if (g.format == "json") {
        *sink << json{{"header", header}, {"verdict", result}}.dump(2) << '\n';
    } else if (g.format == "csv") {
        *sink << "# " << header.dump() << '\n';
        for (std::size_t i = 0; i < fields.size(); ++i) *sink << (i ? "," : "") << fields[i].first;
        *sink << '\n';
        for (std::size_t i = 0; i < fields.size(); ++i) *sink << (i ? "," : "") << fields[i].second;
        *sink << '\n';
    } else {
        text_header(*sink, header);
        for (const auto& [k, v] : fields) *sink << std::left << std::setw(18) << k << v << '\n';
    }
    return kExitOk;
}

// --- volume ------------------------------------------------------------------

struct VolumeArgs {
    int da = 2;
    int db = 2;
    std::string detector = "loo";
    std::size_t samples = 100000;
    int chains = 1;
    std::optional<long> burn_in;
    std::optional<long> thinning;
    int restarts = 3;
    bool record_hits = false;
};

struct TableArgs {
    int which = 2;
    std::size_t scale = 100000;
    bool extended = false;
    std::optional<std::size_t> extended_scale;
    int chains = 1;
};

int volume(const VolumeArgs& a, const Globals& g, std::ostream& out) {
    EstimationJob job;
    job.da = a.da;
    job.db = a.db;
    job.detector = parse_detector(a.detector);
    if (job.detector.kind == DetectorKind::Povm) job.detector.povm_seed = g.seed;
    job.samples = a.samples;
    job.seed = g.seed;
    job.chains = a.chains;
    job.threads = g.workers;
    job.burn_in = a.burn_in;
    job.thinning = a.thinning;
    job.rescale_restarts = a.restarts;
    job.record_hits = a.record_hits;
    const RatioEstimate est = estimate_ratio(job);

    json record = estimate_record(job, est);
    record["command"] = "volume";
    if (a.record_hits) record["hit_indices"] = est.hit_indices;
    const json header = make_header("volume", g, to_json(job));
    Sink sink(g.out, out);
    if (g.format == "json") {
        *sink << record.dump() << '\n';
    } else if (g.format == "csv") {
        *sink << "# " << header.dump() << '\n'
              << "dA,dB,detector,samples,hits,ratio,stderr,seed,chains,repairs,wall_seconds\n"
              << job.da << ',' << job.db << ',' << est.detector << ',' << est.samples << ',' << est.hits << ','
              << real_text(est.ratio) << ',' << real_text(est.std_error) << ',' << est.seed << ',' << est.chains
              << ',' << est.repairs << ',' << real_text(est.wall_seconds) << '\n';
    } else {
        text_header(*sink, header);
        *sink << "detector " << est.detector << "  dA=" << job.da << " dB=" << job.db << '\n'
              << "ratio    " << real_text(est.ratio) << " +/- " << real_text(est.std_error) << '\n'
              << "hits     " << est.hits << " / " << est.samples << '\n'
              << "repairs  " << est.repairs << '\n'
              << "wall     " << std::fixed << std::setprecision(2) << est.wall_seconds << " s\n";
    }
    return kExitOk;
}

int volume_table(const TableArgs& a, const Globals& g, std::ostream& out) {
    TableOptions opts;
    opts.scale = a.scale;
    opts.include_extended = a.extended;
    opts.extended_scale = a.extended_scale;
    opts.seed = g.seed;
    opts.chains = a.chains;
    opts.threads = g.workers;
    const TableReport report = reproduce_table(a.which, opts);

    json config = {{"table", a.which}, {"scale", a.scale}, {"extended", a.extended}, {"chains", a.chains}};
    if (a.extended_scale) config["extended_scale"] = *a.extended_scale;
    const json header = make_header("volume table", g, config);
    Sink sink(g.out, out);
    if (g.format == "json") {
        for (const auto& row : report.rows) {
            json rec = to_json(row);
            rec["version"] = std::string(version());
            rec["command"] = "volume table";
            rec["scale"] = a.scale;
            *sink << rec.dump() << '\n';
        }
    } else if (g.format == "csv") {
        *sink << "# " << header.dump() << '\n';
        write_table_csv(*sink, report);
    } else {
        text_header(*sink, header);
        write_table_text(*sink, report);
    }
    return report.all_passed() ? kExitOk : kExitValidation;
}

// --- bellscan ----------------------------------------------------------------

int bellscan(double resolution, const Globals& g, std::ostream& out) {
    const auto grid = bell_diagonal_scan(resolution);
    const json header = make_header("bellscan", g, {{"resolution", resolution}});
    Sink sink(g.out, out);
    if (g.format == "json") {
        json points = json::array();
        for (const auto& p : grid)
            points.push_back({{"t1", p.t.t1},
                              {"t2", p.t.t2},
                              {"t3", p.t.t3},
                              {"class", std::string(to_string(p.cls))},
                              {"lhs", p.lhs},
                              {"rhs", p.rhs}});
        *sink << json{{"header", header}, {"points", points}}.dump() << '\n';
    } else {
        *sink << "# " << header.dump() << '\n';
        write_bell_scan_csv(*sink, grid);
    }
    return kExitOk;
}

int default_workers() {
    if (const char* env = std::getenv(kWorkersEnv)) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v >= 0 && v < 4096) return static_cast<int>(v);
    }
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"EPR steering detection with (N,M)-POVMs and volume-ratio estimation", "steerlab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    Globals g;
    g.workers = default_workers();
    app.add_option("--seed", g.seed, "Base seed for every random choice")->capture_default_str();
    app.add_option("--workers", g.workers,
                   std::string("Worker threads for volume jobs (0 = all cores; default from ") + kWorkersEnv +
                       ")")
        ->check(CLI::NonNegativeNumber);
    app.add_option("--format", g.format, "Output format")
        ->check(CLI::IsMember({"json", "csv", "text"}))
        ->capture_default_str();
    app.add_option("--out", g.out, "Write results to this file instead of stdout");

    // povm
    PovmArgs pa;
    auto* povm = app.add_subcommand("povm", "Construct, validate or inspect an (N,M)-POVM");
    povm->require_subcommand(1);
    povm->fallthrough();
    auto* construct = povm->add_subcommand("construct", "Build an informationally complete (N,M)-POVM");
    construct->fallthrough();
    construct->add_option("-d", pa.d, "Hilbert-space dimension")->required();
    construct->add_option("-N", pa.N, "Number of measurements")->required();
    construct->add_option("-M", pa.M, "Outcomes per measurement")->required();
    construct->add_option("-x", pa.x, "Tr(Pi^2); default d/M^2 + 0.1*(range)");
    construct->add_flag("--aligned", pa.aligned, "Use the identity rotation O");
    construct->add_flag("--search", pa.search, "Search for a rotation with positive effects");
    auto* validate = povm->add_subcommand("validate", "Check the defining relations of a POVM file");
    validate->fallthrough();
    validate->add_option("file", pa.file, "POVM JSON file")->required()->check(CLI::ExistingFile);
    auto* spectrum = povm->add_subcommand("spectrum", "Eigenvalues of S^T S for a POVM file");
    spectrum->fallthrough();
    spectrum->add_option("file", pa.file, "POVM JSON file")->required()->check(CLI::ExistingFile);

    // detect
    DetectArgs da;
    auto* det = app.add_subcommand("detect", "Apply a steering or entanglement test to one state");
    det->fallthrough();
    det->add_option("--state", da.state, "singlet | werner:w | bell-diag:t1,t2,t3 | isotropic:d,v");
    det->add_option("--state-file", da.state_file, "State JSON file {dA, dB, rho}");
    det->add_option("--detector", da.detector, "loo | loo-reverse | loo-rescaled | povm | das-npt | ccnr | npt")
        ->capture_default_str();
    det->add_option("--povm-a", da.povm_a, "Alice's POVM for --detector povm: N,M[,x]");
    det->add_option("--povm-b", da.povm_b, "Bob's POVM for --detector povm: N,M[,x]");
    det->add_option("--restarts", da.restarts, "Random restarts for loo-rescaled")
        ->capture_default_str()
        ->check(CLI::NonNegativeNumber);
    det->add_option("--mu", da.mu, "Mixing weight of the das-npt tau state")->capture_default_str();

    // volume
    VolumeArgs va;
    TableArgs ta;
    auto* vol = app.add_subcommand("volume", "Estimate the volume ratio of detected states");
    vol->require_subcommand(0, 1);
    vol->fallthrough();
    vol->add_option("--da", va.da, "Alice's dimension")->capture_default_str();
    vol->add_option("--db", va.db, "Bob's dimension")->capture_default_str();
    vol->add_option("--detector", va.detector, "loo | loo-rescaled | povm[:N,M,x/N,M,x] | das-npt")
        ->capture_default_str();
    vol->add_option("-n,--samples", va.samples, "Number of sampled states")->capture_default_str();
    vol->add_option("--chains", va.chains, "Independent sampler chains (part of the replay key)")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);
    vol->add_option("--burn-in", va.burn_in, "Burn-in moves per chain (default 50(D^2-1))");
    vol->add_option("--thinning", va.thinning, "Moves between emitted states (default D^2-1)");
    vol->add_option("--restarts", va.restarts, "Optimizer restarts per sample for loo-rescaled")
        ->capture_default_str();
    vol->add_flag("--record-hits", va.record_hits, "List the indices of detected samples (json)");
    auto* table = vol->add_subcommand("table", "Reproduce a published table of volume ratios");
    table->fallthrough();
    table->add_option("--which", ta.which, "1 (loo-rescaled) or 2 (das-npt)")
        ->required()
        ->check(CLI::IsMember({1, 2}));
    table->add_option("--scale", ta.scale, "Samples per regular entry (>= 1e4)")->capture_default_str();
    table->add_flag("--extended", ta.extended, "Include the long-running entries");
    table->add_option("--extended-scale", ta.extended_scale, "Samples per extended entry");
    table->add_option("--chains", ta.chains, "Independent sampler chains per entry")
        ->capture_default_str()
        ->check(CLI::PositiveNumber);

    // bellscan
    double resolution = 0.02;
    auto* scan = app.add_subcommand("bellscan", "Classify a grid of Bell-diagonal states (CSV)");
    scan->fallthrough();
    scan->add_option("--resolution", resolution, "Grid spacing in t")->capture_default_str();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (povm->parsed()) {
            if (construct->parsed()) return povm_construct(pa, g, out);
            if (validate->parsed()) return povm_validate(pa, g, out);
            return povm_spectrum(pa, g, out);
        }
        if (det->parsed()) return detect(da, g, out);
        if (vol->parsed()) return table->parsed() ? volume_table(ta, g, out) : volume(va, g, out);
        if (scan->parsed()) return bellscan(resolution, g, out);
    } catch (const ConstructionFailed& e) {
        err << "steerlab: " << e.what() << '\n';
        return kExitValidation;
    } catch (const Error& e) {
        err << "steerlab: " << to_string(e.code()) << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        err << "steerlab: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

} // namespace steerlab::cli
