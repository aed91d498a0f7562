#include "steerlab/io.hpp"

#include <cstdio>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "steerlab/errors.hpp"

namespace steerlab {

namespace {

using nlohmann::json;

json complex_rows(const CMatrix& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back({m(r, c).real(), m(r, c).imag()});
    return out;
}

CMatrix complex_matrix(const json& data, int dim, const char* what) {
    if (!data.is_array() || data.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim))
        throw Error(ErrorCode::Parse, std::string(what) + " must hold dim*dim [re, im] pairs");
    CMatrix m(dim, dim);
    std::size_t k = 0;
    for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c, ++k) {
            const json& e = data[k];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number())
                throw Error(ErrorCode::Parse, std::string(what) + " entries must be [re, im] pairs");
            m(r, c) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    return m;
}

template <class T>
T required(const json& doc, const char* key) {
    if (!doc.is_object() || !doc.contains(key))
        throw Error(ErrorCode::Parse, std::string("missing field '") + key + "'");
    try {
        return doc.at(key).get<T>();
    } catch (const json::exception&) {
        throw Error(ErrorCode::Parse, std::string("field '") + key + "' has the wrong type");
    }
}

std::string csv_real(double v) {
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

} // namespace

std::string_view version() noexcept { return STEERLAB_VERSION; }

std::string format_real(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", value);
    return buf;
}

std::string povm_to_json(const NmPovm& povm, const json& header) {
    const PovmParams& p = povm.params();
    std::ostringstream os;
    os << "{\n  \"format\": \"steerlab-nm-povm\",\n  \"version\": \"" << version() << "\",\n";
    if (!header.is_null()) os << "  \"header\": " << header.dump() << ",\n";
    os << "  \"params\": {\"d\": " << p.d << ", \"N\": " << p.N << ", \"M\": " << p.M
       << ", \"x\": " << format_real(p.x) << "},\n  \"basis\": ";
    if (povm.basis().is_gellmann()) {
        os << "\"canonical-gellmann\"";
    } else {
        os << "{\"matrices\": [";
        for (int i = 0; i < povm.basis().size(); ++i) {
            const CMatrix& m = povm.basis()[i].matrix();
            os << (i ? ",\n    [" : "\n    [");
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c)
                    os << ((r || c) ? ", [" : "[") << format_real(m(r, c).real()) << ", "
                       << format_real(m(r, c).imag()) << ']';
            os << ']';
        }
        os << "]}";
    }
    const RMatrix& s = povm.coefficients();
    os << ",\n  \"S\": {\"rows\": " << s.rows() << ", \"cols\": " << s.cols() << ", \"data\": [";
    for (Eigen::Index r = 0; r < s.rows(); ++r) {
        os << (r ? ",\n    " : "\n    ");
        for (Eigen::Index c = 0; c < s.cols(); ++c) os << (c ? ", " : "") << format_real(s(r, c));
    }
    os << "\n  ]}\n}\n";
    return os.str();
}

NmPovm povm_from_json(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::Parse, std::string("POVM document is not valid JSON: ") + e.what());
    }
    const json params = required<json>(doc, "params");
    PovmParams p;
    p.d = required<int>(params, "d");
    p.N = required<int>(params, "N");
    p.M = required<int>(params, "M");
    p.x = required<double>(params, "x");
    p.validate();

    const json basis_doc = required<json>(doc, "basis");
    std::optional<LooBasis> basis;
    if (basis_doc.is_string()) {
        if (basis_doc.get<std::string>() != "canonical-gellmann")
            throw Error(ErrorCode::Parse, "unknown basis identifier '" + basis_doc.get<std::string>() + "'");
        basis.emplace(gellmann_basis(p.d));
    } else {
        const json mats = required<json>(basis_doc, "matrices");
        if (!mats.is_array()) throw Error(ErrorCode::Parse, "basis matrices must be an array");
        std::vector<HermitianMatrix> elements;
        for (const auto& m : mats) elements.emplace_back(complex_matrix(m, p.d, "basis matrix"));
        basis.emplace(std::move(elements));
    }

    const json s_doc = required<json>(doc, "S");
    const int rows = required<int>(s_doc, "rows");
    const int cols = required<int>(s_doc, "cols");
    if (rows != p.d * p.d || cols != p.effect_count())
        throw Error(ErrorCode::Parse, "S must be d^2 x NM");
    const auto data = required<std::vector<double>>(s_doc, "data");
    if (data.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols))
        throw Error(ErrorCode::Parse, "S data length does not match rows*cols");
    RMatrix s(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) s(r, c) = data[static_cast<std::size_t>(r * cols + c)];
    return NmPovm(p, std::move(*basis), std::move(s));
}

json state_to_json(const BipartiteState& rho) {
    return {{"dA", rho.da()}, {"dB", rho.db()}, {"rho", complex_rows(rho.matrix())}};
}

BipartiteState state_from_json(const json& doc) {
    const int da = required<int>(doc, "dA");
    const int db = required<int>(doc, "dB");
    if (da < 1 || db < 1) throw Error(ErrorCode::Parse, "dA and dB must be positive");
    return BipartiteState(da, db, complex_matrix(required<json>(doc, "rho"), da * db, "rho"));
}

json to_json(const SteeringVerdict& v) {
    json j = {{"detector", v.detector}, {"lhs", v.lhs},         {"rhs", v.rhs},
              {"margin", v.margin},     {"violated", v.violated}};
    if (v.scaling_residual) j["scaling_residual"] = *v.scaling_residual;
    if (!v.note.empty()) j["note"] = v.note;
    return j;
}

json to_json(const EntanglementVerdict& v) {
    return {{"method", std::string(to_string(v.method))},
            {"witness", v.witness},
            {"entangled", v.entangled},
            {"conclusive", v.conclusive}};
}

json to_json(const ValidationReport& r) {
    json rel = json::array();
    for (const auto& c : r.relations)
        rel.push_back({{"name", c.name}, {"max_deviation", c.max_deviation}, {"passed", c.passed}});
    return {{"passed", r.passed},
            {"max_deviation", r.max_deviation()},
            {"min_eigenvalue", r.min_eigenvalue},
            {"relations", rel}};
}

json to_json(const BlochDump& dump) {
    json samples = json::array();
    for (const auto& v : dump.samples) samples.push_back(std::vector<double>(v.data(), v.data() + v.size()));
    return {{"format", "steerlab-bloch-dump"},
            {"version", std::string(version())},
            {"dim", dump.dim},
            {"seed", dump.seed},
            {"burn_in", dump.burn_in},
            {"thinning", dump.thinning},
            {"samples", samples}};
}

BlochDump bloch_dump_from_json(const json& doc) {
    BlochDump dump;
    dump.dim = required<int>(doc, "dim");
    dump.seed = required<std::uint64_t>(doc, "seed");
    dump.burn_in = required<long>(doc, "burn_in");
    dump.thinning = required<long>(doc, "thinning");
    const auto rows = required<std::vector<std::vector<double>>>(doc, "samples");
    const auto n = static_cast<std::size_t>(dump.dim * dump.dim - 1);
    for (const auto& r : rows) {
        if (r.size() != n) throw Error(ErrorCode::Parse, "Bloch vector length must be D^2-1");
        dump.samples.push_back(Eigen::Map<const RVector>(r.data(), static_cast<Eigen::Index>(n)));
    }
    return dump;
}

json to_json(const EstimationJob& job) {
    json j = {{"dA", job.da},           {"dB", job.db},         {"detector", job.detector.tag()},
              {"samples", job.samples}, {"seed", job.seed},     {"chains", job.chains},
              {"rescale_restarts", job.rescale_restarts}};
    const int dim = job.da * job.db;
    j["burn_in"] = job.burn_in.value_or(50L * (dim * dim - 1));
    j["thinning"] = job.thinning.value_or(static_cast<long>(dim * dim - 1));
    return j;
}

json estimate_record(const EstimationJob& job, const RatioEstimate& est) {
    return {{"version", std::string(version())},
            {"config", to_json(job)},
            {"ratio", est.ratio},
            {"stderr", est.std_error},
            {"batch_stderr", est.batch_error},
            {"binomial_stderr", est.binomial_error},
            {"hits", est.hits},
            {"samples", est.samples},
            {"detector", est.detector},
            {"seed", est.seed},
            {"repairs", est.repairs},
            {"wall_seconds", est.wall_seconds}};
}

json to_json(const TableRow& row) {
    return {{"table", row.entry.table},
            {"dA", row.entry.da},
            {"dB", row.entry.db},
            {"published_value", row.entry.published_value},
            {"published_error", row.entry.published_error},
            {"extended", row.entry.extended},
            {"ratio", row.estimate.ratio},
            {"stderr", row.estimate.std_error},
            {"hits", row.estimate.hits},
            {"samples", row.estimate.samples},
            {"combined_error", row.combined_error},
            {"criterion", row.criterion},
            {"pass", row.pass},
            {"seed", row.estimate.seed},
            {"wall_seconds", row.estimate.wall_seconds}};
}

void write_table_csv(std::ostream& os, const TableReport& report) {
    os << "table,dA,dB,samples,hits,desk,desk_stderr,published,published_error,combined,pass\n";
    for (const auto& r : report.rows)
        os << r.entry.table << ',' << r.entry.da << ',' << r.entry.db << ',' << r.estimate.samples << ','
           << r.estimate.hits << ',' << csv_real(r.estimate.ratio) << ',' << csv_real(r.estimate.std_error)
           << ',' << csv_real(r.entry.published_value) << ',' << csv_real(r.entry.published_error) << ','
           << csv_real(r.combined_error) << ',' << (r.pass ? "pass" : "fail") << '\n';
}

void write_table_text(std::ostream& os, const TableReport& report) {
    os << "Table " << report.table << " (scale " << report.scale << ")\n";
    os << std::left << std::setw(8) << "dA x dB" << std::right << std::setw(10) << "samples"
       << std::setw(14) << "desk" << std::setw(12) << "stderr" << std::setw(14) << "published"
       << std::setw(12) << "combined" << "  result\n";
    for (const auto& r : report.rows) {
        std::ostringstream dims;
        dims << r.entry.da << 'x' << r.entry.db;
        os << std::left << std::setw(8) << dims.str() << std::right << std::setw(10) << r.estimate.samples
           << std::setw(14) << csv_real(r.estimate.ratio) << std::setw(12) << csv_real(r.estimate.std_error)
           << std::setw(14) << csv_real(r.entry.published_value) << std::setw(12) << csv_real(r.combined_error)
           << "  " << (r.pass ? "pass" : "FAIL") << " (" << r.criterion << ")\n";
    }
    os << (report.all_passed() ? "all rows pass\n" : "some rows fail\n");
}

void write_bell_scan_csv(std::ostream& os, const std::vector<BellGridPoint>& grid) {
    os << "t1,t2,t3,class\n";
    for (const auto& p : grid)
        os << csv_real(p.t.t1) << ',' << csv_real(p.t.t2) << ',' << csv_real(p.t.t3) << ','
           << to_string(p.cls) << '\n';
}

} // namespace steerlab
