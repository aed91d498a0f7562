#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "steerlab/entanglement.hpp"
#include "steerlab/nm_povm.hpp"
#include "steerlab/sampler.hpp"
#include "steerlab/state.hpp"
#include "steerlab/steering.hpp"
#include "steerlab/volume.hpp"

namespace steerlab {

/// Library version string, embedded in every output header.
std::string_view version() noexcept;

/// "%.17g": enough digits to round-trip any double.
std::string format_real(double value);

// POVM documents: params, basis ("canonical-gellmann" or explicit matrices)
// and S in row-major order. Loading rederives the effects; callers revalidate.
// A non-null header (generator settings) is embedded verbatim.
std::string povm_to_json(const NmPovm& povm, const nlohmann::json& header = nullptr);
NmPovm povm_from_json(std::string_view text);

// States: {"dA", "dB", "rho": [[re, im], ...]} with rho row-major.
nlohmann::json state_to_json(const BipartiteState& rho);
/// Throws Parse on malformed documents; the state itself is validated as usual.
BipartiteState state_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const SteeringVerdict& v);
nlohmann::json to_json(const EntanglementVerdict& v);
nlohmann::json to_json(const ValidationReport& r);

nlohmann::json to_json(const BlochDump& dump);
BlochDump bloch_dump_from_json(const nlohmann::json& doc);

nlohmann::json to_json(const EstimationJob& job);
/// One JSON-lines record: job config, estimate, version and wall time.
nlohmann::json estimate_record(const EstimationJob& job, const RatioEstimate& est);
nlohmann::json to_json(const TableRow& row);

void write_table_csv(std::ostream& os, const TableReport& report);
void write_table_text(std::ostream& os, const TableReport& report);

/// Columns t1,t2,t3,class.
void write_bell_scan_csv(std::ostream& os, const std::vector<BellGridPoint>& grid);

} // namespace steerlab
