#pragma once

#include "fracpme/cascade.hpp"
#include "fracpme/soe.hpp"
#include "fracpme/stepper.hpp"
#include "fracpme/verify.hpp"

#include <ostream>
#include <string>

namespace fracpme {

// JSON serializations. Key order is fixed and doubles print with full round-trip precision,
// so equal inputs give byte-identical text. Non-finite numbers become null.
std::string to_json(const VerificationReport& report);
std::string to_json(const CascadeReport& report);
std::string to_json(const LimitCertificate& cert);
std::string to_json(const EnergyAudit& audit);
std::string to_json(const SoECompression& soe);
/// Per-step Newton diagnostics and run metadata (no field values).
std::string to_json(const SolutionHistory& history);

/// Columns t,node,x,y,u,v; one row per time node and mesh node.
void write_history_csv(std::ostream& out, const SolutionHistory& history,
                       const SpatialProblem& problem);
/// Columns direction,fixed,from,to,increment. direction m holds n fixed; direction n holds
/// the largest m fixed.
void write_increments_csv(std::ostream& out, const CascadeReport& report);
/// Columns name,lhs,rhs,slack,tolerance,pass.
void write_checks_csv(std::ostream& out, const VerificationReport& report);

}  // namespace fracpme
