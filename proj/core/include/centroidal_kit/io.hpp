#pragma once

// Delimited text and JSON writers.  Numbers use 17 significant digits so that
// files round-trip exactly and are byte-stable for fixed inputs.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "centroidal_kit/centroidal.hpp"
#include "centroidal_kit/integrability.hpp"

namespace ckit {

std::string format_number(double x);

/// t, R (row-major 9), o (3), s (n_J), v (6), sdot (n_J).
void write_dynamics_csv(std::ostream& os, const Model& model,
                        const std::vector<TrajectorySample>& samples);

/// t, R_C (9), o_C (3), v_loc in A (6), J_A (6), J_G (6).  Samples without a
/// frame are rejected.
void write_centroidal_csv(std::ostream& os, const Model& model,
                          const std::vector<TrajectorySample>& samples);

/// t, J_A (6), J_G (6), v_loc in B (6), v_ave in G (6).
void write_momentum_csv(std::ostream& os, const Model& model,
                        const std::vector<TrajectorySample>& samples);

/// FNV-1a 64 of the serialized model document.
std::uint64_t model_hash(const Model& model);

nlohmann::ordered_json flatness_report_json(const Model& model, const FlatnessReport& report);

}  // namespace ckit
