#pragma once

#include <string>
#include <vector>

#include "gsfl/schemes.hpp"

namespace gsfl {

// Fixed header `round,scheme,train_loss,test_accuracy,round_latency_s,
// cumulative_latency_s`, one row per round, reals at 6 significant digits,
// LF line endings.
std::string csv_string(const std::vector<RoundMetrics>& metrics);

void emit_csv(const std::vector<RoundMetrics>& metrics, const std::string& path);

}  // namespace gsfl
